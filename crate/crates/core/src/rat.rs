//! Exact rational scalars and their text form `"num/den"`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_zero() -> Rat {
    Rat::zero()
}

pub fn rat_one() -> Rat {
    Rat::one()
}

/// Parses `"3"`, `"-3/4"`, or `"12/8"` (reduced on construction).
/// A zero denominator is a config error, never a panic.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| Error::config(format!("bad rational numerator {num:?}")))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| Error::config(format!("bad rational denominator {den:?}")))?;
    if d.is_zero() {
        return Err(Error::config(format!("zero denominator in rational {s:?}")));
    }
    Ok(Rat::new(n, d))
}

pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Nearest-enough f64 together with a certificate direction is handled in
/// `interval`; this gives a plain approximation for display and heuristics.
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::MAX);
        let d = r.denom().to_f64().unwrap_or(f64::MAX);
        n / d
    })
}

/// Largest integer `k` with `k <= r`.
pub fn rat_floor(r: &Rat) -> BigInt {
    r.floor().to_integer()
}

pub fn rat_abs(r: &Rat) -> Rat {
    r.abs()
}

/// Rounds `r` to the grid `step * Z`, toward the nearest grid point
/// (ties toward even multiples, which keeps the map deterministic).
pub fn rat_snap_to_grid(r: &Rat, step: &Rat) -> Rat {
    let q = r / step;
    let down = q.floor();
    let frac = &q - &down;
    let half = rat(1, 2);
    let k = if frac > half {
        down.to_integer() + 1
    } else if frac < half {
        down.to_integer()
    } else {
        let d = down.to_integer();
        if (&d % 2i32).is_zero() {
            d
        } else {
            d + 1
        }
    };
    Rat::from_integer(k) * step
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_roundtrip() {
        assert_eq!(parse_rat("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rat("-12/8").unwrap(), rat(-3, 2));
        assert_eq!(parse_rat("7").unwrap(), rat_int(7));
        assert_eq!(rat_to_string(&rat(-3, 2)), "-3/2");
        assert_eq!(rat_to_string(&rat_int(5)), "5");
    }

    #[test]
    fn zero_denominator_is_config_error() {
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x/2").is_err());
    }

    #[test]
    fn snap_to_grid() {
        let step = rat(1, 4);
        // 3/8 is a tie between 1/4 and 1/2; ties go to the even multiple.
        assert_eq!(rat_snap_to_grid(&rat(3, 8), &step), rat(1, 2));
        assert_eq!(rat_snap_to_grid(&rat(5, 16), &step), rat(1, 4));
        assert_eq!(rat_snap_to_grid(&rat(-3, 8), &step), rat(-1, 2));
        assert_eq!(rat_snap_to_grid(&rat(-5, 16), &step), rat(-1, 4));
    }
}
