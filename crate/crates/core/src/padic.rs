//! Bounded-precision p-adic numbers.
//!
//! A value is a valuation plus a digit window of fixed length (the precision
//! level). Values constructed from rationals also carry the exact rational,
//! so arithmetic among them never loses precision; digit-only values (as fed
//! from config) track absolute precision and report exhaustion instead of
//! silently truncating.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rat::Rat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Padic {
    pub prime: u32,
    /// Valuation of the leading known digit; meaningful only when some digit
    /// is nonzero or the value is exactly zero.
    pub val: i64,
    /// Digit window: value = p^val * sum(digits[i] p^i), digits[0] != 0
    /// unless the value is zero-at-precision.
    pub digits: Vec<u32>,
    /// Absolute precision: the value is known modulo p^abs_prec.
    pub abs_prec: i64,
    /// Exact backing when the value came from rational arithmetic.
    pub exact: Option<Rat>,
}

fn pow_bigint(p: u32, k: u64) -> BigInt {
    BigInt::from(p).pow(k as u32)
}

/// p-adic valuation of a nonzero integer.
fn int_valuation(n: &BigInt, p: u32) -> u64 {
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0u64;
    while (&n % &p).is_zero() {
        n /= &p;
        v += 1;
    }
    v
}

/// Valuation of a nonzero rational.
pub fn rat_valuation(r: &Rat, p: u32) -> i64 {
    assert!(!r.is_zero());
    int_valuation(r.numer(), p) as i64 - int_valuation(r.denom(), p) as i64
}

/// Digits of the unit part of `r` (valuation removed) modulo p^len.
fn unit_digits(r: &Rat, p: u32, v: i64, len: usize) -> Vec<u32> {
    // unit = r / p^v; BigRational division reduces the fraction, so the
    // denominator is a p-unit exactly when v is the true valuation.
    let pk = if v >= 0 {
        Rat::from_integer(pow_bigint(p, v as u64))
    } else {
        Rat::new(BigInt::one(), pow_bigint(p, (-v) as u64))
    };
    let unit = r / pk;
    let modulus = pow_bigint(p, len as u64);
    let num_m = unit.numer().mod_floor(&modulus);
    let den_m = unit.denom().mod_floor(&modulus);
    let inv = mod_inverse(&den_m, &modulus).expect("denominator must be a p-unit");
    let mut u = (num_m * inv).mod_floor(&modulus);
    let pb = BigInt::from(p);
    let mut digits = Vec::with_capacity(len);
    for _ in 0..len {
        let (q, d) = u.div_mod_floor(&pb);
        digits.push(d.to_u32().unwrap());
        u = q;
    }
    digits
}

pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

impl Padic {
    /// Exact-backed value with `len` carried digits.
    pub fn from_rat(r: &Rat, prime: u32, len: usize) -> Self {
        if r.is_zero() {
            return Padic {
                prime,
                val: len as i64,
                digits: vec![],
                abs_prec: i64::MAX / 4,
                exact: Some(Rat::zero()),
            };
        }
        let v = rat_valuation(r, prime);
        let digits = unit_digits(r, prime, v, len);
        Padic {
            prime,
            val: v,
            digits,
            abs_prec: i64::MAX / 4,
            exact: Some(r.clone()),
        }
    }

    pub fn from_int(n: i64, prime: u32, len: usize) -> Self {
        Padic::from_rat(&Rat::from_integer(n.into()), prime, len)
    }

    /// Digit-specified value, known modulo p^(val + digits.len()).
    pub fn from_digits(prime: u32, val: i64, digits: Vec<u32>) -> Result<Self> {
        for &d in &digits {
            if d >= prime {
                return Err(Error::config(format!("digit {d} out of range for p={prime}")));
            }
        }
        let abs = val + digits.len() as i64;
        // Strip leading zeros to expose the true valuation window.
        let mut val = val;
        let mut digits = digits;
        while digits.first() == Some(&0) {
            digits.remove(0);
            val += 1;
        }
        if digits.is_empty() {
            return Ok(Padic {
                prime,
                val: abs,
                digits: vec![],
                abs_prec: abs,
                exact: None,
            });
        }
        Ok(Padic {
            prime,
            val,
            digits,
            abs_prec: abs,
            exact: None,
        })
    }

    pub fn is_zero_at_precision(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn exactly_zero(&self) -> bool {
        matches!(&self.exact, Some(r) if r.is_zero())
    }

    /// Certified valuation, or a precision error when every known digit is
    /// zero but the value may be nonzero beyond the window.
    pub fn valuation(&self) -> Result<i64> {
        if self.is_zero_at_precision() {
            if self.exactly_zero() {
                Ok(i64::MAX / 4)
            } else {
                Err(Error::precision(
                    "valuation undetermined: all carried digits are zero",
                ))
            }
        } else {
            Ok(self.val)
        }
    }

    fn addsub(&self, o: &Padic, subtract: bool, digit_len: usize) -> Result<Padic> {
        assert_eq!(self.prime, o.prime, "mixed primes");
        if let (Some(a), Some(b)) = (&self.exact, &o.exact) {
            let r = if subtract { a - b } else { a + b };
            return Ok(Padic::from_rat(&r, self.prime, digit_len));
        }
        // Digit arithmetic on the joint window [base, abs).
        let abs = self.abs_prec.min(o.abs_prec);
        let base = self.low_val().min(o.low_val());
        if abs <= base {
            return Ok(Padic {
                prime: self.prime,
                val: abs,
                digits: vec![],
                abs_prec: abs,
                exact: None,
            });
        }
        let a = self.as_int_times_pow(base, abs)?;
        let b = o.as_int_times_pow(base, abs)?;
        let n = if subtract { a - b } else { a + b };
        let width = (abs - base) as u64;
        let modulus = pow_bigint(self.prime, width);
        let mut u = n.mod_floor(&modulus);
        let pb = BigInt::from(self.prime);
        let mut digits = Vec::with_capacity(width as usize);
        for _ in 0..width {
            let (q, d) = u.div_mod_floor(&pb);
            digits.push(d.to_u32().unwrap());
            u = q;
        }
        let mut out = Padic {
            prime: self.prime,
            val: base,
            digits,
            abs_prec: abs,
            exact: None,
        };
        out.truncate_to_abs(abs);
        Ok(out)
    }

    fn low_val(&self) -> i64 {
        if self.digits.is_empty() {
            self.abs_prec
        } else {
            self.val
        }
    }

    /// Integer n with value ≡ p^base * n modulo p^abs, for digit windows.
    fn as_int_times_pow(&self, base: i64, abs: i64) -> Result<BigInt> {
        if let Some(r) = &self.exact {
            if r.is_zero() {
                return Ok(BigInt::zero());
            }
            let shifted = if base >= 0 {
                r / Rat::from_integer(pow_bigint(self.prime, base as u64))
            } else {
                r * Rat::from_integer(pow_bigint(self.prime, (-base) as u64))
            };
            let len = (abs - base).max(0) as usize;
            let digs = unit_digits(&shifted, self.prime, 0, len);
            let mut n = BigInt::zero();
            for (i, d) in digs.iter().enumerate() {
                n += BigInt::from(*d) * pow_bigint(self.prime, i as u64);
            }
            return Ok(n);
        }
        let mut n = BigInt::zero();
        for (i, d) in self.digits.iter().enumerate() {
            let e = self.val + i as i64 - base;
            if e < 0 {
                return Err(Error::precision("digit below window base"));
            }
            if self.val + (i as i64) >= abs {
                break;
            }
            n += BigInt::from(*d) * pow_bigint(self.prime, e as u64);
        }
        Ok(n)
    }

    fn truncate_to_abs(&mut self, abs: i64) {
        let keep = (abs - self.val).max(0) as usize;
        self.digits.truncate(keep);
        let mut val = self.val;
        let mut digits = std::mem::take(&mut self.digits);
        while digits.first() == Some(&0) {
            digits.remove(0);
            val += 1;
        }
        self.val = if digits.is_empty() { abs } else { val };
        self.digits = digits;
        self.abs_prec = abs;
    }

    pub fn add(&self, o: &Padic, digit_len: usize) -> Result<Padic> {
        self.addsub(o, false, digit_len)
    }

    pub fn sub(&self, o: &Padic, digit_len: usize) -> Result<Padic> {
        self.addsub(o, true, digit_len)
    }

    pub fn mul(&self, o: &Padic, digit_len: usize) -> Result<Padic> {
        assert_eq!(self.prime, o.prime);
        if let (Some(a), Some(b)) = (&self.exact, &o.exact) {
            return Ok(Padic::from_rat(&(a * b), self.prime, digit_len));
        }
        if self.exactly_zero() || o.exactly_zero() {
            return Ok(Padic::from_rat(&Rat::zero(), self.prime, digit_len));
        }
        // Relative precisions add through valuations.
        let va = self.valuation()?;
        let vb = o.valuation()?;
        let rel = (self.abs_prec - va).min(o.abs_prec - vb);
        if rel <= 0 {
            return Err(Error::precision("product has no certified digits"));
        }
        let a = self.as_int_times_pow(va, va + rel)?;
        let b = o.as_int_times_pow(vb, vb + rel)?;
        let prod = a * b;
        let modulus = pow_bigint(self.prime, rel as u64);
        let reduced = prod.mod_floor(&modulus);
        let mut digits = Vec::with_capacity(rel as usize);
        let mut u = reduced;
        let pb = BigInt::from(self.prime);
        for _ in 0..rel {
            let (q, d) = u.div_mod_floor(&pb);
            digits.push(d.to_u32().unwrap());
            u = q;
        }
        let mut out = Padic {
            prime: self.prime,
            val: va + vb,
            digits,
            abs_prec: va + vb + rel,
            exact: None,
        };
        let abs = out.abs_prec;
        out.truncate_to_abs(abs);
        Ok(out)
    }

    pub fn neg(&self, digit_len: usize) -> Padic {
        if let Some(a) = &self.exact {
            return Padic::from_rat(&-a, self.prime, digit_len);
        }
        if self.is_zero_at_precision() {
            return self.clone();
        }
        // Negate digits: p^len - value within the window.
        let rel = self.digits.len();
        let modulus = pow_bigint(self.prime, rel as u64);
        let mut n = BigInt::zero();
        for (i, d) in self.digits.iter().enumerate() {
            n += BigInt::from(*d) * pow_bigint(self.prime, i as u64);
        }
        let mut u = (&modulus - n).mod_floor(&modulus);
        let pb = BigInt::from(self.prime);
        let mut digits = Vec::with_capacity(rel);
        for _ in 0..rel {
            let (q, d) = u.div_mod_floor(&pb);
            digits.push(d.to_u32().unwrap());
            u = q;
        }
        let mut out = Padic {
            prime: self.prime,
            val: self.val,
            digits,
            abs_prec: self.abs_prec,
            exact: None,
        };
        let abs = out.abs_prec;
        out.truncate_to_abs(abs);
        out
    }

    /// Multiplies by p^k (exact shift of the valuation).
    pub fn shift_val(&self, k: i64) -> Padic {
        let mut out = self.clone();
        if let Some(r) = &mut out.exact {
            let pk = if k >= 0 {
                Rat::from_integer(pow_bigint(self.prime, k as u64))
            } else {
                Rat::new(BigInt::one(), pow_bigint(self.prime, (-k) as u64))
            };
            *r = r.clone() * pk;
        }
        if !out.exactly_zero() {
            out.val += k;
        }
        if out.abs_prec < i64::MAX / 8 {
            out.abs_prec += k;
        }
        out
    }

    /// Inverse of a nonzero value; digit forms keep their relative
    /// precision.
    pub fn inv(&self, digit_len: usize) -> Result<Padic> {
        if let Some(r) = &self.exact {
            if r.is_zero() {
                return Err(Error::domain("inverse of zero"));
            }
            return Ok(Padic::from_rat(&r.recip(), self.prime, digit_len));
        }
        let v = self.valuation()?;
        let rel = (self.abs_prec - v) as usize;
        let unit = self.as_int_times_pow(v, self.abs_prec)?;
        let modulus = pow_bigint(self.prime, rel as u64);
        let inv = mod_inverse(&unit.mod_floor(&modulus), &modulus)
            .ok_or_else(|| Error::precision("unit part not invertible at precision"))?;
        let mut digits = Vec::with_capacity(rel);
        let mut u = inv;
        let pb = BigInt::from(self.prime);
        for _ in 0..rel {
            let (q, d) = u.div_mod_floor(&pb);
            digits.push(d.to_u32().unwrap());
            u = q;
        }
        let mut out = Padic {
            prime: self.prime,
            val: -v,
            digits,
            abs_prec: -v + rel as i64,
            exact: None,
        };
        let abs = out.abs_prec;
        out.truncate_to_abs(abs);
        Ok(out)
    }

    /// Residue of a p-integral value modulo p^k, certified by the carried
    /// precision.
    pub fn residue_mod(&self, k: u32) -> Result<BigInt> {
        if k == 0 {
            return Ok(BigInt::zero());
        }
        if self.exactly_zero() {
            return Ok(BigInt::zero());
        }
        if self.abs_prec < k as i64 {
            return Err(Error::precision(format!(
                "residue mod p^{k} needs absolute precision {k}, have {}",
                self.abs_prec
            )));
        }
        if !self.is_zero_at_precision() && self.val < 0 {
            return Err(Error::domain("residue of a non-integral value"));
        }
        let n = self.as_int_times_pow(0, k as i64)?;
        Ok(n.mod_floor(&pow_bigint(self.prime, k as u64)))
    }

    /// Agreement at the joint carried precision.
    pub fn eq_at_precision(&self, o: &Padic) -> bool {
        if let (Some(a), Some(b)) = (&self.exact, &o.exact) {
            return a == b;
        }
        let abs = self.abs_prec.min(o.abs_prec);
        let base = self.low_val().min(o.low_val());
        if abs <= base {
            return true;
        }
        match (self.as_int_times_pow(base, abs), o.as_int_times_pow(base, abs)) {
            (Ok(a), Ok(b)) => {
                let m = pow_bigint(self.prime, (abs - base) as u64);
                a.mod_floor(&m) == b.mod_floor(&m)
            }
            _ => false,
        }
    }

    pub fn display(&self) -> String {
        if self.exactly_zero() {
            return "0".into();
        }
        format!(
            "p^{}*({})",
            self.val,
            self.digits
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(",")
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn rational_expansion_digits() {
        // 1/3 in Q_2: inverse of 3 mod 16 is 11 = 1+2+8 -> digits 1,1,0,1.
        let x = Padic::from_rat(&rat(1, 3), 2, 4);
        assert_eq!(x.val, 0);
        assert_eq!(x.digits, vec![1, 1, 0, 1]);
        // 12 = 4*3 in Q_2: valuation 2, unit 3 -> digits 1,1.
        let y = Padic::from_rat(&rat(12, 1), 2, 4);
        assert_eq!(y.val, 2);
        assert_eq!(&y.digits[..2], &[1, 1]);
    }

    #[test]
    fn valuations() {
        assert_eq!(rat_valuation(&rat(8, 3), 2), 3);
        assert_eq!(rat_valuation(&rat(3, 8), 2), -3);
        assert_eq!(rat_valuation(&rat(9, 5), 3), 2);
    }

    #[test]
    fn exact_arithmetic_stays_exact() {
        let a = Padic::from_rat(&rat(5, 2), 2, 6);
        let b = Padic::from_rat(&rat(1, 6), 2, 6);
        let s = a.add(&b, 6).unwrap();
        assert_eq!(s.exact, Some(rat(8, 3)));
        let p = a.mul(&b, 6).unwrap();
        assert_eq!(p.exact, Some(rat(5, 12)));
    }

    #[test]
    fn digit_form_addition_and_cancellation() {
        // x = 1 + 2 (digits 1,1 at val 0), y = -1 represented by digits.
        let x = Padic::from_digits(2, 0, vec![1, 1, 0, 0]).unwrap();
        let y = Padic::from_rat(&rat(-3, 1), 2, 4);
        let s = x.add(&y, 4).unwrap();
        assert!(s.is_zero_at_precision());
        assert!(s.valuation().is_err(), "cancelled value must not claim a valuation");
    }

    #[test]
    fn eq_at_precision_ignores_unknown_tail() {
        let x = Padic::from_digits(2, 0, vec![1, 0, 1]).unwrap();
        let y = Padic::from_rat(&rat(5, 1), 2, 8);
        assert!(x.eq_at_precision(&y));
        // 13 = 5 + 8 also agrees within the 3-digit window.
        let z = Padic::from_rat(&rat(13, 1), 2, 8);
        assert!(x.eq_at_precision(&z));
        let w = Padic::from_rat(&rat(7, 1), 2, 8);
        assert!(!x.eq_at_precision(&w));
    }
}
