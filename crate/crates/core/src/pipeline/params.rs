//! Parameter selection with certified closed-form tail integrals.
//!
//! The weight tail integral over [D, infinity) of s e^{-s}/2 ds equals
//! (D + 1) e^{-D} / 2, and over (-infinity, -r] of (2|t|+1) e^{-|t|}/2 dt
//! equals (2r + 3) e^{-r} / 2; both are evaluated as certified enclosures
//! and compared against rational thresholds exactly.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::interval::exp_rat;
use crate::rat::{rat, rat_int, Rat};

fn grid_step() -> Rat {
    rat(1, 32)
}

/// Certified upper bound of (d + 1) e^{-d} / 2 as a rational.
fn delta_tail_hi(d: &Rat) -> Rat {
    let e = exp_rat(&-d.clone());
    let v = crate::interval::Interval::from_rat(&(d + rat_int(1)))
        .mul(&e)
        .mul(&crate::interval::Interval::point(0.5));
    Rat::from_float(v.hi).unwrap_or_else(|| d.clone())
}

/// Certified upper bound of (2r + 3) e^{-r} / 2.
fn window_tail_hi(r: &Rat) -> Rat {
    let e = exp_rat(&-r.clone());
    let v = crate::interval::Interval::from_rat(&(rat_int(2) * r + rat_int(3)))
        .mul(&e)
        .mul(&crate::interval::Interval::point(0.5));
    Rat::from_float(v.hi).unwrap_or_else(|| r.clone())
}

/// Smallest grid value D with (D + 1) e^{-D} / 2 <= delta; monotone
/// nonincreasing in delta.
pub fn choose_delta_cutoff(delta: &Rat) -> Result<Rat> {
    if delta <= &Rat::zero() {
        return Err(Error::domain("delta must be positive"));
    }
    let step = grid_step();
    let mut d = Rat::zero();
    let cap = rat_int(64);
    while d <= cap {
        if delta_tail_hi(&d) <= *delta {
            return Ok(d);
        }
        d = &d + &step;
    }
    Err(Error::budget("cutoff search exceeded 64"))
}

#[derive(Debug, Clone)]
pub struct FlowParams {
    /// Half-width of the comparison time window (> cutoff).
    pub window: Rat,
    /// Lead time (> alpha).
    pub lead: Rat,
    pub big_r: Rat,
    pub big_t: Rat,
    pub delta_prime: Rat,
}

/// Picks window, lead, and the derived reach/lead times so that the three
/// displayed conditions hold with certified margins:
///   (2 window + 3) e^{-window} / 2 < delta / 3,
///   delta' (1 - e^{-window}) < delta / 3,
///   2 alpha (L + 2 window + 2 alpha) / lead < delta'.
pub fn choose_flow_params(
    alpha: &Rat,
    cutoff: &Rat,
    slack_l: &Rat,
    delta: &Rat,
) -> Result<FlowParams> {
    if alpha <= &Rat::zero() || delta <= &Rat::zero() || slack_l <= &Rat::zero() {
        return Err(Error::domain("parameters must be positive"));
    }
    let third = delta / rat_int(3);
    let step = grid_step();
    // delta' = min(delta/3, 1/2): then delta'(1 - e^{-w}) < delta/3
    // strictly, and delta' < 1.
    let delta_prime = third.clone().min(rat(1, 2));
    // window: smallest grid value above the cutoff with a certified tail.
    let mut window = cutoff + &step;
    let cap = rat_int(64);
    while window <= cap {
        if window_tail_hi(&window) < third {
            break;
        }
        window = &window + &step;
    }
    if window > cap {
        return Err(Error::budget("window search exceeded 64"));
    }
    // lead: rational threshold, exact arithmetic.
    let two = rat_int(2);
    let numer = &two * alpha * (slack_l + &two * &window + &two * alpha);
    let mut lead = &numer / &delta_prime + &step;
    // Round up to the grid and enforce lead > alpha.
    lead = {
        let q = (&lead / &step).ceil();
        q * &step
    };
    if lead <= *alpha {
        lead = alpha + &step;
    }
    let big_r = &lead + &two * &window + alpha;
    let big_t = &window + &lead;
    // T <= R - cutoff holds by algebra: R - T = window + alpha > cutoff.
    debug_assert!(&big_r - &big_t >= *cutoff);
    Ok(FlowParams {
        window,
        lead,
        big_r,
        big_t,
        delta_prime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat_to_f64;

    /// Quadrature oracle for the tail integral of s e^{-s}/2 from d.
    fn oracle_delta_tail(d: f64) -> f64 {
        let n = 200_000;
        let hi = d + 40.0;
        let h = (hi - d) / n as f64;
        let f = |s: f64| s * (-s).exp() * 0.5;
        let mut acc = 0.0;
        for i in 0..n {
            let a = d + i as f64 * h;
            acc += 0.5 * (f(a) + f(a + h)) * h;
        }
        acc
    }

    /// Oracle for the two-sided window tail of (2|t|+1) e^{-|t|}/2.
    fn oracle_window_tail(r: f64) -> f64 {
        let n = 200_000;
        let hi = r + 40.0;
        let h = (hi - r) / n as f64;
        let f = |s: f64| (2.0 * s + 1.0) * (-s).exp() * 0.5;
        let mut acc = 0.0;
        for i in 0..n {
            let a = r + i as f64 * h;
            acc += 0.5 * (f(a) + f(a + h)) * h;
        }
        acc
    }

    #[test]
    fn closed_forms_match_the_quadrature_oracle() {
        for d in [0.5f64, 1.0, 2.0, 3.5] {
            let closed = (d + 1.0) * (-d).exp() * 0.5;
            let oracle = oracle_delta_tail(d);
            assert!((closed - oracle).abs() < 1e-6, "delta tail at {d}");
            let closed = (2.0 * d + 3.0) * (-d).exp() * 0.5;
            let oracle = oracle_window_tail(d);
            assert!((closed - oracle).abs() < 1e-6, "window tail at {d}");
        }
    }

    #[test]
    fn cutoff_for_half_lands_in_the_bisection_bracket() {
        // (D+1) e^{-D} <= 1 first holds near 1.68.
        let d = choose_delta_cutoff(&rat(1, 2)).unwrap();
        let f = rat_to_f64(&d);
        assert!((1.67..=1.69).contains(&f), "got {f}");
    }

    #[test]
    fn cutoff_for_tenth_is_three() {
        let d = choose_delta_cutoff(&rat(1, 10)).unwrap();
        let f = rat_to_f64(&d);
        assert!((2.95..=3.05).contains(&f), "got {f}");
        // (3+1) e^{-3} = 0.199 <= 0.2.
    }

    #[test]
    fn huge_delta_gives_zero_cutoff() {
        let d = choose_delta_cutoff(&rat_int(1)).unwrap();
        assert!(d.is_zero());
    }

    #[test]
    fn cutoff_is_monotone_in_delta() {
        let mut prev: Option<Rat> = None;
        for k in 1..20i64 {
            let delta = rat(1, k);
            let d = choose_delta_cutoff(&delta).unwrap();
            if let Some(p) = prev {
                assert!(d >= p, "cutoff must grow as delta shrinks");
            }
            prev = Some(d);
        }
    }

    #[test]
    fn flow_params_satisfy_the_three_conditions() {
        let alpha = rat_int(1);
        let delta = rat(3, 10);
        let cutoff = choose_delta_cutoff(&delta).unwrap();
        let p = choose_flow_params(&alpha, &cutoff, &rat_int(5), &delta).unwrap();
        let third = rat_to_f64(&(&delta / rat_int(3)));
        let w = rat_to_f64(&p.window);
        assert!((2.0 * w + 3.0) * (-w).exp() * 0.5 < third);
        let dp = rat_to_f64(&p.delta_prime);
        assert!(dp * (1.0 - (-w).exp()) < third);
        let lead = rat_to_f64(&p.lead);
        assert!(2.0 * 1.0 * (5.0 + 2.0 * w + 2.0) / lead < dp);
        assert!(p.window > cutoff);
        assert!(p.lead > alpha);
        assert_eq!(p.big_t, &p.window + &p.lead);
        assert_eq!(p.big_r, &p.lead + rat_int(2) * &p.window + &alpha);
        assert!(&p.big_r - &p.big_t >= cutoff);
    }

    #[test]
    fn larger_delta_shrinks_the_windows() {
        let alpha = rat_int(1);
        let d1 = rat(1, 10);
        let d2 = rat(1, 2);
        let p1 = choose_flow_params(&alpha, &choose_delta_cutoff(&d1).unwrap(), &rat_int(2), &d1)
            .unwrap();
        let p2 = choose_flow_params(&alpha, &choose_delta_cutoff(&d2).unwrap(), &rat_int(2), &d2)
            .unwrap();
        assert!(p2.window <= p1.window);
        assert!(p2.lead <= p1.lead);
    }
}
