//! Outward-rounded interval arithmetic over f64.
//!
//! Every arithmetic endpoint is nudged one ulp outward after the IEEE
//! operation, so enclosures stay valid without trusting libm: `exp` is built
//! from interval `+`/`*` (argument halving plus a Taylor tail bound) and
//! `sqrt` uses the correctly rounded hardware square root.

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::rat::{rat_to_f64, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

fn down(x: f64) -> f64 {
    if x.is_finite() {
        x.next_down()
    } else {
        x
    }
}

fn up(x: f64) -> f64 {
    if x.is_finite() {
        x.next_up()
    } else {
        x
    }
}

impl Interval {
    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn zero() -> Self {
        Interval::point(0.0)
    }

    pub fn one() -> Self {
        Interval::point(1.0)
    }

    /// Tight enclosure of an exact rational: starts from the f64
    /// approximation and walks endpoints until the exact comparison holds.
    pub fn from_rat(r: &Rat) -> Self {
        let approx = rat_to_f64(r);
        if !approx.is_finite() {
            return Interval::new(f64::MIN, f64::MAX);
        }
        let mut lo = approx;
        let mut hi = approx;
        while Rat::from_float(lo).map_or(true, |q| q > *r) {
            lo = down(lo);
        }
        while Rat::from_float(hi).map_or(true, |q| q < *r) {
            hi = up(hi);
        }
        Interval::new(lo, hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Deterministic exact-rational representative inside the enclosure.
    pub fn mid_rat(&self) -> Rat {
        Rat::from_float(self.mid()).unwrap_or_else(|| Rat::from_float(self.lo).unwrap())
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_rat(&self, r: &Rat) -> bool {
        let lo = Rat::from_float(self.lo).unwrap();
        let hi = Rat::from_float(self.hi).unwrap();
        lo <= *r && *r <= hi
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval::new(down(self.lo + o.lo), up(self.hi + o.hi))
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        Interval::new(down(self.lo - o.hi), up(self.hi - o.lo))
    }

    pub fn neg(&self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let cands = [
            self.lo * o.lo,
            self.lo * o.hi,
            self.hi * o.lo,
            self.hi * o.hi,
        ];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for c in cands {
            lo = lo.min(c);
            hi = hi.max(c);
        }
        Interval::new(down(lo), up(hi))
    }

    /// Division by an interval that does not straddle zero.
    pub fn div(&self, o: &Interval) -> Interval {
        assert!(
            o.lo > 0.0 || o.hi < 0.0,
            "interval division by a zero-straddling divisor"
        );
        let cands = [
            self.lo / o.lo,
            self.lo / o.hi,
            self.hi / o.lo,
            self.hi / o.hi,
        ];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for c in cands {
            lo = lo.min(c);
            hi = hi.max(c);
        }
        Interval::new(down(lo), up(hi))
    }

    pub fn abs(&self) -> Interval {
        if self.lo >= 0.0 {
            *self
        } else if self.hi <= 0.0 {
            self.neg()
        } else {
            Interval::new(0.0, up((-self.lo).max(self.hi)))
        }
    }

    pub fn max(&self, o: &Interval) -> Interval {
        Interval::new(self.lo.max(o.lo), self.hi.max(o.hi))
    }

    pub fn min(&self, o: &Interval) -> Interval {
        Interval::new(self.lo.min(o.lo), self.hi.min(o.hi))
    }

    pub fn hull(&self, o: &Interval) -> Interval {
        Interval::new(self.lo.min(o.lo), self.hi.max(o.hi))
    }

    pub fn clamp_nonneg(&self) -> Interval {
        Interval::new(self.lo.max(0.0), self.hi.max(0.0))
    }

    /// `sqrt` of a nonnegative enclosure; hardware sqrt is correctly rounded,
    /// one outward ulp certifies the endpoints.
    pub fn sqrt(&self) -> Interval {
        let lo = self.lo.max(0.0);
        let hi = self.hi.max(0.0);
        Interval::new(down(lo.sqrt()).max(0.0), up(hi.sqrt()))
    }

    /// e^x via k halvings and a degree-`TERMS` Taylor sum with explicit tail.
    pub fn exp(&self) -> Interval {
        Interval::new(exp_lo(self.lo), exp_hi(self.hi))
    }

    pub fn is_certainly_lt(&self, bound: f64) -> bool {
        self.hi < bound
    }

    pub fn is_certainly_le(&self, bound: f64) -> bool {
        self.hi <= bound
    }

    pub fn is_certainly_gt(&self, bound: f64) -> bool {
        self.lo > bound
    }
}

const TERMS: usize = 14;

/// Core interval exponential at a point, returning an enclosure.
fn exp_point(x: f64) -> Interval {
    if x == 0.0 {
        return Interval::one();
    }
    // Halve the argument until |s| <= 1/4, then square back up.
    let mut k = 0u32;
    let mut scale = 1.0f64;
    while (x / scale).abs() > 0.25 {
        scale *= 2.0;
        k += 1;
        if k > 64 {
            break;
        }
    }
    let s = Interval::point(x).div(&Interval::point(scale));
    // Taylor sum with interval arithmetic.
    let mut sum = Interval::one();
    let mut term = Interval::one();
    for i in 1..=TERMS {
        term = term.mul(&s).div(&Interval::point(i as f64));
        sum = sum.add(&term);
    }
    // Tail bound: |s|^(T+1)/(T+1)! * 1/(1 - |s|/(T+2)), |s| <= 1/4.
    let sa = s.abs();
    let mut tail = Interval::one();
    for i in 1..=(TERMS + 1) {
        tail = tail.mul(&sa).div(&Interval::point(i as f64));
    }
    let geom = Interval::one().div(&Interval::new(1.0 - 0.25 / (TERMS as f64 + 2.0), 1.0));
    tail = tail.mul(&geom);
    let mut out = Interval::new(down(sum.lo - tail.hi), up(sum.hi + tail.hi));
    for _ in 0..k {
        out = out.mul(&out);
        // exp is positive; squaring preserves that but keep the floor tight.
        out.lo = out.lo.max(0.0);
    }
    out
}

fn exp_lo(x: f64) -> f64 {
    exp_point(x).lo.max(0.0)
}

fn exp_hi(x: f64) -> f64 {
    exp_point(x).hi
}

/// Enclosure of e^r for an exact rational argument.
pub fn exp_rat(r: &Rat) -> Interval {
    Interval::from_rat(r).exp()
}

/// Enclosure of e^{-|r|}, the flow-space weight numerator at time r.
pub fn exp_neg_abs(r: &Rat) -> Interval {
    exp_rat(&-r.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn from_rat_encloses() {
        for (n, d) in [(1i64, 3i64), (-7, 11), (355, 113), (0, 1), (10, 1)] {
            let r = rat(n, d);
            let iv = Interval::from_rat(&r);
            assert!(iv.contains_rat(&r), "{n}/{d} not in [{}, {}]", iv.lo, iv.hi);
            assert!(iv.width() < 1e-12 * (1.0 + rat_to_f64(&r).abs()));
        }
    }

    #[test]
    fn arithmetic_encloses_truth() {
        let a = Interval::from_rat(&rat(1, 3));
        let b = Interval::from_rat(&rat(1, 7));
        let sum = a.add(&b);
        assert!(sum.contains_rat(&rat(10, 21)));
        let prod = a.mul(&b);
        assert!(prod.contains_rat(&rat(1, 21)));
        let quot = a.div(&b);
        assert!(quot.contains_rat(&rat(7, 3)));
    }

    #[test]
    fn exp_matches_reference_values() {
        // Reference values to 20+ digits (independent of f64 libm).
        let cases = [
            (0.0f64, 1.0f64),
            (1.0, std::f64::consts::E),
            (-1.0, 1.0 / std::f64::consts::E),
            (-5.0, 0.006737946999085467),
            (3.5, 33.11545195869231),
            (-20.0, 2.061153622438558e-9),
        ];
        for (x, truth) in cases {
            let iv = Interval::point(x).exp();
            assert!(
                iv.lo <= truth && truth <= iv.hi,
                "exp({x}): {truth} not in [{}, {}]",
                iv.lo,
                iv.hi
            );
            assert!(iv.width() / truth < 1e-11, "exp({x}) too wide: {}", iv.width());
        }
    }

    #[test]
    fn sqrt_encloses() {
        let iv = Interval::from_rat(&rat(2, 1)).sqrt();
        assert!(iv.lo <= 1.4142135623730951 && 1.414213562373095 <= iv.hi);
        assert!(iv.width() < 1e-14);
    }
}
