//! A scalar that is exact when it can be and a certified enclosure when it
//! cannot. Tree geometry stays in `Exact`; a square root or exponential
//! drops to `Enclosed` and the width is carried from there on.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::interval::Interval;
use crate::rat::{rat_to_string, Rat};

#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(Rat),
    Enclosed(Interval),
}

/// Outcome of comparing an enclosure against a bound: the enclosure either
/// separates from the bound or straddles it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trilean {
    True,
    False,
    Unknown,
}

impl Trilean {
    pub fn is_true(self) -> bool {
        self == Trilean::True
    }
    pub fn and(self, o: Trilean) -> Trilean {
        match (self, o) {
            (Trilean::False, _) | (_, Trilean::False) => Trilean::False,
            (Trilean::True, Trilean::True) => Trilean::True,
            _ => Trilean::Unknown,
        }
    }
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(Rat::from_integer(0.into()))
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Exact(Rat::from_integer(n.into()))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&Rat> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Enclosed(_) => None,
        }
    }

    pub fn interval(&self) -> Interval {
        match self {
            Scalar::Exact(r) => Interval::from_rat(r),
            Scalar::Enclosed(iv) => *iv,
        }
    }

    pub fn width(&self) -> f64 {
        match self {
            Scalar::Exact(_) => 0.0,
            Scalar::Enclosed(iv) => iv.width(),
        }
    }

    pub fn add(&self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a + b),
            _ => Scalar::Enclosed(self.interval().add(&o.interval())),
        }
    }

    pub fn sub(&self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a - b),
            _ => Scalar::Enclosed(self.interval().sub(&o.interval())),
        }
    }

    pub fn mul(&self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a * b),
            _ => Scalar::Enclosed(self.interval().mul(&o.interval())),
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(num_traits::Signed::abs(a)),
            Scalar::Enclosed(iv) => Scalar::Enclosed(iv.abs()),
        }
    }

    pub fn min(&self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.clone().min(b.clone())),
            _ => Scalar::Enclosed(self.interval().min(&o.interval())),
        }
    }

    pub fn max(&self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.clone().max(b.clone())),
            _ => Scalar::Enclosed(self.interval().max(&o.interval())),
        }
    }

    /// Strict comparison against an exact bound, with `Unknown` reserved for
    /// genuinely straddling enclosures.
    pub fn lt(&self, bound: &Rat) -> Trilean {
        match self {
            Scalar::Exact(a) => {
                if a < bound {
                    Trilean::True
                } else {
                    Trilean::False
                }
            }
            Scalar::Enclosed(iv) => {
                let b = Interval::from_rat(bound);
                if iv.hi < b.lo {
                    Trilean::True
                } else if iv.lo >= b.hi {
                    Trilean::False
                } else {
                    Trilean::Unknown
                }
            }
        }
    }

    pub fn le(&self, bound: &Rat) -> Trilean {
        match self {
            Scalar::Exact(a) => {
                if a <= bound {
                    Trilean::True
                } else {
                    Trilean::False
                }
            }
            Scalar::Enclosed(iv) => {
                let b = Interval::from_rat(bound);
                if iv.hi <= b.lo {
                    Trilean::True
                } else if iv.lo > b.hi {
                    Trilean::False
                } else {
                    Trilean::Unknown
                }
            }
        }
    }

    /// Total order key for deterministic tie-breaking; compares enclosure
    /// midpoints when exactness is lost.
    pub fn order_key(&self, o: &Scalar) -> Ordering {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.cmp(b),
            _ => self
                .interval()
                .mid()
                .partial_cmp(&o.interval().mid())
                .unwrap_or(Ordering::Equal),
        }
    }

    pub fn display(&self) -> String {
        match self {
            Scalar::Exact(r) => rat_to_string(r),
            Scalar::Enclosed(iv) => format!("[{:?}, {:?}]", iv.lo, iv.hi),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn exactness_propagates() {
        let a = Scalar::Exact(rat(1, 3));
        let b = Scalar::Exact(rat(1, 6));
        assert_eq!(a.add(&b), Scalar::Exact(rat(1, 2)));
        assert!(a.mul(&b).is_exact());
    }

    #[test]
    fn mixed_drops_to_enclosure() {
        let a = Scalar::Exact(rat(1, 3));
        let b = Scalar::Enclosed(Interval::new(0.5, 0.5000001));
        let s = a.add(&b);
        assert!(!s.is_exact());
        assert!(s.interval().contains(0.83333335));
    }

    #[test]
    fn trilean_comparisons() {
        let a = Scalar::Exact(rat(1, 2));
        assert_eq!(a.lt(&rat(2, 3)), Trilean::True);
        assert_eq!(a.lt(&rat(1, 2)), Trilean::False);
        let b = Scalar::Enclosed(Interval::new(0.4999, 0.5001));
        assert_eq!(b.lt(&rat(1, 2)), Trilean::Unknown);
        assert_eq!(b.lt(&rat(2, 3)), Trilean::True);
        assert_eq!(b.lt(&rat(1, 3)), Trilean::False);
    }
}
