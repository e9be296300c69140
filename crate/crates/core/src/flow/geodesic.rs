//! Generalized geodesics: unit-speed on a support interval, locally
//! constant outside. Representation is a path plus a time shift, with the
//! path parametrized from the left support endpoint, so the flow acts
//! exactly on the shift and flow-composition laws are representation
//! equalities.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::group::element::GroupElement;
use crate::model::path::Path;
use crate::model::point::Point;
use crate::model::{act_path, eval_path, Model};
use crate::rat::{rat_floor, rat_int, Rat};
use crate::scalar::{Scalar, Trilean};

#[derive(Debug, Clone, PartialEq)]
pub struct Geodesic {
    pub path: Path,
    /// Time of the path's parameter origin: c(t) = path(t - shift).
    pub shift: Rat,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    /// Degenerate support of a constant geodesic.
    Point,
    Interval { left: Rat, len: Scalar },
    All,
}

impl Geodesic {
    pub fn constant(x: Point) -> Geodesic {
        Geodesic {
            path: Path::Constant(x),
            shift: Rat::zero(),
        }
    }

    /// Geodesic from x to y with c(t) = x for t <= 0 and c(t) = y for
    /// t >= d(x, y).
    pub fn between(model: &dyn Model, x: &Point, y: &Point) -> Result<Geodesic> {
        Ok(Geodesic {
            path: model.path(x, y)?,
            shift: Rat::zero(),
        })
    }

    /// Bi-infinite axis of a hyperbolic isometry of a tree model, phase 0
    /// at the on-axis anchor vertex.
    pub fn axis(model: &dyn Model, gen: &GroupElement) -> Result<Geodesic> {
        let (anchor, period) = crate::model::tree_common::axis_of(model, gen)?;
        Ok(Geodesic {
            path: Path::TreeAxis {
                gen: gen.clone(),
                anchor,
                period,
                phase: Rat::zero(),
            },
            shift: Rat::zero(),
        })
    }

    /// Bi-infinite Euclidean line through `base` with direction `dir`.
    pub fn line(base: Vec<Rat>, dir: Vec<Rat>) -> Result<Geodesic> {
        if dir.iter().all(|d| d.is_zero()) {
            return Err(Error::domain("line needs a nonzero direction"));
        }
        let coords: Vec<Scalar> = dir.iter().cloned().map(Scalar::Exact).collect();
        let norm = crate::model::euclidean::norm(&coords);
        Ok(Geodesic {
            path: Path::Line { base, dir, norm },
            shift: Rat::zero(),
        })
    }

    pub fn support(&self) -> Support {
        match &self.path {
            Path::Constant(_) => Support::Point,
            Path::Line { .. } | Path::TreeAxis { .. } => Support::All,
            p => Support::Interval {
                left: self.shift.clone(),
                len: p.length().expect("finite path has a length"),
            },
        }
    }

    pub fn is_bi_infinite(&self) -> bool {
        self.path.is_bi_infinite()
    }

    pub fn evaluate(&self, model: &dyn Model, t: &Rat) -> Result<Point> {
        eval_path(model, &self.path, &(t - &self.shift))
    }

    /// The flow: shifts parametrization, moving the support left by tau.
    pub fn flow(&self, tau: &Rat) -> Geodesic {
        if matches!(self.path, Path::Constant(_)) {
            return self.clone();
        }
        Geodesic {
            path: self.path.clone(),
            shift: &self.shift - tau,
        }
    }

    pub fn act(&self, model: &dyn Model, g: &GroupElement) -> Result<Geodesic> {
        Ok(Geodesic {
            path: act_path(model, g, &self.path)?,
            shift: self.shift.clone(),
        })
    }

    /// Times in [lo, hi] where the geodesic crosses a vertex or a support
    /// endpoint; the weight kink at 0 is the caller's business. Endpoint
    /// scalars may carry enclosure width on Euclidean models.
    pub fn breakpoints(&self, lo: &Rat, hi: &Rat) -> Vec<Scalar> {
        let mut out: Vec<Scalar> = Vec::new();
        let push_exact = |out: &mut Vec<Scalar>, t: Rat| {
            if &t >= lo && &t <= hi {
                out.push(Scalar::Exact(t));
            }
        };
        match &self.path {
            Path::Constant(_) => {}
            Path::Segment { len, .. } => {
                push_exact(&mut out, self.shift.clone());
                let right = Scalar::Exact(self.shift.clone()).add(len);
                match right {
                    Scalar::Exact(r) => push_exact(&mut out, r),
                    Scalar::Enclosed(iv) => {
                        let lo_r = Rat::from_float(iv.lo).unwrap_or_else(Rat::zero);
                        let hi_r = Rat::from_float(iv.hi).unwrap_or_else(Rat::zero);
                        if hi_r >= *lo && lo_r <= *hi {
                            out.push(Scalar::Enclosed(iv));
                        }
                    }
                }
            }
            Path::Line { .. } => {}
            Path::TreeSeg { cum, len, .. } => {
                push_exact(&mut out, self.shift.clone());
                for c in cum {
                    push_exact(&mut out, &self.shift + c);
                }
                push_exact(&mut out, &self.shift + len);
            }
            Path::TreeAxis {
                gen: _,
                anchor: _,
                period,
                phase,
            } => {
                // Vertex crossings at path parameter == 0 mod 1 on unit
                // trees; enumerate the spine offsets within one period.
                // Unit-edge trees put crossings on the integer grid of the
                // path parameter s = t - shift + phase.
                let s_lo = lo - &self.shift + phase;
                let s_hi = hi - &self.shift + phase;
                let mut k = rat_floor(&s_lo);
                let period_steps = period.to_integer();
                let _ = period_steps;
                loop {
                    let s = Rat::from_integer(k.clone());
                    if s > s_hi {
                        break;
                    }
                    if s >= s_lo {
                        let t = &s + &self.shift - phase;
                        push_exact(&mut out, t);
                    }
                    k += 1;
                }
            }
            Path::CircArc { sweep, .. } => {
                push_exact(&mut out, self.shift.clone());
                push_exact(&mut out, &self.shift + sweep.abs());
            }
        }
        out
    }

    /// True when the geodesic is certainly constant for all t >= bound
    /// (right side) or t <= bound (left side).
    pub fn constant_beyond(&self, bound: &Rat, right: bool) -> bool {
        match self.support() {
            Support::Point => true,
            Support::All => false,
            Support::Interval { left, len } => {
                if right {
                    match Scalar::Exact(left).add(&len).le(bound) {
                        Trilean::True => true,
                        _ => false,
                    }
                } else {
                    left >= *bound
                }
            }
        }
    }
}

/// Canonical window restriction: agrees with c on [-R, R], locally constant
/// outside; idempotent on exact models.
pub fn restrict_window(model: &dyn Model, c: &Geodesic, radius: &Rat) -> Result<Geodesic> {
    if radius <= &Rat::zero() {
        return Err(Error::domain("window radius must be positive"));
    }
    let neg_r = -radius.clone();
    match c.support() {
        Support::Point => Ok(c.clone()),
        Support::Interval { left, len } => {
            let right = Scalar::Exact(left.clone()).add(&len);
            let inside_left = left >= neg_r;
            let inside_right = matches!(right.le(radius), Trilean::True);
            if inside_left && inside_right {
                return Ok(c.clone());
            }
            let l = left.max(neg_r);
            let r = match right.min(&Scalar::Exact(radius.clone())) {
                Scalar::Exact(t) => t,
                Scalar::Enclosed(iv) => iv.mid_rat(),
            };
            let x = c.evaluate(model, &l)?;
            let y = c.evaluate(model, &r)?;
            Ok(Geodesic {
                path: model.path(&x, &y)?,
                shift: l,
            })
        }
        Support::All => {
            let x = c.evaluate(model, &neg_r)?;
            let y = c.evaluate(model, radius)?;
            Ok(Geodesic {
                path: model.path(&x, &y)?,
                shift: neg_r,
            })
        }
    }
}

/// Equality of geodesics as maps. Structural equality settles finite exact
/// paths; tree geodesics otherwise compare evaluations at the breakpoint
/// grid (and interval midpoints) out to the horizon. Conservative `false`
/// for enclosure-coordinate models where equality is undecidable.
pub fn geo_eq(model: &dyn Model, a: &Geodesic, b: &Geodesic, horizon: &Rat) -> Result<bool> {
    if a == b {
        return Ok(true);
    }
    let tree_like = |p: &Path| {
        matches!(
            p,
            Path::TreeSeg { .. } | Path::TreeAxis { .. } | Path::Constant(Point::Vertex(_))
        ) || matches!(p, Path::Constant(Point::EdgePoint { .. }))
    };
    if !(tree_like(&a.path) && tree_like(&b.path)) {
        return Ok(false);
    }
    if a.is_bi_infinite() != b.is_bi_infinite() {
        return Ok(false);
    }
    let lo = -horizon.clone();
    let mut times: Vec<Rat> = vec![lo.clone(), horizon.clone()];
    for s in a
        .breakpoints(&lo, horizon)
        .into_iter()
        .chain(b.breakpoints(&lo, horizon))
    {
        if let Scalar::Exact(t) = s {
            times.push(t);
        }
    }
    times.sort();
    times.dedup();
    let mids: Vec<Rat> = times
        .windows(2)
        .map(|w| (&w[0] + &w[1]) / rat_int(2))
        .collect();
    times.extend(mids);
    for t in &times {
        if a.evaluate(model, t)? != b.evaluate(model, t)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::euclidean::{point_from_rats, Euclidean};
    use crate::rat::rat;

    fn r1() -> Euclidean {
        Euclidean::new(1)
    }

    #[test]
    fn segment_evaluation_clamps() {
        let m = r1();
        let x = point_from_rats(&["0"]).unwrap();
        let y = point_from_rats(&["5"]).unwrap();
        let c = Geodesic::between(&m, &x, &y).unwrap();
        let at = |t: i64| c.evaluate(&m, &rat_int(t)).unwrap();
        assert_eq!(at(3), point_from_rats(&["3"]).unwrap());
        assert_eq!(at(-7), x);
        assert_eq!(at(10), y);
    }

    #[test]
    fn flow_shifts_parametrization_exactly() {
        let m = r1();
        let x = point_from_rats(&["0"]).unwrap();
        let y = point_from_rats(&["5"]).unwrap();
        let c = Geodesic::between(&m, &x, &y).unwrap();
        let c2 = c.flow(&rat_int(2));
        assert_eq!(
            c2.evaluate(&m, &rat_int(0)).unwrap(),
            point_from_rats(&["2"]).unwrap()
        );
        // Group law as exact representation equality.
        let back = c2.flow(&rat_int(-2));
        assert_eq!(back, c);
        let c3 = c.flow(&rat(1, 3)).flow(&rat(2, 3));
        assert_eq!(c3, c.flow(&rat_int(1)));
    }

    #[test]
    fn constants_are_flow_fixed() {
        let c = Geodesic::constant(point_from_rats(&["7"]).unwrap());
        assert_eq!(c.flow(&rat_int(3)), c);
        assert_eq!(c.support(), Support::Point);
    }

    #[test]
    fn restriction_is_identity_inside_and_truncates_outside() {
        let m = r1();
        let x = point_from_rats(&["0"]).unwrap();
        let y = point_from_rats(&["3"]).unwrap();
        let c = Geodesic::between(&m, &x, &y).unwrap();
        let r = restrict_window(&m, &c, &rat_int(5)).unwrap();
        assert_eq!(r, c);
        // A line truncates to the segment through c(-1), c(1).
        let line = Geodesic::line(vec![rat_int(0)], vec![rat_int(1)]).unwrap();
        let t = restrict_window(&m, &line, &rat_int(1)).unwrap();
        assert_eq!(
            t.evaluate(&m, &rat_int(-1)).unwrap(),
            point_from_rats(&["-1"]).unwrap()
        );
        assert_eq!(
            t.evaluate(&m, &rat_int(1)).unwrap(),
            point_from_rats(&["1"]).unwrap()
        );
        assert_eq!(
            t.evaluate(&m, &rat_int(4)).unwrap(),
            point_from_rats(&["1"]).unwrap()
        );
        let tt = restrict_window(&m, &t, &rat_int(1)).unwrap();
        assert_eq!(tt, t);
    }

    #[test]
    fn axis_evaluation_walks_the_cayley_tree() {
        use crate::model::cayley::CayleyTree;
        let m = CayleyTree::new(2, 32);
        let a = m.parse_elem("a").unwrap();
        let c = Geodesic::axis(&m, &a).unwrap();
        let at = |t: Rat| c.evaluate(&m, &t).unwrap();
        assert_eq!(at(rat_int(0)), m.base_point());
        assert_eq!(
            at(rat_int(2)),
            Point::Vertex(crate::model::VertexId::Word(vec![1, 1]))
        );
        assert_eq!(
            at(rat_int(-1)),
            Point::Vertex(crate::model::VertexId::Word(vec![-1]))
        );
        // g c = flow_1(c) for the axis generator.
        let gc = c.act(&m, &a).unwrap();
        let shifted = c.flow(&rat_int(1));
        assert!(geo_eq(&m, &gc, &shifted, &rat_int(8)).unwrap());
    }
}
