//! Certified evaluation of the exponentially weighted flow-space metric
//!
//!     d(c, c') = integral over R of d_Z(c(t), c'(t)) / (2 e^|t|) dt.
//!
//! The time axis is cut at the breakpoint grid of both geodesics. On tree
//! models the integrand is piecewise affine with rational breakpoints, so
//! every piece integrates in closed form against the weight; on Euclidean
//! models each piece is convex and is bracketed by its chord from above and
//! two tangent lines from below, subdivided adaptively. Tails are exact
//! where both geodesics are eventually constant and Lipschitz-bounded
//! otherwise.

use std::cell::RefCell;
use std::collections::HashMap;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::flow::geodesic::Geodesic;
use crate::interval::Interval;
use crate::model::point::Point;
use crate::model::{Model, VertexId};
use crate::rat::{rat, rat_int, rat_to_f64, Rat};
use crate::scalar::Scalar;

thread_local! {
    static EXP_CACHE: RefCell<HashMap<Rat, Interval>> = RefCell::new(HashMap::new());
}

/// e^r with memoization per thread.
pub fn exp_cached(r: &Rat) -> Interval {
    EXP_CACHE.with(|c| {
        if let Some(v) = c.borrow().get(r) {
            return *v;
        }
        let v = crate::interval::exp_rat(r);
        c.borrow_mut().insert(r.clone(), v);
        v
    })
}

/// integral of e^{-|t|}/2 over [p, q], with p <= q on one side of zero.
fn weight_mass(p: &Rat, q: &Rat) -> Interval {
    let half = Interval::point(0.5);
    if q <= &Rat::zero() {
        exp_cached(q).sub(&exp_cached(p)).mul(&half)
    } else {
        exp_cached(&-p.clone())
            .sub(&exp_cached(&-q.clone()))
            .mul(&half)
    }
}

/// integral over [p, q] (one side of zero) of (a t + b) e^{-|t|}/2 with
/// interval coefficients, where the affine function interpolates d_p at p
/// and d_q at q.
fn affine_weighted(p: &Rat, q: &Rat, d_p: &Interval, d_q: &Interval) -> Interval {
    let pw = Interval::from_rat(p);
    let qw = Interval::from_rat(q);
    let dt = Interval::from_rat(&(q - p));
    let a = d_q.sub(d_p).div(&dt);
    let b = d_p.sub(&a.mul(&pw));
    let half = Interval::point(0.5);
    if q <= &Rat::zero() {
        // antiderivative (a t - a + b) e^{t} / 2
        let f = |t: &Rat, tw: &Interval| -> Interval {
            a.mul(tw).sub(&a).add(&b).mul(&exp_cached(t)).mul(&half)
        };
        f(q, &qw).sub(&f(p, &pw))
    } else {
        // antiderivative -(a t + a + b) e^{-t} / 2
        let f = |t: &Rat, tw: &Interval| -> Interval {
            a.mul(tw)
                .add(&a)
                .add(&b)
                .neg()
                .mul(&exp_cached(&-t.clone()))
                .mul(&half)
        };
        f(q, &qw).sub(&f(p, &pw))
    }
}

fn dist_interval(model: &dyn Model, x: &Point, y: &Point) -> Result<Interval> {
    Ok(model.distance(x, y)?.interval())
}

/// Offset of a point on the closed edge {u, v}, measured from u.
fn offset_on(
    model: &dyn Model,
    pt: &Point,
    u: &VertexId,
    v: &VertexId,
) -> Result<Option<Rat>> {
    match pt {
        Point::Vertex(w) if w == u => Ok(Some(Rat::zero())),
        Point::Vertex(w) if w == v => Ok(Some(model.edge_len(u, v)?)),
        Point::EdgePoint { u: a, v: b, offset } if a == u && b == v => Ok(Some(offset.clone())),
        _ => Ok(None),
    }
}

/// The closed edge a non-constant tree point pair traverses, if visible.
fn carrier_edge(p0: &Point, p1: &Point) -> Option<(VertexId, VertexId)> {
    match (p0, p1) {
        (Point::EdgePoint { u, v, .. }, _) => Some((u.clone(), v.clone())),
        (_, Point::EdgePoint { u, v, .. }) => Some((u.clone(), v.clone())),
        _ => None,
    }
}

/// Exact tree piece: splits at a same-edge meeting kink if present, then
/// integrates the affine distance in closed form.
fn tree_piece(
    model: &dyn Model,
    c1: &Geodesic,
    c2: &Geodesic,
    p: &Rat,
    q: &Rat,
    depth: u32,
) -> Result<Interval> {
    let x_p = c1.evaluate(model, p)?;
    let x_q = c1.evaluate(model, q)?;
    let y_p = c2.evaluate(model, p)?;
    let y_q = c2.evaluate(model, q)?;
    let d_p = model.distance(&x_p, &y_p)?;
    let d_q = model.distance(&x_q, &y_q)?;
    let (d_p, d_q) = match (d_p.as_exact(), d_q.as_exact()) {
        (Some(a), Some(b)) => (a.clone(), b.clone()),
        _ => return Err(Error::domain("tree metric must be exact")),
    };
    if depth > 0 {
        // Same-edge kink: both points travel one common edge and cross.
        let edge = carrier_edge(&x_p, &x_q).or_else(|| carrier_edge(&y_p, &y_q));
        if let Some((u, v)) = edge {
            let offs = (
                offset_on(model, &x_p, &u, &v)?,
                offset_on(model, &x_q, &u, &v)?,
                offset_on(model, &y_p, &u, &v)?,
                offset_on(model, &y_q, &u, &v)?,
            );
            if let (Some(o1p), Some(o1q), Some(o2p), Some(o2q)) = offs {
                let dl_p = &o1p - &o2p;
                let dl_q = &o1q - &o2q;
                if (dl_p.is_positive() && dl_q.is_negative())
                    || (dl_p.is_negative() && dl_q.is_positive())
                {
                    let t_star = p + (q - p) * &dl_p / (&dl_p - &dl_q);
                    if &t_star > p && &t_star < q {
                        let left = tree_piece(model, c1, c2, p, &t_star, depth - 1)?;
                        let right = tree_piece(model, c1, c2, &t_star, q, depth - 1)?;
                        return Ok(left.add(&right));
                    }
                }
            }
        }
        // The integrand must now be affine; check the midpoint exactly.
        let mid = (p + q) / rat_int(2);
        let d_mid = model
            .distance(&c1.evaluate(model, &mid)?, &c2.evaluate(model, &mid)?)?;
        let predicted = (&d_p + &d_q) / rat_int(2);
        if d_mid.as_exact() != Some(&predicted) {
            // A structure change slipped between breakpoints; bisect.
            let left = tree_piece(model, c1, c2, p, &mid, depth - 1)?;
            let right = tree_piece(model, c1, c2, &mid, q, depth - 1)?;
            return Ok(left.add(&right));
        }
    }
    Ok(affine_weighted(
        p,
        q,
        &Interval::from_rat(&d_p),
        &Interval::from_rat(&d_q),
    ))
}

/// Convex piece bracket: chord above, two tangent chords below, adaptive
/// subdivision until the bracket width fits the budget.
#[allow(clippy::too_many_arguments)]
fn convex_piece(
    model: &dyn Model,
    c1: &Geodesic,
    c2: &Geodesic,
    p: &Rat,
    q: &Rat,
    f_p: &Interval,
    f_q: &Interval,
    budget: f64,
    depth: u32,
) -> Result<Interval> {
    let mid = (p + q) / rat_int(2);
    let f_m = dist_interval(
        model,
        &c1.evaluate(model, &mid)?,
        &c2.evaluate(model, &mid)?,
    )?;
    let upper = affine_weighted(p, q, f_p, f_q);
    // Lower: secant slopes bound the one-sided derivatives at the midpoint.
    let dt_l = Interval::from_rat(&(&mid - p));
    let dt_r = Interval::from_rat(&(q - &mid));
    let s_l = f_m.sub(f_p).div(&dt_l);
    let s_r = f_q.sub(&f_m).div(&dt_r);
    let at_p = f_m.add(&s_r.mul(&Interval::from_rat(&(p - &mid))));
    let at_q = f_m.add(&s_l.mul(&Interval::from_rat(&(q - &mid))));
    let lower_left = affine_weighted(p, &mid, &at_p, &f_m);
    let lower_right = affine_weighted(&mid, q, &f_m, &at_q);
    let lower = lower_left.add(&lower_right);
    let gap = upper.hi - lower.lo;
    if gap <= budget || depth == 0 {
        return Ok(Interval::new(lower.lo.max(0.0), upper.hi.max(0.0)));
    }
    let left = convex_piece(model, c1, c2, p, &mid, f_p, &f_m, budget / 2.0, depth - 1)?;
    let right = convex_piece(model, c1, c2, &mid, q, &f_m, f_q, budget / 2.0, depth - 1)?;
    Ok(left.add(&right))
}

fn is_tree_point(p: &Point) -> bool {
    matches!(p, Point::Vertex(_) | Point::EdgePoint { .. })
}

/// Right or left window edge: the smallest integer radius covering the
/// finite support, or the Lipschitz cutoff for bi-infinite sides.
fn side_cutoff(
    c1: &Geodesic,
    c2: &Geodesic,
    d0_hi: f64,
    tol_quarter: f64,
    right: bool,
) -> Result<(Rat, bool)> {
    let extent = |c: &Geodesic| -> Option<Rat> {
        match c.support() {
            crate::flow::geodesic::Support::Point => Some(Rat::zero()),
            crate::flow::geodesic::Support::Interval { left, len } => {
                if right {
                    let r = Scalar::Exact(left).add(&len);
                    Some(match r {
                        Scalar::Exact(t) => t,
                        Scalar::Enclosed(iv) => Rat::from_float(iv.hi).unwrap_or_default(),
                    })
                } else {
                    Some(left)
                }
            }
            crate::flow::geodesic::Support::All => None,
        }
    };
    match (extent(c1), extent(c2)) {
        (Some(a), Some(b)) => {
            let far = if right {
                a.max(b).max(Rat::zero())
            } else {
                a.min(b).min(Rat::zero())
            };
            // Round outward to an integer for stable exp caching.
            let t = if right {
                -crate::rat::rat_floor(&-far.clone())
            } else {
                crate::rat::rat_floor(&far)
            };
            let t = Rat::from_integer(t) + if right { rat_int(1) } else { rat_int(-1) };
            Ok((t, true))
        }
        _ => {
            let mut t = 2i64;
            loop {
                let bound = (d0_hi + 2.0 * t as f64 + 2.0) * 0.5 * (-(t as f64)).exp();
                if bound * 1.05 <= tol_quarter {
                    break;
                }
                t += 1;
                if t > 200 {
                    return Err(Error::budget("quadrature window exceeds 200"));
                }
            }
            Ok((if right { rat_int(t) } else { rat_int(-t) }, false))
        }
    }
}

/// Certified enclosure of the flow-space distance, width at most `tol`.
pub fn dist_fs(model: &dyn Model, c1: &Geodesic, c2: &Geodesic, tol: &Rat) -> Result<Scalar> {
    if tol <= &Rat::zero() {
        return Err(Error::domain("tolerance must be positive"));
    }
    if c1 == c2 {
        return Ok(Scalar::Exact(Rat::zero()));
    }
    let tol_f = rat_to_f64(tol);
    let zero = Rat::zero();
    let x0 = c1.evaluate(model, &zero)?;
    let y0 = c2.evaluate(model, &zero)?;
    let d0 = dist_interval(model, &x0, &y0)?;
    let (t_right, right_exact) = side_cutoff(c1, c2, d0.hi, tol_f / 4.0, true)?;
    let (t_left, left_exact) = side_cutoff(c1, c2, d0.hi, tol_f / 4.0, false)?;

    // Breakpoint grid.
    let mut grid: Vec<Rat> = vec![t_left.clone(), zero.clone(), t_right.clone()];
    for s in c1
        .breakpoints(&t_left, &t_right)
        .into_iter()
        .chain(c2.breakpoints(&t_left, &t_right))
    {
        match s {
            Scalar::Exact(t) => grid.push(t),
            Scalar::Enclosed(iv) => {
                if let (Some(a), Some(b)) = (Rat::from_float(iv.lo), Rat::from_float(iv.hi)) {
                    grid.push(a);
                    grid.push(b);
                }
            }
        }
    }
    grid.sort();
    grid.dedup();
    grid.retain(|t| t >= &t_left && t <= &t_right);

    let tree_mode = is_tree_point(&x0) && is_tree_point(&y0);
    let mut total = Interval::zero();
    let narrow = rat(1, 1_000_000_000);
    for w in grid.windows(2) {
        let (p, q) = (&w[0], &w[1]);
        if p == q {
            continue;
        }
        if (q - p) < narrow {
            // Sliver around an enclosure-valued breakpoint: hull bound.
            let mid = (p + q) / rat_int(2);
            let dm = dist_interval(
                model,
                &c1.evaluate(model, &mid)?,
                &c2.evaluate(model, &mid)?,
            )?;
            let wdt = rat_to_f64(&(q - p));
            let hull = Interval::new((dm.lo - wdt).max(0.0), dm.hi + wdt);
            total = total.add(&weight_mass(p, q).mul(&hull));
            continue;
        }
        if tree_mode {
            total = total.add(&tree_piece(model, c1, c2, p, q, 40)?);
        } else {
            let f_p = dist_interval(
                model,
                &c1.evaluate(model, p)?,
                &c2.evaluate(model, p)?,
            )?;
            let f_q = dist_interval(
                model,
                &c1.evaluate(model, q)?,
                &c2.evaluate(model, q)?,
            )?;
            let budget = (tol_f / 2.0) * weight_mass(p, q).hi.min(1.0);
            total = total.add(&convex_piece(
                model, c1, c2, p, q, &f_p, &f_q, budget, 48,
            )?);
        }
    }

    // Tails.
    for (t_edge, exact, right) in [(&t_right, right_exact, true), (&t_left, left_exact, false)] {
        let d_edge = dist_interval(
            model,
            &c1.evaluate(model, t_edge)?,
            &c2.evaluate(model, t_edge)?,
        )?;
        let abs_edge = if right {
            t_edge.clone()
        } else {
            -t_edge.clone()
        };
        let decay = exp_cached(&-abs_edge).mul(&Interval::point(0.5));
        if exact {
            total = total.add(&d_edge.mul(&decay));
        } else {
            let upper = d_edge.add(&Interval::point(2.0)).mul(&decay).hi;
            let half_d = d_edge.mul(&Interval::point(-0.5));
            let lower = d_edge
                .sub(&Interval::point(2.0))
                .add(&half_d.exp().mul(&Interval::point(2.0)))
                .mul(&decay)
                .lo
                .max(0.0);
            total = total.add(&Interval::new(lower, upper.max(lower)));
        }
    }

    let total = total.clamp_nonneg();
    if total.width() > tol_f * 1.0001 {
        return Err(Error::budget(format!(
            "quadrature width {} exceeds tolerance {}",
            total.width(),
            tol_f
        )));
    }
    Ok(Scalar::Enclosed(total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::cayley::CayleyTree;
    use crate::model::euclidean::{point_from_rats, Euclidean};

    /// Independent oracle: high-resolution trapezoid quadrature over
    /// [-T, T] plus the Lipschitz tail bound, all in plain f64.
    fn oracle_dist_fs(model: &dyn Model, c1: &Geodesic, c2: &Geodesic, t_max: f64) -> (f64, f64) {
        let n = 40_000usize;
        let mut acc = 0.0f64;
        let h = 2.0 * t_max / n as f64;
        let d_at = |t: f64| -> f64 {
            let tr = Rat::from_float(t).unwrap();
            let x = c1.evaluate(model, &tr).unwrap();
            let y = c2.evaluate(model, &tr).unwrap();
            model.distance(&x, &y).unwrap().interval().mid()
        };
        let weight = |t: f64| 0.5 * (-t.abs()).exp();
        let mut prev = d_at(-t_max) * weight(-t_max);
        for i in 1..=n {
            let t = -t_max + i as f64 * h;
            let cur = d_at(t) * weight(t);
            acc += 0.5 * (prev + cur) * h;
            prev = cur;
        }
        let d_t = d_at(t_max).max(d_at(-t_max));
        let tail = (d_t + 2.0 + 2.0 * t_max) * (-t_max).exp();
        (acc - tail - 1e-6, acc + tail + 1e-6)
    }

    #[test]
    fn constant_pair_integrates_to_the_distance() {
        let m = Euclidean::new(1);
        let c1 = Geodesic::constant(point_from_rats(&["0"]).unwrap());
        let c2 = Geodesic::constant(point_from_rats(&["3"]).unwrap());
        let d = dist_fs(&m, &c1, &c2, &rat(1, 1_000_000)).unwrap();
        let iv = d.interval();
        assert!(iv.contains(3.0), "[{}, {}]", iv.lo, iv.hi);
        assert!(iv.width() < 1e-6);
    }

    #[test]
    fn shifted_line_distance_is_the_shift() {
        // c a bi-infinite unit-speed line, c' its flow by s: the integrand
        // is constantly |s|.
        let m = Euclidean::new(1);
        let c = Geodesic::line(vec![Rat::zero()], vec![rat_int(1)]).unwrap();
        let c2 = c.flow(&rat(3, 2));
        let d = dist_fs(&m, &c, &c2, &rat(1, 100_000)).unwrap();
        let iv = d.interval();
        assert!(iv.contains(1.5), "[{}, {}]", iv.lo, iv.hi);
    }

    #[test]
    fn self_distance_is_exactly_zero() {
        let m = CayleyTree::new(2, 32);
        let a = m.parse_elem("a").unwrap();
        let c = Geodesic::axis(&m, &a).unwrap();
        assert_eq!(dist_fs(&m, &c, &c, &rat(1, 1000)).unwrap(), Scalar::zero());
    }

    #[test]
    fn tree_segment_pair_matches_oracle() {
        let m = CayleyTree::new(2, 32);
        let x = m.base_point();
        let ya = m
            .act_point(
                &m.parse_elem("aab").unwrap(),
                &m.base_point(),
            )
            .unwrap();
        let yb = m
            .act_point(&m.parse_elem("bA").unwrap(), &m.base_point())
            .unwrap();
        let c1 = Geodesic::between(&m, &x, &ya).unwrap();
        let c2 = Geodesic::between(&m, &x, &yb).unwrap().flow(&rat(1, 2));
        let d = dist_fs(&m, &c1, &c2, &rat(1, 1_000_000)).unwrap();
        let (lo, hi) = oracle_dist_fs(&m, &c1, &c2, 16.0);
        let iv = d.interval();
        assert!(
            iv.lo >= lo && iv.hi <= hi,
            "certified [{}, {}] vs oracle [{lo}, {hi}]",
            iv.lo,
            iv.hi
        );
        assert!(iv.width() < 1e-6);
    }

    #[test]
    fn euclidean_segment_pair_matches_oracle() {
        let m = Euclidean::new(2);
        let c1 = Geodesic::between(
            &m,
            &point_from_rats(&["0", "0"]).unwrap(),
            &point_from_rats(&["3", "4"]).unwrap(),
        )
        .unwrap();
        let c2 = Geodesic::between(
            &m,
            &point_from_rats(&["1", "0"]).unwrap(),
            &point_from_rats(&["0", "2"]).unwrap(),
        )
        .unwrap();
        let d = dist_fs(&m, &c1, &c2, &rat(1, 100_000)).unwrap();
        let (lo, hi) = oracle_dist_fs(&m, &c1, &c2, 16.0);
        let iv = d.interval();
        assert!(
            iv.lo >= lo && iv.hi <= hi,
            "certified [{}, {}] vs oracle [{lo}, {hi}]",
            iv.lo,
            iv.hi
        );
        assert!(iv.width() < 1e-5);
    }

    #[test]
    fn axis_flow_translate_matches_oracle() {
        let m = CayleyTree::new(2, 48);
        let c = Geodesic::axis(&m, &m.parse_elem("a").unwrap()).unwrap();
        let c2 = c.flow(&rat_int(3));
        // Integrand is constantly 3 (points 3 apart along the axis).
        let d = dist_fs(&m, &c, &c2, &rat(1, 10_000)).unwrap();
        let iv = d.interval();
        assert!(iv.contains(3.0), "[{}, {}]", iv.lo, iv.hi);
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        let m = Euclidean::new(1);
        let c = Geodesic::constant(point_from_rats(&["0"]).unwrap());
        assert!(matches!(
            dist_fs(&m, &c, &c, &Rat::zero()),
            Err(Error::Domain(_))
        ));
    }
}
