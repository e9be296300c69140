//! Foliated closeness in the flow space: the enclosure of
//! min over t in [-alpha, alpha] of d(flow_t(c), c'), decided by
//! branch-and-bound over the 1-Lipschitz dependence on t.

use std::collections::BinaryHeap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::flow::geodesic::Geodesic;
use crate::flow::quad::dist_fs;
use crate::interval::Interval;
use crate::model::Model;
use crate::rat::{rat_int, rat_to_f64, Rat};

#[derive(Debug, Clone)]
pub struct FolMin {
    /// Enclosure of the minimum over the window.
    pub value: Interval,
    /// A time achieving the best evaluated upper bound.
    pub argmin: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FolVerdict {
    Holds,
    Fails,
    /// The enclosure straddles delta: a first-class boundary outcome.
    Inconclusive,
}

struct Node {
    lower: f64,
    lo: Rat,
    hi: Rat,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.lower == other.lower && self.lo == other.lo
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Max-heap: order by *descending* lower bound so the heap pops the
        // node with the smallest lower bound; ties break on the left
        // endpoint for determinism.
        other
            .lower
            .partial_cmp(&self.lower)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| other.lo.cmp(&self.lo))
    }
}

/// Enclosure of min over t in [-alpha, alpha] of d(flow_t c, c') with width
/// at most tol. The map t -> d(flow_t c, c') is 1-Lipschitz, so the value
/// at a midpoint bounds a whole segment from below.
pub fn fol_fs_min(
    model: &dyn Model,
    c: &Geodesic,
    c2: &Geodesic,
    alpha: &Rat,
    tol: &Rat,
) -> Result<FolMin> {
    if alpha <= &Rat::zero() || tol <= &Rat::zero() {
        return Err(Error::domain("alpha and tol must be positive"));
    }
    let tol_f = rat_to_f64(tol);
    let q_tol = tol / rat_int(4);
    let eval = |t: &Rat| -> Result<Interval> {
        Ok(dist_fs(model, &c.flow(t), c2, &q_tol)?.interval())
    };
    let mut best_upper = f64::INFINITY;
    let mut best_arg = Rat::zero();
    let mut heap: BinaryHeap<Node> = BinaryHeap::new();
    let push = |heap: &mut BinaryHeap<Node>,
                    lo: Rat,
                    hi: Rat,
                    best_upper: &mut f64,
                    best_arg: &mut Rat|
     -> Result<()> {
        let mid = (&lo + &hi) / rat_int(2);
        let v = eval(&mid)?;
        if v.hi < *best_upper {
            *best_upper = v.hi;
            *best_arg = mid.clone();
        }
        let half = rat_to_f64(&((&hi - &lo) / rat_int(2)));
        heap.push(Node {
            lower: (v.lo - half).max(0.0),
            lo,
            hi,
        });
        Ok(())
    };
    push(
        &mut heap,
        -alpha.clone(),
        alpha.clone(),
        &mut best_upper,
        &mut best_arg,
    )?;
    let mut iterations = 0usize;
    loop {
        let node = heap.peek().expect("heap nonempty");
        let global_lower = node.lower;
        if best_upper - global_lower <= tol_f {
            return Ok(FolMin {
                value: Interval::new(global_lower.max(0.0), best_upper),
                argmin: best_arg,
            });
        }
        let node = heap.pop().unwrap();
        // Drop nodes that cannot contain the minimum.
        if node.lower > best_upper {
            continue;
        }
        let mid = (&node.lo + &node.hi) / rat_int(2);
        push(&mut heap, node.lo, mid.clone(), &mut best_upper, &mut best_arg)?;
        push(&mut heap, mid, node.hi, &mut best_upper, &mut best_arg)?;
        iterations += 1;
        if iterations > 40_000 {
            return Err(Error::budget("foliated minimization iteration cap"));
        }
    }
}

/// Decides fol(c, c') < (alpha, delta), reporting a boundary straddle as
/// inconclusive rather than forcing a strict verdict.
pub fn fol_fs_check(
    model: &dyn Model,
    c: &Geodesic,
    c2: &Geodesic,
    alpha: &Rat,
    delta: &Rat,
    tol: &Rat,
) -> Result<(FolVerdict, FolMin)> {
    let m = fol_fs_min(model, c, c2, alpha, tol)?;
    let d = rat_to_f64(delta);
    let verdict = if m.value.hi < d {
        FolVerdict::Holds
    } else if m.value.lo >= d {
        FolVerdict::Fails
    } else {
        FolVerdict::Inconclusive
    };
    Ok((verdict, m))
}

/// Constructive epsilon for foliated symmetry: fol(c, c') < (alpha, eps)
/// with eps = delta e^{-alpha} implies fol(c', c) < (alpha, delta).
pub fn fol_symmetry_eps(alpha: &Rat, delta: &Rat) -> Rat {
    let shrink = crate::interval::exp_rat(&-alpha.clone());
    // Round the factor down so the implication stays valid.
    let f = Rat::from_float(shrink.lo).unwrap_or_else(|| Rat::new(1.into(), 2.into()));
    delta * f
}

/// Constructive epsilon for the foliated triangle inequality: two bounds
/// < (alpha, eps) with eps = (delta/2) e^{-alpha} give < (2 alpha, delta).
pub fn fol_triangle_eps(alpha: &Rat, delta: &Rat) -> Rat {
    fol_symmetry_eps(alpha, &(delta / rat_int(2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::euclidean::{point_from_rats, Euclidean};
    use crate::rat::rat;

    #[test]
    fn exact_flow_translate_has_zero_foliated_distance() {
        let m = Euclidean::new(1);
        let c = Geodesic::between(
            &m,
            &point_from_rats(&["0"]).unwrap(),
            &point_from_rats(&["5"]).unwrap(),
        )
        .unwrap();
        let c2 = c.flow(&rat(1, 2));
        let out = fol_fs_min(&m, &c, &c2, &rat_int(1), &rat(1, 1000)).unwrap();
        assert!(out.value.lo <= 1e-9 && out.value.hi < 1e-3);
    }

    #[test]
    fn parallel_lines_minimize_at_zero_shift() {
        let m = Euclidean::new(2);
        let c = Geodesic::line(vec![Rat::zero(), Rat::zero()], vec![rat_int(1), Rat::zero()])
            .unwrap();
        let c2 = Geodesic::line(vec![Rat::zero(), rat_int(2)], vec![rat_int(1), Rat::zero()])
            .unwrap();
        let out = fol_fs_min(&m, &c, &c2, &rat_int(1), &rat(1, 1000)).unwrap();
        assert!(
            out.value.contains(2.0),
            "[{}, {}]",
            out.value.lo,
            out.value.hi
        );
    }

    #[test]
    fn residual_shift_beyond_the_window() {
        // c' = flow_3(c) on a unit-speed line with window 1: residue 2.
        let m = Euclidean::new(1);
        let c = Geodesic::line(vec![Rat::zero()], vec![rat_int(1)]).unwrap();
        let c2 = c.flow(&rat_int(3));
        let out = fol_fs_min(&m, &c, &c2, &rat_int(1), &rat(1, 1000)).unwrap();
        assert!(
            out.value.contains(2.0),
            "[{}, {}]",
            out.value.lo,
            out.value.hi
        );
        let (verdict, _) = fol_fs_check(&m, &c, &c2, &rat_int(1), &rat(5, 2), &rat(1, 1000))
            .unwrap();
        assert_eq!(verdict, FolVerdict::Holds);
        let (verdict, _) = fol_fs_check(&m, &c, &c2, &rat_int(1), &rat(3, 2), &rat(1, 1000))
            .unwrap();
        assert_eq!(verdict, FolVerdict::Fails);
    }
}
