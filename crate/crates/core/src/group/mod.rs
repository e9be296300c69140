//! Group-side machinery over the model strategies: covirtually cyclic
//! subgroup descriptors, the V-foliated closeness predicate as a budgeted
//! semi-decision, and the action-property probes.

pub mod element;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::model::{metric_dg, Model, Point};
use crate::rat::{rat, rat_int, Rat};
use crate::scalar::{Scalar, Trilean};

pub use element::{GroupElement, Mat2};

/// (beta, eta) bound for the V-foliated closeness predicate.
#[derive(Debug, Clone, PartialEq)]
pub struct FolVBound {
    pub beta: Rat,
    pub eta: Rat,
}

impl FolVBound {
    pub fn new(beta: Rat, eta: Rat) -> Result<FolVBound> {
        if beta <= Rat::zero() || eta <= Rat::zero() {
            return Err(Error::domain("foliated bounds must be positive"));
        }
        Ok(FolVBound { beta, eta })
    }
}

/// Compact part of a covirtually cyclic subgroup: a literal finite set for
/// discrete groups, or a stabilizer described by what it fixes, enumerated
/// at a precision level.
#[derive(Debug, Clone)]
pub enum CompactPart {
    Finite(Vec<GroupElement>),
    PointStabilizer { point: Point, precision: u32 },
    WindowStabilizer { points: Vec<Point>, precision: u32 },
}

#[derive(Debug, Clone)]
pub struct CvcySubgroup {
    pub label: String,
    pub compact: CompactPart,
    pub cyclic_generator: Option<GroupElement>,
}

impl CvcySubgroup {
    pub fn compact_only(label: impl Into<String>, compact: CompactPart) -> CvcySubgroup {
        CvcySubgroup {
            label: label.into(),
            compact,
            cyclic_generator: None,
        }
    }

    pub fn trivial(label: impl Into<String>, model: &dyn Model) -> CvcySubgroup {
        CvcySubgroup::compact_only(label, CompactPart::Finite(vec![model.identity()]))
    }

    pub fn enumerate_compact(&self, model: &dyn Model) -> Result<Vec<GroupElement>> {
        match &self.compact {
            CompactPart::Finite(v) => Ok(v.clone()),
            CompactPart::PointStabilizer { point, precision } => {
                model.stabilizer_reps(point, *precision)
            }
            CompactPart::WindowStabilizer { points, precision } => {
                let first = points
                    .first()
                    .ok_or_else(|| Error::domain("empty stabilizer window"))?;
                let mut out = Vec::new();
                'cand: for g in model.stabilizer_reps(first, *precision)? {
                    for p in &points[1..] {
                        if model.act_point(&g, p)? != *p {
                            continue 'cand;
                        }
                    }
                    out.push(g);
                }
                Ok(out)
            }
        }
    }

    pub fn compact_contains(&self, model: &dyn Model, g: &GroupElement) -> Result<bool> {
        match &self.compact {
            CompactPart::Finite(v) => Ok(v.iter().any(|h| model.elem_eq(h, g))),
            CompactPart::PointStabilizer { point, .. } => {
                Ok(model.act_point(g, point)? == *point)
            }
            CompactPart::WindowStabilizer { points, .. } => {
                for p in points {
                    if model.act_point(g, p)? != *p {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }

    /// Membership up to the cyclic search range.
    pub fn contains(&self, model: &dyn Model, g: &GroupElement, cyclic_range: i64) -> Result<bool> {
        match &self.cyclic_generator {
            None => self.compact_contains(model, g),
            Some(t) => {
                for k in -cyclic_range..=cyclic_range {
                    let tk = crate::model::elem_pow(model, t, -k)?;
                    let shifted = model.mul(&tk, g)?;
                    if self.compact_contains(model, &shifted)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    /// Enumerates t^k * kappa over the compact representatives; the flag
    /// reports whether the cyclic range was capped before the ball bound
    /// `beta_cap` (if any) was certainly exceeded.
    pub fn enumerate(
        &self,
        model: &dyn Model,
        cyclic_range: i64,
        beta_cap: Option<&Rat>,
    ) -> Result<(Vec<GroupElement>, bool)> {
        let compact = self.enumerate_compact(model)?;
        let Some(t) = &self.cyclic_generator else {
            return Ok((compact, false));
        };
        let mut out = Vec::new();
        let mut truncated = true;
        'outer: for k in 0..=cyclic_range {
            for sign in [1i64, -1] {
                if k == 0 && sign < 0 {
                    continue;
                }
                let tk = crate::model::elem_pow(model, t, sign * k)?;
                if let Some(beta) = beta_cap {
                    let d = model.dg_origin(&tk)?;
                    if matches!(d.lt(beta), Trilean::False) {
                        // Powers only get longer in our models; the scan is
                        // complete once both signs pass the cap.
                        if sign < 0 || k == 0 {
                            truncated = false;
                            break 'outer;
                        }
                        continue;
                    }
                }
                for kappa in &compact {
                    out.push(model.mul(&tk, kappa)?);
                }
            }
        }
        if self.cyclic_generator.is_none() {
            truncated = false;
        }
        Ok((out, truncated))
    }
}

#[derive(Debug, Clone)]
pub enum FolVOutcome {
    /// Witness v with d_G(e, v) < beta and d_G(g v, g') < eta.
    Witness {
        witness: GroupElement,
        d_origin: Scalar,
        d_close: Scalar,
    },
    /// No witness among the enumerated elements, enumeration complete for
    /// the bound.
    Refusal,
    /// Budget or enclosure boundary prevented a decision.
    Inconclusive { reason: String },
}

impl FolVOutcome {
    pub fn is_witness(&self) -> bool {
        matches!(self, FolVOutcome::Witness { .. })
    }
}

/// Budgets for subgroup enumeration inside foliated checks.
#[derive(Debug, Clone, Copy)]
pub struct SearchBudget {
    pub cyclic_range: i64,
    pub precision: u32,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            cyclic_range: 24,
            precision: 2,
        }
    }
}

/// Semi-decides fol_V(g, g') < (beta, eta): searches the enumerated part of
/// V for a witness v with d_G(e, v) = d_G(g, g v) < beta and
/// d_G(g v, g') < eta. Ties break by closeness, then origin distance, then
/// element key.
pub fn fol_v_check(
    model: &dyn Model,
    sub: &CvcySubgroup,
    g: &GroupElement,
    g2: &GroupElement,
    bound: &FolVBound,
    budget: &SearchBudget,
) -> Result<FolVOutcome> {
    let (cands, truncated) = sub.enumerate(model, budget.cyclic_range, Some(&bound.beta))?;
    let mut best: Option<(Scalar, Scalar, GroupElement)> = None;
    let mut saw_unknown = false;
    for v in cands {
        let d_origin = model.dg_origin(&v)?;
        match d_origin.lt(&bound.beta) {
            Trilean::False => continue,
            Trilean::Unknown => {
                saw_unknown = true;
                continue;
            }
            Trilean::True => {}
        }
        let gv = model.mul(g, &v)?;
        let d_close = metric_dg(model, &gv, g2)?;
        match d_close.lt(&bound.eta) {
            Trilean::False => continue,
            Trilean::Unknown => {
                saw_unknown = true;
                continue;
            }
            Trilean::True => {}
        }
        let better = match &best {
            None => true,
            Some((bc, bo, bv)) => {
                use std::cmp::Ordering::*;
                match d_close.order_key(bc) {
                    Less => true,
                    Greater => false,
                    Equal => match d_origin.order_key(bo) {
                        Less => true,
                        Greater => false,
                        Equal => model.elem_key(&v) < model.elem_key(bv),
                    },
                }
            }
        };
        if better {
            best = Some((d_close, d_origin, v));
        }
    }
    if let Some((d_close, d_origin, witness)) = best {
        return Ok(FolVOutcome::Witness {
            witness,
            d_origin,
            d_close,
        });
    }
    if truncated {
        return Ok(FolVOutcome::Inconclusive {
            reason: "cyclic enumeration capped before exceeding beta".into(),
        });
    }
    if saw_unknown {
        return Ok(FolVOutcome::Inconclusive {
            reason: "enclosure straddles the bound".into(),
        });
    }
    Ok(FolVOutcome::Refusal)
}

/// Point stabilizer as a compact Cvcy descriptor.
pub fn stabilizer(model: &dyn Model, x: &Point, precision: u32) -> Result<CvcySubgroup> {
    model.check_point(x)?;
    Ok(CvcySubgroup::compact_only(
        format!("stab[{}]", x.display()),
        CompactPart::PointStabilizer {
            point: x.clone(),
            precision,
        },
    ))
}

#[derive(Debug, Clone)]
pub struct PropernessRow {
    pub radius: Rat,
    pub returners: usize,
}

#[derive(Debug, Clone)]
pub struct PropernessReport {
    pub rows: Vec<PropernessRow>,
    pub flagged_non_proper: bool,
}

/// Counts ball elements whose translate of the sampled compact set meets it
/// (within the sampling mesh) across a schedule of ball radii. A count that
/// is still growing at the last radius flags the action as non-proper at
/// this budget.
pub fn properness_probe(
    model: &dyn Model,
    sample: &[Point],
    mesh: &Rat,
    radii: &[Rat],
    precision: u32,
) -> Result<PropernessReport> {
    if sample.is_empty() {
        return Err(Error::domain("empty sample"));
    }
    let mut rows = Vec::new();
    for radius in radii {
        let ball = model.ball(radius, precision)?;
        let mut returners = 0usize;
        for g in &ball {
            let mut meets = false;
            'pairs: for x in sample {
                let gx = match model.act_point(g, x) {
                    Ok(p) => p,
                    Err(Error::Budget(_)) | Err(Error::Precision(_)) => continue,
                    Err(e) => return Err(e),
                };
                for y in sample {
                    let d = model.distance(&gx, y)?;
                    if !matches!(d.le(mesh), Trilean::False) {
                        meets = true;
                        break 'pairs;
                    }
                }
            }
            if meets {
                returners += 1;
            }
        }
        rows.push(PropernessRow {
            radius: radius.clone(),
            returners,
        });
    }
    let flagged = rows.len() >= 2 && {
        let last = &rows[rows.len() - 1];
        let prev = &rows[rows.len() - 2];
        last.returners > prev.returners
    };
    Ok(PropernessReport {
        rows,
        flagged_non_proper: flagged,
    })
}

#[derive(Debug, Clone)]
pub struct CosetDistanceRow {
    pub eta: Rat,
    pub smallest_beta: Option<Rat>,
    pub inconclusive: bool,
}

/// For each eta, scans a beta grid upward for the first foliated witness.
/// Raw data only; no limit is asserted.
pub fn coset_distance_probe(
    model: &dyn Model,
    sub: &CvcySubgroup,
    g: &GroupElement,
    g2: &GroupElement,
    eta_schedule: &[Rat],
    beta_cap: &Rat,
    budget: &SearchBudget,
) -> Result<Vec<CosetDistanceRow>> {
    let step = rat(1, 4);
    let mut rows = Vec::new();
    for eta in eta_schedule {
        let mut beta = step.clone();
        let mut found = None;
        let mut inconclusive = false;
        while &beta <= beta_cap {
            let bound = FolVBound::new(beta.clone(), eta.clone())?;
            match fol_v_check(model, sub, g, g2, &bound, budget)? {
                FolVOutcome::Witness { .. } => {
                    found = Some(beta.clone());
                    break;
                }
                FolVOutcome::Inconclusive { .. } => {
                    inconclusive = true;
                }
                FolVOutcome::Refusal => {}
            }
            beta = &beta + &step;
        }
        rows.push(CosetDistanceRow {
            eta: eta.clone(),
            smallest_beta: found,
            inconclusive,
        });
    }
    Ok(rows)
}

/// Constructive delta for the triangle inequality of fol_V: if
/// fol_V(g, g'), fol_V(g', g'') < (alpha, delta) then
/// fol_V(g, g'') < (2 alpha, eps).
pub fn fol_v_triangle_delta(model: &dyn Model, eps: &Rat, alpha: &Rat) -> Result<Rat> {
    let half = eps / rat_int(2);
    model.conjugation_delta(&half, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::cayley::CayleyTree;

    fn f2() -> CayleyTree {
        CayleyTree::new(2, 32)
    }

    fn gen_a_subgroup(model: &CayleyTree) -> CvcySubgroup {
        CvcySubgroup {
            label: "<a>".into(),
            compact: CompactPart::Finite(vec![model.identity()]),
            cyclic_generator: Some(model.parse_elem("a").unwrap()),
        }
    }

    #[test]
    fn identity_witness_for_equal_elements() {
        let m = f2();
        let v = gen_a_subgroup(&m);
        let g = m.parse_elem("bab").unwrap();
        let bound = FolVBound::new(rat_int(1), rat_int(1)).unwrap();
        let out = fol_v_check(&m, &v, &g, &g, &bound, &SearchBudget::default()).unwrap();
        match out {
            FolVOutcome::Witness { witness, .. } => {
                assert!(m.elem_eq(&witness, &m.identity()));
            }
            other => panic!("expected identity witness, got {other:?}"),
        }
    }

    #[test]
    fn witness_a_cubed_reaches_a3b() {
        // fol_<a>(e, a^3 b) < (4, 2) via v = a^3: d(e, a^3) = 3 < 4 and
        // d(a^3, a^3 b) = 1 < 2.
        let m = f2();
        let v = gen_a_subgroup(&m);
        let g = m.identity();
        let g2 = m.parse_elem("aaab").unwrap();
        let bound = FolVBound::new(rat_int(4), rat_int(2)).unwrap();
        let out = fol_v_check(&m, &v, &g, &g2, &bound, &SearchBudget::default()).unwrap();
        match out {
            FolVOutcome::Witness {
                witness,
                d_origin,
                d_close,
            } => {
                assert_eq!(witness.display(), "aaa");
                assert_eq!(d_origin, Scalar::Exact(rat_int(3)));
                assert_eq!(d_close, Scalar::Exact(rat_int(1)));
            }
            other => panic!("expected witness a^3, got {other:?}"),
        }
    }

    #[test]
    fn refusal_when_no_power_reaches() {
        // Every a^k has d(a^k, b^5) = k + 5 >= 5 > 1.
        let m = f2();
        let v = gen_a_subgroup(&m);
        let g = m.identity();
        let g2 = m.parse_elem("bbbbb").unwrap();
        let bound = FolVBound::new(rat_int(10), rat_int(1)).unwrap();
        let out = fol_v_check(&m, &v, &g, &g2, &bound, &SearchBudget::default()).unwrap();
        assert!(matches!(out, FolVOutcome::Refusal), "got {out:?}");
    }

    #[test]
    fn coset_membership_stabilizes() {
        let m = f2();
        let v = gen_a_subgroup(&m);
        // g' = a^2 is in eV: arbitrarily small eta succeeds with beta = 3.
        let g2 = m.parse_elem("aa").unwrap();
        let rows = coset_distance_probe(
            &m,
            &v,
            &m.identity(),
            &g2,
            &[rat(1, 2), rat(1, 8), rat(1, 64)],
            &rat_int(6),
            &SearchBudget::default(),
        )
        .unwrap();
        for row in &rows {
            assert_eq!(row.smallest_beta, Some(rat(9, 4)));
        }
        // g' = b refuses below eta = 1 at every beta.
        let rows =
            coset_distance_probe(
                &m,
                &v,
                &m.identity(),
                &m.parse_elem("b").unwrap(),
                &[rat(1, 2)],
                &rat_int(6),
                &SearchBudget::default(),
            )
            .unwrap();
        assert_eq!(rows[0].smallest_beta, None);
    }
}
