//! Periodicity data of a geodesic under the group action: the elements
//! translating it along the flow, the least positive translation time, and
//! the pointwise stabilizer. Probes for the shrinking-isotropy condition on
//! fundamental-domain samples build on these.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::flow::geodesic::{geo_eq, Geodesic};
use crate::flow::quad::dist_fs;
use crate::group::{CompactPart, CvcySubgroup, GroupElement};
use crate::model::{Model, Point};
use crate::rat::{rat, rat_floor, rat_int, Rat};
use crate::scalar::Trilean;

#[derive(Debug, Clone)]
pub struct PeriodInfo {
    /// Least positive translation time; None encodes infinity.
    pub tau: Option<Rat>,
    pub translation_witness: Option<GroupElement>,
    /// Elements found fixing the geodesic pointwise (t = 0).
    pub stabilizer: Vec<GroupElement>,
    /// All translation times found within the search window.
    pub translation_values: Vec<Rat>,
    pub inconclusive: bool,
}

impl PeriodInfo {
    /// The translation subgroup as a Cvcy descriptor: the stabilizer
    /// representatives, extended by the translation witness when periodic.
    pub fn vc_subgroup(&self, label: impl Into<String>) -> CvcySubgroup {
        CvcySubgroup {
            label: label.into(),
            compact: CompactPart::Finite(self.stabilizer.clone()),
            cyclic_generator: self.translation_witness.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PeriodBudget {
    pub precision: u32,
    /// Horizon for evaluation-based geodesic equality.
    pub eq_horizon: i64,
}

impl Default for PeriodBudget {
    fn default() -> Self {
        PeriodBudget {
            precision: 2,
            eq_horizon: 10,
        }
    }
}

/// Window points that pin down a finite geodesic: its breakpoint values.
fn window_points(model: &dyn Model, c: &Geodesic) -> Result<Vec<Point>> {
    let mut times: Vec<Rat> = vec![Rat::zero()];
    for s in c.breakpoints(&rat_int(-1_000_000), &rat_int(1_000_000)) {
        if let crate::scalar::Scalar::Exact(t) = s {
            times.push(t);
        }
    }
    times.sort();
    times.dedup();
    let mut pts = Vec::new();
    for t in &times {
        let p = c.evaluate(model, t)?;
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    Ok(pts)
}

/// Finds all (g, t) with g c = flow_t(c) for |t| <= t_max on the unit-edge
/// grid, plus the pointwise stabilizer at t = 0.
pub fn periodicity(
    model: &dyn Model,
    c: &Geodesic,
    t_max: &Rat,
    budget: &PeriodBudget,
) -> Result<PeriodInfo> {
    if t_max <= &Rat::zero() {
        return Err(Error::domain("t_max must be positive"));
    }
    if !c.is_bi_infinite() {
        // A non-bi-infinite geodesic admits no positive translation; only
        // the pointwise stabilizer remains.
        let pts = window_points(model, c)?;
        let first = pts
            .first()
            .ok_or_else(|| Error::domain("geodesic with no window points"))?;
        let mut stab = Vec::new();
        'cand: for g in model.stabilizer_reps(first, budget.precision)? {
            for p in &pts[1..] {
                if model.act_point(&g, p)? != *p {
                    continue 'cand;
                }
            }
            stab.push(g);
        }
        return Ok(PeriodInfo {
            tau: None,
            translation_witness: None,
            stabilizer: stab,
            translation_values: vec![],
            inconclusive: false,
        });
    }

    // Axis case: translations must respect the unit vertex-crossing grid.
    let horizon = {
        let base = rat_int(budget.eq_horizon);
        let t_ceil = -rat_floor(&-t_max.clone());
        base + Rat::from_integer(t_ceil) + rat_int(2)
    };
    let s0 = {
        // First vertex-crossing time at or after 0.
        let bps = c.breakpoints(&Rat::zero(), &rat_int(4));
        match bps.into_iter().find_map(|s| match s {
            crate::scalar::Scalar::Exact(t) => Some(t),
            _ => None,
        }) {
            Some(t) => t,
            None => return Err(Error::domain("axis without vertex crossings")),
        }
    };
    let v = c.evaluate(model, &s0)?;
    let v_next = c.evaluate(model, &(&s0 + rat_int(1)))?;
    let t_floor = rat_floor(t_max);
    use num_traits::ToPrimitive;
    let t_cap = t_floor.to_i64().unwrap_or(0);
    let mut inconclusive = false;
    let mut stabilizer = Vec::new();
    let mut values = Vec::new();
    let mut witness: Option<(Rat, GroupElement)> = None;
    for t in -t_cap..=t_cap {
        let tr = rat_int(t);
        let target = match (
            c.evaluate(model, &(&s0 + &tr)),
            c.evaluate(model, &(&s0 + &tr + rat_int(1))),
        ) {
            (Ok(u), Ok(u2)) => (u, u2),
            (Err(Error::Budget(_)), _) | (_, Err(Error::Budget(_))) => {
                inconclusive = true;
                continue;
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        let cands = match model.point_translators(&v, &target.0, budget.precision) {
            Ok(cs) => cs,
            Err(Error::Budget(_)) | Err(Error::Precision(_)) => {
                inconclusive = true;
                continue;
            }
            Err(e) => return Err(e),
        };
        let shifted = c.flow(&tr);
        let mut found_here = false;
        for g in cands {
            if model.act_point(&g, &v_next)? != target.1 {
                continue;
            }
            let gc = match c.act(model, &g) {
                Ok(gc) => gc,
                Err(Error::Budget(_)) | Err(Error::Precision(_)) => {
                    inconclusive = true;
                    continue;
                }
                Err(e) => return Err(e),
            };
            match geo_eq(model, &gc, &shifted, &horizon) {
                Ok(true) => {
                    found_here = true;
                    if t == 0 {
                        stabilizer.push(g);
                    } else if t > 0 {
                        let replace = match &witness {
                            None => true,
                            Some((bt, bg)) => {
                                tr < *bt
                                    || (tr == *bt && model.elem_key(&g) < model.elem_key(bg))
                            }
                        };
                        if replace {
                            witness = Some((tr.clone(), g));
                        }
                    }
                }
                Ok(false) => {}
                Err(Error::Budget(_)) | Err(Error::Precision(_)) => {
                    inconclusive = true;
                }
                Err(e) => return Err(e),
            }
        }
        if found_here {
            values.push(tr);
        }
    }
    values.sort();
    Ok(PeriodInfo {
        tau: witness.as_ref().map(|(t, _)| t.clone()),
        translation_witness: witness.map(|(_, g)| g),
        stabilizer,
        translation_values: values,
        inconclusive,
    })
}

/// Semi-decides g in V_c: whether g translates c by some on-grid time with
/// |t| <= t_max.
pub fn in_translation_group(
    model: &dyn Model,
    c: &Geodesic,
    g: &GroupElement,
    t_max: &Rat,
    budget: &PeriodBudget,
) -> Result<bool> {
    let gc = match c.act(model, g) {
        Ok(gc) => gc,
        Err(Error::Budget(_)) | Err(Error::Precision(_)) => return Ok(false),
        Err(e) => return Err(e),
    };
    let horizon = rat_int(budget.eq_horizon);
    if !c.is_bi_infinite() {
        return geo_eq(model, &gc, c, &horizon);
    }
    use num_traits::ToPrimitive;
    let cap = rat_floor(t_max).to_i64().unwrap_or(0);
    for t in -cap..=cap {
        match geo_eq(model, &gc, &c.flow(&rat_int(t)), &horizon) {
            Ok(true) => return Ok(true),
            Ok(false) => {}
            Err(Error::Budget(_)) | Err(Error::Precision(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(false)
}

#[derive(Debug, Clone)]
pub struct AssumptionRow {
    pub center: usize,
    /// Largest scheduled radius at which every nearby short-period sample
    /// has its translation group inside the center's.
    pub passing_radius: Option<Rat>,
    pub failures: Vec<String>,
    pub excluded_inconclusive: usize,
}

#[derive(Debug, Clone)]
pub struct AssumptionReport {
    pub rows: Vec<AssumptionRow>,
    pub total_excluded: usize,
}

/// Probes the shrinking-isotropy condition on a fundamental-domain sample:
/// for each center c0 and radius r, every sampled c within flow-space
/// distance r whose period is at most `ell` must have its translation
/// group contained in the center's, up to the enumeration budget.
pub fn assumption_probe(
    model: &dyn Model,
    sample: &[Geodesic],
    ell: &Rat,
    radii: &[Rat],
    t_max: &Rat,
    cyclic_range: i64,
    budget: &PeriodBudget,
) -> Result<AssumptionReport> {
    let infos: Vec<PeriodInfo> = sample
        .iter()
        .map(|c| periodicity(model, c, t_max, budget))
        .collect::<Result<Vec<_>>>()?;
    let q_tol = rat(1, 1000);
    let mut rows = Vec::new();
    let mut total_excluded = 0usize;
    for (i, c0) in sample.iter().enumerate() {
        let mut passing: Option<Rat> = None;
        let mut failures = Vec::new();
        let mut excluded = 0usize;
        let mut radii_sorted = radii.to_vec();
        radii_sorted.sort();
        radii_sorted.reverse();
        for r in &radii_sorted {
            let mut ok = true;
            failures.clear();
            for (j, c) in sample.iter().enumerate() {
                if i == j {
                    continue;
                }
                let d = dist_fs(model, c, c0, &q_tol)?;
                if matches!(d.le(r), Trilean::False) {
                    continue;
                }
                let info = &infos[j];
                if info.inconclusive {
                    excluded += 1;
                    continue;
                }
                let Some(tau) = &info.tau else { continue };
                if tau > ell {
                    continue;
                }
                // Every enumerated element of V_c must lie in V_{c0}.
                let vc = info.vc_subgroup(format!("V[{j}]"));
                let (members, _) = vc.enumerate(model, cyclic_range, None)?;
                for g in members {
                    if !in_translation_group(model, c0, &g, t_max, budget)? {
                        ok = false;
                        failures.push(format!(
                            "sample {j}: element {} escapes the center group",
                            g.display()
                        ));
                    }
                }
            }
            if ok {
                passing = Some(r.clone());
                break;
            }
        }
        total_excluded += excluded;
        rows.push(AssumptionRow {
            center: i,
            passing_radius: passing,
            failures: failures.clone(),
            excluded_inconclusive: excluded,
        });
    }
    Ok(AssumptionReport {
        rows,
        total_excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::cayley::CayleyTree;
    use num_traits::One;

    #[test]
    fn cayley_axis_has_period_one() {
        let m = CayleyTree::new(2, 40);
        let a = m.parse_elem("a").unwrap();
        let c = Geodesic::axis(&m, &a).unwrap();
        let info = periodicity(&m, &c, &rat_int(3), &PeriodBudget::default()).unwrap();
        assert_eq!(info.tau, Some(rat_int(1)));
        assert_eq!(
            info.translation_witness.as_ref().map(|g| g.display()),
            Some("a".to_string())
        );
        // Free action: trivial stabilizer.
        assert_eq!(info.stabilizer.len(), 1);
        assert_eq!(info.translation_values, vec![
            rat_int(-3),
            rat_int(-2),
            rat_int(-1),
            rat_int(0),
            rat_int(1),
            rat_int(2),
            rat_int(3)
        ]);
        assert!(!info.inconclusive);
    }

    #[test]
    fn constant_geodesic_has_no_period() {
        let m = CayleyTree::new(2, 20);
        let c = Geodesic::constant(m.base_point());
        let info = periodicity(&m, &c, &rat_int(2), &PeriodBudget::default()).unwrap();
        assert_eq!(info.tau, None);
        assert!(info.translation_witness.is_none());
    }

    #[test]
    fn translation_values_form_a_progression() {
        let m = CayleyTree::new(2, 40);
        let ab = m.parse_elem("ab").unwrap();
        let c = Geodesic::axis(&m, &ab).unwrap();
        let info = periodicity(&m, &c, &rat_int(5), &PeriodBudget::default()).unwrap();
        assert_eq!(info.tau, Some(rat_int(2)), "|ab| = 2 is the period");
        let vals = &info.translation_values;
        for v in vals {
            assert!((v / rat_int(2)).denom().is_one());
        }
    }
}
