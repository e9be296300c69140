//! Local sections: for a base geodesic c0, a map assigning to nearby
//! geodesics a group element h with c in h * (foliated neighborhood of c0),
//! together with the subgroup the section's errors live in: the
//! translation group of c0 when its period is short, its pointwise
//! stabilizer otherwise.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::flow::fol::{fol_fs_min, FolMin};
use crate::flow::geodesic::Geodesic;
use crate::flow::period::{periodicity, PeriodBudget, PeriodInfo};
use crate::group::{CompactPart, CvcySubgroup, GroupElement};
use crate::model::{Model, Point};
use crate::rat::{rat, Rat};

#[derive(Debug, Clone)]
pub struct Section {
    pub base: Geodesic,
    pub subgroup: CvcySubgroup,
    pub label: String,
    /// Foliated window half-width used by the section.
    pub alpha: Rat,
    /// Closeness scale; calibration may shrink it down a geometric
    /// schedule.
    pub delta: Rat,
    pub period: PeriodInfo,
}

/// Builds the section data for a base geodesic: the period case split
/// selects the translation group (short period) or the stabilizer.
pub fn build_section(
    model: &dyn Model,
    base: Geodesic,
    label: String,
    alpha: &Rat,
    ell: &Rat,
    t_max: &Rat,
    budget: &PeriodBudget,
) -> Result<Section> {
    let period = periodicity(model, &base, t_max, budget)?;
    let short_period = matches!(&period.tau, Some(t) if t <= ell);
    let subgroup = if short_period {
        period.vc_subgroup(label.clone())
    } else {
        CvcySubgroup {
            label: label.clone(),
            compact: CompactPart::Finite(if period.stabilizer.is_empty() {
                vec![model.identity()]
            } else {
                period.stabilizer.clone()
            }),
            cyclic_generator: None,
        }
    };
    Ok(Section {
        base,
        subgroup,
        label,
        alpha: alpha.clone(),
        delta: rat(1, 2),
        period,
    })
}

/// Nearby vertices of a tree point, including itself, out to `radius`.
fn nearby_vertices(model: &dyn Model, p: &Point, radius: i64) -> Result<Vec<Point>> {
    match p {
        Point::Vertex(_) | Point::EdgePoint { .. } => {
            let mut frontier: Vec<_> = p.tree_anchors();
            let mut seen: std::collections::BTreeSet<_> = frontier.iter().cloned().collect();
            for _ in 0..radius {
                let mut next = Vec::new();
                for v in &frontier {
                    for w in model.neighbors(v)? {
                        if seen.insert(w.clone()) {
                            next.push(w);
                        }
                    }
                }
                frontier = next;
            }
            Ok(seen.into_iter().map(Point::Vertex).collect())
        }
        other => Ok(vec![other.clone()]),
    }
}

#[derive(Debug, Clone)]
pub enum SectionValue {
    Found {
        elem: GroupElement,
        fol: FolMin,
    },
    /// No candidate certified below delta; the best margin is reported.
    Missing {
        reason: String,
    },
}

/// Evaluates the section at a geodesic: the first candidate (in a
/// deterministic order) carrying the base into a foliated delta-window of
/// c. Candidates translate the base anchor to vertices near the target
/// anchor; evaluation-equal candidates are deduplicated before the
/// quadrature-heavy foliated check.
pub fn section_value(
    model: &dyn Model,
    sec: &Section,
    c: &Geodesic,
    precision: u32,
    quad_tol: &Rat,
) -> Result<SectionValue> {
    let base_anchor = sec.base.evaluate(model, &Rat::zero())?;
    let target_anchor = c.evaluate(model, &Rat::zero())?;
    let radius = {
        let a = crate::rat::rat_floor(&sec.alpha);
        use num_traits::ToPrimitive;
        a.to_i64().unwrap_or(0) + 2
    };
    let base_pt = match &base_anchor {
        Point::Vertex(_) | Point::EdgePoint { .. } => {
            Point::Vertex(base_anchor.tree_anchors()[0].clone())
        }
        other => other.clone(),
    };
    let mut cands: Vec<GroupElement> = Vec::new();
    for tv in nearby_vertices(model, &target_anchor, radius)? {
        match model.point_translators(&base_pt, &tv, precision) {
            Ok(gs) => cands.extend(gs),
            Err(Error::Budget(_)) | Err(Error::Precision(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    if cands.is_empty() {
        return Ok(SectionValue::Missing {
            reason: "no candidate translators near the target".into(),
        });
    }
    // Deduplicate by the translated base's evaluation key and order
    // deterministically.
    let window = sec.alpha.clone() + rat(4, 1);
    let mut keyed: Vec<(String, String, GroupElement, Geodesic)> = Vec::new();
    for g in cands {
        let moved = match sec.base.act(model, &g) {
            Ok(m) => m,
            Err(Error::Budget(_)) | Err(Error::Precision(_)) => continue,
            Err(e) => return Err(e),
        };
        let key = eval_key_cheap(model, &moved, &window)?;
        if keyed.iter().any(|(k, _, _, _)| k == &key) {
            continue;
        }
        keyed.push((key, model.elem_key(&g), g, moved));
    }
    keyed.sort_by(|a, b| a.1.cmp(&b.1));
    let mut best_miss = f64::INFINITY;
    for (_, _, g, moved) in keyed {
        let m = fol_fs_min(model, &moved, c, &sec.alpha, quad_tol)?;
        let delta_f = crate::rat::rat_to_f64(&sec.delta);
        if m.value.hi < delta_f {
            return Ok(SectionValue::Found { elem: g, fol: m });
        }
        best_miss = best_miss.min(m.value.lo);
    }
    Ok(SectionValue::Missing {
        reason: format!("best candidate margin {best_miss} vs delta {}", sec.delta),
    })
}

fn eval_key_cheap(model: &dyn Model, c: &Geodesic, window: &Rat) -> Result<String> {
    let mut out = String::new();
    let step = Rat::new(1.into(), 2.into());
    let mut t = -window.clone();
    while &t <= window {
        match c.evaluate(model, &t) {
            Ok(p) => out.push_str(&p.display()),
            Err(Error::Budget(_)) | Err(Error::Precision(_)) => out.push('~'),
            Err(e) => return Err(e),
        }
        out.push('|');
        t = &t + &step;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::cayley::CayleyTree;
    use crate::model::Model;
    use crate::rat::rat_int;

    #[test]
    fn axis_base_picks_the_translation_subgroup() {
        let m = CayleyTree::new(2, 40);
        let c0 = Geodesic::axis(&m, &m.parse_elem("a").unwrap()).unwrap();
        let sec = build_section(
            &m,
            c0,
            "V0".into(),
            &rat_int(1),
            &rat_int(3),
            &rat_int(3),
            &PeriodBudget::default(),
        )
        .unwrap();
        assert!(sec.subgroup.cyclic_generator.is_some());
        assert_eq!(sec.period.tau, Some(rat_int(1)));
    }

    #[test]
    fn constant_base_picks_the_stabilizer() {
        let m = CayleyTree::new(2, 40);
        let c0 = Geodesic::constant(m.base_point());
        let sec = build_section(
            &m,
            c0,
            "K0".into(),
            &rat_int(1),
            &rat_int(3),
            &rat_int(3),
            &PeriodBudget::default(),
        )
        .unwrap();
        assert!(sec.subgroup.cyclic_generator.is_none());
    }

    #[test]
    fn exact_orbit_member_gets_the_translating_element() {
        let m = CayleyTree::new(2, 40);
        let c0 = Geodesic::constant(m.base_point());
        let sec = build_section(
            &m,
            c0,
            "K0".into(),
            &rat_int(1),
            &rat_int(3),
            &rat_int(3),
            &PeriodBudget::default(),
        )
        .unwrap();
        let g = m.parse_elem("ab").unwrap();
        let c = Geodesic::constant(
            m.act_point(&g, &m.base_point()).unwrap(),
        );
        match section_value(&m, &sec, &c, 2, &rat(1, 1000)).unwrap() {
            SectionValue::Found { elem, fol } => {
                assert_eq!(elem.display(), "ab");
                assert!(fol.value.hi < 1e-3);
            }
            SectionValue::Missing { reason } => panic!("missing: {reason}"),
        }
    }
}
