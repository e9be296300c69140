//! The join space over a finite family of Cvcy subgroups: weighted tuples
//! (t_i, g_i, V_i) with exact rational weights summing to one, the left
//! action, the three-parameter foliated closeness check, the label-join
//! projection, and the discrete-case coset projection.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::group::{fol_v_check, CvcySubgroup, FolVBound, FolVOutcome, GroupElement, SearchBudget};
use crate::model::Model;
use crate::rat::{rat_to_string, Rat};

/// Finite ordered family of Cvcy subgroups; the first label is the
/// canonical placeholder for zero-weight slots.
#[derive(Debug, Clone)]
pub struct JoinFamily {
    pub labels: Vec<String>,
    pub subgroups: BTreeMap<String, CvcySubgroup>,
}

impl JoinFamily {
    pub fn new(subs: Vec<CvcySubgroup>) -> Result<JoinFamily> {
        if subs.is_empty() {
            return Err(Error::domain("join family must be nonempty"));
        }
        let labels: Vec<String> = subs.iter().map(|s| s.label.clone()).collect();
        let mut map = BTreeMap::new();
        for s in subs {
            if map.insert(s.label.clone(), s).is_some() {
                return Err(Error::domain("duplicate subgroup label"));
            }
        }
        Ok(JoinFamily {
            labels,
            subgroups: map,
        })
    }

    pub fn default_label(&self) -> &str {
        &self.labels[0]
    }

    pub fn get(&self, label: &str) -> Result<&CvcySubgroup> {
        self.subgroups
            .get(label)
            .ok_or_else(|| Error::domain(format!("unknown subgroup label {label:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JoinEntry {
    pub weight: Rat,
    pub elem: GroupElement,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JoinPoint {
    pub entries: Vec<JoinEntry>,
}

impl JoinPoint {
    pub fn slots(&self) -> usize {
        self.entries.len()
    }

    pub fn display(&self) -> String {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|e| {
                format!(
                    "{}({},{})",
                    rat_to_string(&e.weight),
                    e.elem.display(),
                    e.label
                )
            })
            .collect();
        format!("[{}]", parts.join(", "))
    }
}

/// Builds a join point: weights must be nonnegative and sum to one
/// exactly (no silent normalization); zero slots are canonicalized to the
/// identity and the family's default label.
pub fn make_join_point(
    model: &dyn Model,
    family: &JoinFamily,
    raw: Vec<(Rat, GroupElement, String)>,
) -> Result<JoinPoint> {
    if raw.is_empty() {
        return Err(Error::domain("join point needs at least one slot"));
    }
    let mut sum = Rat::zero();
    for (w, _, _) in &raw {
        if w < &Rat::zero() {
            return Err(Error::domain("negative join weight"));
        }
        sum += w;
    }
    if !sum.is_one() {
        return Err(Error::domain(format!(
            "join weights sum to {}, expected 1",
            rat_to_string(&sum)
        )));
    }
    let mut entries = Vec::with_capacity(raw.len());
    for (weight, elem, label) in raw {
        if weight.is_zero() {
            entries.push(JoinEntry {
                weight,
                elem: model.identity(),
                label: family.default_label().to_string(),
            });
        } else {
            family.get(&label)?;
            entries.push(JoinEntry {
                weight,
                elem,
                label,
            });
        }
    }
    Ok(JoinPoint { entries })
}

/// Left action: weights and labels unchanged, entries multiplied on the
/// left; zero slots stay canonical.
pub fn act_join(model: &dyn Model, g: &GroupElement, y: &JoinPoint) -> Result<JoinPoint> {
    let mut entries = Vec::with_capacity(y.entries.len());
    for e in &y.entries {
        if e.weight.is_zero() {
            entries.push(e.clone());
        } else {
            entries.push(JoinEntry {
                weight: e.weight.clone(),
                elem: model.mul(g, &e.elem)?,
                label: e.label.clone(),
            });
        }
    }
    Ok(JoinPoint { entries })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FolJBound {
    pub beta: Rat,
    pub eta: Rat,
    pub eps: Rat,
}

impl FolJBound {
    pub fn new(beta: Rat, eta: Rat, eps: Rat) -> Result<FolJBound> {
        if beta <= Rat::zero() || eta <= Rat::zero() || eps <= Rat::zero() {
            return Err(Error::domain("join bounds must be positive"));
        }
        Ok(FolJBound { beta, eta, eps })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JoinVerdict {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct FolJReport {
    pub verdict: JoinVerdict,
    /// Slots exempt from the group check because both weights are small.
    pub weight_exempt: Vec<usize>,
    /// Per-slot witnesses for the checked coordinates.
    pub witnesses: Vec<Option<GroupElement>>,
    pub failure: Option<String>,
}

/// Checks fol_J(y, y') < (beta, eta, eps): all weight gaps below eps, and
/// every slot carrying weight at least eps on either side must agree on the
/// label and admit a V-foliated witness.
pub fn fol_j_check(
    model: &dyn Model,
    family: &JoinFamily,
    y: &JoinPoint,
    y2: &JoinPoint,
    bound: &FolJBound,
    budget: &SearchBudget,
) -> Result<FolJReport> {
    if y.slots() != y2.slots() {
        return Err(Error::domain("join points with different slot counts"));
    }
    let mut exempt = Vec::new();
    let mut witnesses = vec![None; y.slots()];
    let mut inconclusive = false;
    for (i, (a, b)) in y.entries.iter().zip(y2.entries.iter()).enumerate() {
        let gap = if a.weight >= b.weight {
            &a.weight - &b.weight
        } else {
            &b.weight - &a.weight
        };
        if gap >= bound.eps {
            return Ok(FolJReport {
                verdict: JoinVerdict::Fails,
                weight_exempt: exempt,
                witnesses,
                failure: Some(format!("slot {i}: weight gap {}", rat_to_string(&gap))),
            });
        }
        let max_w = a.weight.clone().max(b.weight.clone());
        if max_w < bound.eps {
            exempt.push(i);
            continue;
        }
        if a.label != b.label {
            return Ok(FolJReport {
                verdict: JoinVerdict::Fails,
                weight_exempt: exempt,
                witnesses,
                failure: Some(format!(
                    "slot {i}: labels {} vs {}",
                    a.label, b.label
                )),
            });
        }
        let sub = family.get(&a.label)?;
        let vb = FolVBound::new(bound.beta.clone(), bound.eta.clone())?;
        match fol_v_check(model, sub, &a.elem, &b.elem, &vb, budget)? {
            FolVOutcome::Witness { witness, .. } => {
                witnesses[i] = Some(witness);
            }
            FolVOutcome::Refusal => {
                return Ok(FolJReport {
                    verdict: JoinVerdict::Fails,
                    weight_exempt: exempt,
                    witnesses,
                    failure: Some(format!("slot {i}: no foliated witness")),
                });
            }
            FolVOutcome::Inconclusive { reason } => {
                inconclusive = true;
                witnesses[i] = None;
                let _ = reason;
            }
        }
    }
    Ok(FolJReport {
        verdict: if inconclusive {
            JoinVerdict::Inconclusive
        } else {
            JoinVerdict::Holds
        },
        weight_exempt: exempt,
        witnesses,
        failure: None,
    })
}

/// Barycentric image in the join of labels: weight per (slot, label), with
/// the max-coordinate distance.
pub fn label_projection(y: &JoinPoint) -> BTreeMap<(usize, String), Rat> {
    let mut out = BTreeMap::new();
    for (i, e) in y.entries.iter().enumerate() {
        if !e.weight.is_zero() {
            *out.entry((i, e.label.clone())).or_insert_with(Rat::zero) += &e.weight;
        }
    }
    out
}

pub fn label_distance(y: &JoinPoint, y2: &JoinPoint) -> Rat {
    let a = label_projection(y);
    let b = label_projection(y2);
    let mut best = Rat::zero();
    for key in a.keys().chain(b.keys()) {
        let wa = a.get(key).cloned().unwrap_or_else(Rat::zero);
        let wb = b.get(key).cloned().unwrap_or_else(Rat::zero);
        let gap = if wa >= wb { &wa - &wb } else { &wb - &wa };
        if gap > best {
            best = gap;
        }
    }
    best
}

/// Canonical coset key of g V in a discrete group: the minimal element key
/// over the enumerated coset g t^k kappa.
fn coset_key(
    model: &dyn Model,
    sub: &CvcySubgroup,
    g: &GroupElement,
    cyclic_range: i64,
) -> Result<String> {
    let (members, _) = sub.enumerate(model, cyclic_range, None)?;
    let mut best: Option<String> = None;
    for v in &members {
        let gv = model.mul(g, v)?;
        let key = model.elem_key(&gv);
        if best.as_ref().map_or(true, |b| key < *b) {
            best = Some(key);
        }
    }
    best.ok_or_else(|| Error::domain("empty subgroup enumeration"))
}

/// Projection to the discrete orbit join: weights on (slot, label, coset
/// key), compared in the max metric. Only meaningful for discrete groups,
/// where cosets are decided exactly by element arithmetic.
pub fn discrete_projection(
    model: &dyn Model,
    family: &JoinFamily,
    y: &JoinPoint,
    cyclic_range: i64,
) -> Result<BTreeMap<(usize, String, String), Rat>> {
    let mut out = BTreeMap::new();
    for (i, e) in y.entries.iter().enumerate() {
        if e.weight.is_zero() {
            continue;
        }
        if matches!(e.elem, GroupElement::Matrix(_)) {
            return Err(Error::domain(
                "discrete projection needs a discrete group",
            ));
        }
        let sub = family.get(&e.label)?;
        let key = coset_key(model, sub, &e.elem, cyclic_range)?;
        *out.entry((i, e.label.clone(), key)).or_insert_with(Rat::zero) += &e.weight;
    }
    Ok(out)
}

pub fn discrete_distance(
    a: &BTreeMap<(usize, String, String), Rat>,
    b: &BTreeMap<(usize, String, String), Rat>,
) -> Rat {
    let mut best = Rat::zero();
    for key in a.keys().chain(b.keys()) {
        let wa = a.get(key).cloned().unwrap_or_else(Rat::zero);
        let wb = b.get(key).cloned().unwrap_or_else(Rat::zero);
        let gap = if wa >= wb { &wa - &wb } else { &wb - &wa };
        if gap > best {
            best = gap;
        }
    }
    best
}

/// Constructive eta for the join triangle inequality: two bounds
/// < (beta, eta, eps) compose to < (2 beta, eta_target, 2 eps).
pub fn fol_j_triangle_eta(model: &dyn Model, eta_target: &Rat, beta: &Rat) -> Result<Rat> {
    crate::group::fol_v_triangle_delta(model, eta_target, beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::CompactPart;
    use crate::model::cayley::CayleyTree;
    use crate::rat::{rat, rat_int};

    fn setup() -> (CayleyTree, JoinFamily) {
        let m = CayleyTree::new(2, 32);
        let gen_a = CvcySubgroup {
            label: "A".into(),
            compact: CompactPart::Finite(vec![m.identity()]),
            cyclic_generator: Some(m.parse_elem("a").unwrap()),
        };
        let triv = CvcySubgroup::trivial("K", &m);
        let fam = JoinFamily::new(vec![gen_a, triv]).unwrap();
        (m, fam)
    }

    #[test]
    fn zero_slots_are_identified() {
        let (m, fam) = setup();
        let g = m.parse_elem("ab").unwrap();
        let h = m.parse_elem("ba").unwrap();
        let y1 = make_join_point(
            &m,
            &fam,
            vec![
                (rat_int(1), g.clone(), "A".into()),
                (Rat::zero(), h.clone(), "K".into()),
            ],
        )
        .unwrap();
        let y2 = make_join_point(
            &m,
            &fam,
            vec![
                (rat_int(1), g, "A".into()),
                (Rat::zero(), m.parse_elem("bbb").unwrap(), "A".into()),
            ],
        )
        .unwrap();
        assert_eq!(y1, y2);
    }

    #[test]
    fn bad_weights_are_rejected() {
        let (m, fam) = setup();
        let g = m.identity();
        let r = make_join_point(
            &m,
            &fam,
            vec![
                (rat(1, 2), g.clone(), "A".into()),
                (rat(2, 5), g.clone(), "K".into()),
            ],
        );
        assert!(r.is_err(), "weights summing to 0.9 must error");
        let r = make_join_point(
            &m,
            &fam,
            vec![
                (rat(3, 2), g.clone(), "A".into()),
                (rat(-1, 2), g, "K".into()),
            ],
        );
        assert!(r.is_err(), "negative weight must error");
    }

    #[test]
    fn action_is_left_multiplication_and_invertible() {
        let (m, fam) = setup();
        let b = m.parse_elem("b").unwrap();
        let y = make_join_point(
            &m,
            &fam,
            vec![
                (rat(1, 2), b.clone(), "A".into()),
                (rat(1, 2), m.identity(), "K".into()),
            ],
        )
        .unwrap();
        let a = m.parse_elem("a").unwrap();
        let ay = act_join(&m, &a, &y).unwrap();
        assert_eq!(ay.entries[0].elem.display(), "ab");
        let back = act_join(&m, &m.inv(&a).unwrap(), &ay).unwrap();
        assert_eq!(back, y);
        // Identity acts trivially.
        assert_eq!(act_join(&m, &m.identity(), &y).unwrap(), y);
    }

    #[test]
    fn fol_j_accepts_witnessed_slots_and_rejects_weight_gaps() {
        let (m, fam) = setup();
        let b = m.parse_elem("b").unwrap();
        let y = make_join_point(
            &m,
            &fam,
            vec![
                (rat(1, 2), m.identity(), "A".into()),
                (rat(1, 2), b.clone(), "K".into()),
            ],
        )
        .unwrap();
        let y2 = make_join_point(
            &m,
            &fam,
            vec![
                (rat(1, 2), m.parse_elem("aaa").unwrap(), "A".into()),
                (rat(1, 2), b, "K".into()),
            ],
        )
        .unwrap();
        let bound = FolJBound::new(rat_int(4), rat(1, 2), rat(1, 4)).unwrap();
        let rep = fol_j_check(&m, &fam, &y, &y2, &bound, &SearchBudget::default()).unwrap();
        assert_eq!(rep.verdict, JoinVerdict::Holds);
        assert_eq!(
            rep.witnesses[0].as_ref().map(|g| g.display()),
            Some("aaa".to_string())
        );
        // Identical points pass any bound.
        let rep = fol_j_check(&m, &fam, &y, &y, &bound, &SearchBudget::default()).unwrap();
        assert_eq!(rep.verdict, JoinVerdict::Holds);
        // A weight gap >= eps fails regardless of the group entries.
        let y3 = make_join_point(
            &m,
            &fam,
            vec![
                (rat(3, 4), m.identity(), "A".into()),
                (rat(1, 4), m.identity(), "K".into()),
            ],
        )
        .unwrap();
        let y4 = make_join_point(
            &m,
            &fam,
            vec![
                (rat(1, 4), m.identity(), "A".into()),
                (rat(3, 4), m.identity(), "K".into()),
            ],
        )
        .unwrap();
        let rep = fol_j_check(&m, &fam, &y3, &y4, &bound, &SearchBudget::default()).unwrap();
        assert_eq!(rep.verdict, JoinVerdict::Fails);
    }

    #[test]
    fn label_projection_distance() {
        let (m, fam) = setup();
        let y = make_join_point(
            &m,
            &fam,
            vec![
                (rat(7, 10), m.identity(), "A".into()),
                (rat(3, 10), m.identity(), "K".into()),
            ],
        )
        .unwrap();
        let y2 = make_join_point(
            &m,
            &fam,
            vec![
                (rat(2, 5), m.identity(), "A".into()),
                (rat(3, 5), m.identity(), "K".into()),
            ],
        )
        .unwrap();
        assert_eq!(label_distance(&y, &y), Rat::zero());
        assert_eq!(label_distance(&y, &y2), rat(3, 10));
    }

    #[test]
    fn discrete_projection_collapses_cosets() {
        let (m, fam) = setup();
        // e and a^3 lie in the same <a>-coset; their projections agree.
        let y = make_join_point(
            &m,
            &fam,
            vec![
                (rat(1, 2), m.identity(), "A".into()),
                (rat(1, 2), m.parse_elem("b").unwrap(), "K".into()),
            ],
        )
        .unwrap();
        let y2 = make_join_point(
            &m,
            &fam,
            vec![
                (rat(1, 2), m.parse_elem("aaa").unwrap(), "A".into()),
                (rat(1, 2), m.parse_elem("b").unwrap(), "K".into()),
            ],
        )
        .unwrap();
        let p1 = discrete_projection(&m, &fam, &y, 10).unwrap();
        let p2 = discrete_projection(&m, &fam, &y2, 10).unwrap();
        assert_eq!(discrete_distance(&p1, &p2), Rat::zero());
    }
}
