//! Slow bump functions and subordinate partitions of unity on a flow
//! sample, in exact rational arithmetic.
//!
//! The bump for (K, U) takes the distance-ratio cutoff phi(z) =
//! min(1, d_lambda(z, complement of U) / gap) and maximizes
//! (1 - |t|/alpha_hat) phi(flow_t(z)) over the grid window; this is 1 on K,
//! 0 off the flow-thickened U, and varies by at most |s|/alpha_hat along
//! grid shifts.

use num_traits::{One, Zero};

use crate::cover::cover::Cover;
use crate::cover::sample::FlowSample;
use crate::error::{Error, Result};
use crate::rat::{rat_int, Rat};

/// phi: the canonical distance-ratio cutoff for K inside U.
pub fn urysohn(
    sample: &FlowSample,
    k_set: &[usize],
    u_set: &[usize],
    gap: &Rat,
) -> Result<Vec<Rat>> {
    if gap <= &Rat::zero() {
        return Err(Error::degenerate("zero separation between K and U^c"));
    }
    let complement: Vec<usize> = (0..sample.len()).filter(|z| !u_set.contains(z)).collect();
    let mut out = Vec::with_capacity(sample.len());
    for z in 0..sample.len() {
        if complement.is_empty() {
            out.push(Rat::one());
            continue;
        }
        let d = sample.dl_to_set(z, &complement).unwrap();
        let ratio = &d / gap;
        out.push(ratio.min(Rat::one()));
    }
    let _ = k_set;
    Ok(out)
}

/// d_lambda separation between K and the complement of U.
pub fn separation(sample: &FlowSample, k_set: &[usize], u_set: &[usize]) -> Rat {
    let complement: Vec<usize> = (0..sample.len()).filter(|z| !u_set.contains(z)).collect();
    if complement.is_empty() {
        return sample.dl_big();
    }
    k_set
        .iter()
        .filter_map(|&k| sample.dl_to_set(k, &complement))
        .min()
        .unwrap_or_else(|| sample.dl_big())
}

/// The slow bump: sup over the grid window of (1 - |t|/alpha_hat) phi.
pub fn bump(
    sample: &FlowSample,
    k_set: &[usize],
    u_set: &[usize],
    alpha_hat: &Rat,
) -> Result<Vec<Rat>> {
    if alpha_hat <= &Rat::zero() {
        return Err(Error::domain("alpha_hat must be positive"));
    }
    if !k_set.iter().all(|k| u_set.contains(k)) {
        return Err(Error::domain("K must be contained in U"));
    }
    let gap = separation(sample, k_set, u_set);
    if gap <= Rat::zero() {
        return Err(Error::degenerate("zero separation between K and U^c"));
    }
    let phi = urysohn(sample, k_set, u_set, &gap)?;
    let mut out = Vec::with_capacity(sample.len());
    for z in 0..sample.len() {
        let mut best = Rat::zero();
        for k in sample.grid_range(alpha_hat) {
            let Some(zk) = sample.flow_index(z, k) else {
                continue;
            };
            let t_abs = num_traits::Signed::abs(
                &(Rat::from_integer(k.into()) * &sample.dt),
            );
            let damp = Rat::one() - t_abs / alpha_hat;
            let val = damp * &phi[zk];
            if val > best {
                best = val;
            }
        }
        out.push(best);
    }
    Ok(out)
}

/// Exact slow-variation check: |f(flow_s z) - f(z)| <= |s| / alpha_hat on
/// every defined grid shift.
pub fn check_slow_variation(
    sample: &FlowSample,
    values: &[Rat],
    alpha_hat: &Rat,
) -> Result<Vec<String>> {
    let mut violations = Vec::new();
    for z in 0..sample.len() {
        for k in -sample.half_width..=sample.half_width {
            let Some(zk) = sample.flow_index(z, k) else {
                continue;
            };
            let s_abs =
                num_traits::Signed::abs(&(Rat::from_integer(k.into()) * &sample.dt));
            let gap = num_traits::Signed::abs(&(&values[zk] - &values[z]));
            if &gap * alpha_hat > s_abs {
                violations.push(format!(
                    "z={z} shift k={k}: |f(flow z) - f(z)| = {} > {}/{}",
                    gap, s_abs, alpha_hat
                ));
            }
        }
    }
    Ok(violations)
}

#[derive(Debug, Clone)]
pub struct Partition {
    /// values[set][point], exact rationals.
    pub values: Vec<Vec<Rat>>,
    pub alpha_hat: Rat,
    /// Observed support dimension bound used in the variation estimate.
    pub n_obs: usize,
    /// Lebesgue number of the shrunken cover that seeded the cores.
    pub lebesgue: Rat,
}

/// Inner set: members whose whole grid flow window stays in the set.
fn inner_set(sample: &FlowSample, members: &[usize], alpha_hat: &Rat) -> Vec<usize> {
    members
        .iter()
        .copied()
        .filter(|&z| {
            sample.grid_range(alpha_hat).into_iter().all(|k| {
                sample
                    .flow_index(z, k)
                    .map(|zk| members.contains(&zk))
                    .unwrap_or(false)
            })
        })
        .collect()
}

/// Subordinate partition of unity from slow bumps on the shrunken cover
/// cores. Column sums are exactly one; supports lie inside the cover sets;
/// grid flow shifts move each coordinate by at most
/// (2 n_obs + 3) |t| / alpha_hat.
pub fn partition(sample: &FlowSample, cover: &Cover, alpha_hat: &Rat) -> Result<Partition> {
    let n = sample.len();
    let inners: Vec<Vec<usize>> = cover
        .sets
        .iter()
        .map(|s| inner_set(sample, &s.members, alpha_hat))
        .collect();
    for z in 0..n {
        if !inners.iter().any(|inn| inn.contains(&z)) {
            return Err(Error::degenerate(
                "shrunken cover fails to cover; the cover is not long enough",
            ));
        }
    }
    // Lebesgue number of the shrunken cover.
    let mut lebesgue: Option<Rat> = None;
    for z in 0..n {
        let mut best: Option<Rat> = None;
        for inn in &inners {
            let to_comp = if inn.len() == n {
                sample.dl_big()
            } else {
                let comp: Vec<usize> = (0..n).filter(|i| !inn.contains(i)).collect();
                sample.dl_to_set(z, &comp).unwrap()
            };
            if best.as_ref().map_or(true, |b| to_comp > *b) {
                best = Some(to_comp);
            }
        }
        let b = best.unwrap();
        if lebesgue.as_ref().map_or(true, |l| b < *l) {
            lebesgue = Some(b);
        }
    }
    let lebesgue = lebesgue.unwrap_or_else(Rat::zero);
    if lebesgue <= Rat::zero() {
        return Err(Error::degenerate("zero Lebesgue number"));
    }
    // Cores K_U = { z : d(z, complement of inner U) >= lebesgue }.
    let mut bumps = Vec::with_capacity(cover.sets.len());
    for inn in &inners {
        let core: Vec<usize> = (0..n)
            .filter(|&z| {
                let to_comp = if inn.len() == n {
                    sample.dl_big()
                } else {
                    let comp: Vec<usize> = (0..n).filter(|i| !inn.contains(i)).collect();
                    sample.dl_to_set(z, &comp).unwrap()
                };
                to_comp >= lebesgue
            })
            .collect();
        if core.is_empty() {
            bumps.push(vec![Rat::zero(); n]);
            continue;
        }
        bumps.push(bump(sample, &core, inn, alpha_hat)?);
    }
    // Normalize.
    let mut values = vec![vec![Rat::zero(); n]; cover.sets.len()];
    for z in 0..n {
        let total: Rat = bumps.iter().map(|b| b[z].clone()).sum();
        if total <= Rat::zero() {
            return Err(Error::degenerate(format!(
                "no bump covers sample point {z}"
            )));
        }
        for (u, b) in bumps.iter().enumerate() {
            values[u][z] = &b[z] / &total;
        }
    }
    // Observed support bound: points lie in at most n_obs + 1 supports.
    let mut n_obs = 0usize;
    for z in 0..n {
        let c = values.iter().filter(|row| !row[z].is_zero()).count();
        n_obs = n_obs.max(c.saturating_sub(1));
    }
    Ok(Partition {
        values,
        alpha_hat: alpha_hat.clone(),
        n_obs,
        lebesgue,
    })
}

impl Partition {
    pub fn column_sum(&self, z: usize) -> Rat {
        self.values.iter().map(|row| row[z].clone()).sum()
    }

    /// Exact flow-variation check: per coordinate,
    /// |t_U(z) - t_U(flow_s z)| <= (2 n_obs + 3) |s| / alpha_hat.
    pub fn check_flow_variation(&self, sample: &FlowSample) -> Vec<String> {
        let factor = rat_int(2 * self.n_obs as i64 + 3);
        let mut violations = Vec::new();
        for z in 0..sample.len() {
            for k in -sample.half_width..=sample.half_width {
                let Some(zk) = sample.flow_index(z, k) else {
                    continue;
                };
                let s_abs =
                    num_traits::Signed::abs(&(Rat::from_integer(k.into()) * &sample.dt));
                let bound = &factor * &s_abs / &self.alpha_hat;
                for (u, row) in self.values.iter().enumerate() {
                    let gap = num_traits::Signed::abs(&(&row[zk] - &row[z]));
                    if gap > bound {
                        violations.push(format!(
                            "set {u}, z={z}, k={k}: |t_U gap| = {gap} > {bound}"
                        ));
                    }
                }
            }
        }
        violations
    }

    /// Subordination: supp(t_U) inside the members of U.
    pub fn check_subordinate(&self, cover: &Cover) -> Vec<String> {
        let mut violations = Vec::new();
        for (u, row) in self.values.iter().enumerate() {
            for (z, v) in row.iter().enumerate() {
                if !v.is_zero() && !cover.sets[u].members.contains(&z) {
                    violations.push(format!("t_{u}({z}) = {v} outside the set"));
                }
            }
        }
        violations
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::cover::build_long_cover;
    use crate::cover::sample::circle_sample;
    use crate::rat::rat;

    /// Circle of circumference 8 sampled at half-integers, rotation flow.
    fn fixture() -> FlowSample {
        let pts: Vec<Rat> = (0..16).map(|k| rat(k, 2)).collect();
        circle_sample(&rat_int(8), &pts, &rat(1, 2), 4, &rat_int(1)).unwrap()
    }

    #[test]
    fn bump_is_one_on_core_zero_far_away() {
        let s = fixture();
        // U = points within distance 1 of position 0; K = {0}.
        let u: Vec<usize> = (0..s.len())
            .filter(|&z| s.dist[0][z] < rat_int(1))
            .collect();
        let k = vec![0usize];
        let alpha_hat = rat_int(2);
        let f = bump(&s, &k, &u, &alpha_hat).unwrap();
        assert!(f[0].is_one(), "f = 1 on the core");
        // Point at arc distance 4 (index 8): no flow shift within
        // alpha_hat = 2 meets U, so the bump vanishes.
        assert!(f[8].is_zero());
        let viol = check_slow_variation(&s, &f, &alpha_hat).unwrap();
        assert!(viol.is_empty(), "{viol:?}");
    }

    #[test]
    fn bump_matches_grid_maximization_oracle() {
        // K = {0}, U = (-1, 1) on the circle, alpha_hat = 2, z at
        // position 2: the grid oracle over F(2, t) gives 1/8 at t = -3/2.
        let s = fixture();
        let u: Vec<usize> = (0..s.len())
            .filter(|&z| s.dist[0][z] < rat_int(1))
            .collect();
        let k = vec![0usize];
        let alpha_hat = rat_int(2);
        // Independent oracle: explicit max over the grid.
        let gap = separation(&s, &k, &u);
        let phi = urysohn(&s, &k, &u, &gap).unwrap();
        let z = 4usize; // position 2
        let mut oracle = Rat::zero();
        for kk in s.grid_range(&alpha_hat) {
            if let Some(zk) = s.flow_index(z, kk) {
                let t = num_traits::Signed::abs(&(rat(kk, 2)));
                let val = (Rat::one() - t / &alpha_hat) * &phi[zk];
                if val > oracle {
                    oracle = val;
                }
            }
        }
        assert_eq!(oracle, rat(1, 8));
        let f = bump(&s, &k, &u, &alpha_hat).unwrap();
        assert_eq!(f[z], rat(1, 8));
    }

    #[test]
    fn rejects_k_outside_u() {
        let s = fixture();
        let r = bump(&s, &[0], &[1, 2], &rat_int(2));
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn partition_sums_to_one_and_is_subordinate() {
        let s = fixture();
        let cover = build_long_cover(&s, &rat(1, 2)).unwrap();
        let part = partition(&s, &cover, &rat(1, 2)).unwrap();
        for z in 0..s.len() {
            assert!(part.column_sum(z).is_one());
        }
        assert!(part.check_subordinate(&cover).is_empty());
        assert!(part.check_flow_variation(&s).is_empty());
    }

    #[test]
    fn single_set_cover_gives_constant_one() {
        let s = fixture();
        // One set containing everything.
        let cover = Cover {
            sets: vec![crate::cover::cover::CoverSet {
                center: 0,
                radius: rat_int(100),
                members: (0..s.len()).collect(),
                color: None,
            }],
            alpha_hat: rat(1, 2),
            observed_dim: 0,
        };
        let part = partition(&s, &cover, &rat(1, 2)).unwrap();
        for z in 0..s.len() {
            assert!(part.values[0][z].is_one());
        }
    }
}
