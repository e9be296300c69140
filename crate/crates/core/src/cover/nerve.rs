//! The nerve of a cover, the barycentric map into it, and the Lipschitz
//! contraction estimate for close pairs.

use num_traits::Zero;

use crate::cover::cover::Cover;
use crate::cover::sample::FlowSample;
use crate::rat::{rat_int, Rat};

/// Distance-ratio barycentric weights: a_U(z) = d_lambda(z, complement of
/// U) normalized to sum one. Supported exactly on the sets containing z,
/// so the preimage of the open star of a vertex is exactly its set.
pub fn nerve_weights(sample: &FlowSample, cover: &Cover, z: usize) -> Vec<Rat> {
    let n = sample.len();
    let raw: Vec<Rat> = cover
        .sets
        .iter()
        .map(|s| {
            if !s.members.contains(&z) {
                return Rat::zero();
            }
            if s.members.len() == n {
                return sample.dl_big();
            }
            let comp: Vec<usize> = (0..n).filter(|i| !s.members.contains(i)).collect();
            sample.dl_to_set(z, &comp).unwrap()
        })
        .collect();
    let total: Rat = raw.iter().cloned().sum();
    if total.is_zero() {
        return raw;
    }
    raw.into_iter().map(|v| v / &total).collect()
}

/// l^1 distance between barycentric images.
pub fn nerve_l1(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| num_traits::Signed::abs(&(x - y)))
        .sum()
}

/// Simplices of the nerve observed on the sample: every subset of a
/// membership profile spans one; returned as the maximal profiles.
pub fn membership_profiles(sample: &FlowSample, cover: &Cover) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for z in 0..sample.len() {
        let profile = cover.member_sets(z);
        if !out.contains(&profile) {
            out.push(profile);
        }
    }
    out
}

/// Lebesgue number of the cover with respect to d_lambda: the largest l
/// such that every l-ball lies inside some set.
pub fn cover_lebesgue(sample: &FlowSample, cover: &Cover) -> Rat {
    let n = sample.len();
    let mut leb: Option<Rat> = None;
    for z in 0..n {
        let mut best: Option<Rat> = None;
        for s in &cover.sets {
            let to_comp = if s.members.len() == n {
                sample.dl_big()
            } else {
                let comp: Vec<usize> = (0..n).filter(|i| !s.members.contains(i)).collect();
                sample.dl_to_set(z, &comp).unwrap()
            };
            if best.as_ref().map_or(true, |b| to_comp > *b) {
                best = Some(to_comp);
            }
        }
        let b = best.unwrap_or_else(Rat::zero);
        if leb.as_ref().map_or(true, |l| b < *l) {
            leb = Some(b);
        }
    }
    leb.unwrap_or_else(Rat::zero)
}

#[derive(Debug, Clone)]
pub struct ContractionReport {
    /// Pairs checked in the close regime d_lambda <= beta / (4N).
    pub pairs_checked: usize,
    pub violations: Vec<String>,
    pub beta: Rat,
    pub n_used: usize,
    /// Star-preimage mismatches (weight positive off the set or zero on it).
    pub star_mismatches: Vec<String>,
}

/// Verifies the nerve-map contraction on every sample pair in the close
/// regime: d^1(f(z), f(z')) <= (16 N^2 / beta) d_lambda(z, z') whenever
/// d_lambda(z, z') <= beta / (4N), with beta the cover's Lebesgue number.
pub fn check_contraction(sample: &FlowSample, cover: &Cover) -> ContractionReport {
    let n_dim = cover.observed_dim.max(1) as i64;
    let beta = cover_lebesgue(sample, cover);
    let n = sample.len();
    let weights: Vec<Vec<Rat>> = (0..n).map(|z| nerve_weights(sample, cover, z)).collect();
    let close = &beta / rat_int(4 * n_dim);
    let factor = rat_int(16 * n_dim * n_dim) / &beta;
    let mut pairs_checked = 0usize;
    let mut violations = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = sample.dl(i, j);
            if d > &close {
                continue;
            }
            pairs_checked += 1;
            let l1 = nerve_l1(&weights[i], &weights[j]);
            if l1 > &factor * d {
                violations.push(format!(
                    "pair ({i}, {j}): d^1 = {l1} > {} * {}",
                    factor, d
                ));
            }
        }
    }
    let mut star_mismatches = Vec::new();
    for z in 0..n {
        for (u, s) in cover.sets.iter().enumerate() {
            let inside = s.members.contains(&z);
            let positive = !weights[z][u].is_zero();
            if inside != positive {
                star_mismatches.push(format!(
                    "z={z}, set {u}: member={inside}, weight positive={positive}"
                ));
            }
        }
    }
    ContractionReport {
        pairs_checked,
        violations,
        beta,
        n_used: n_dim as usize,
        star_mismatches,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::cover::build_long_cover;
    use crate::cover::sample::circle_sample;
    use crate::rat::rat;

    fn fixture() -> (FlowSample, Cover) {
        // Eighth-step wheel: spacing 1/8 sits inside the close-pair regime
        // beta/(4N) of a radius-2 ball cover.
        let pts: Vec<Rat> = (0..64).map(|k| rat(k, 8)).collect();
        let s = circle_sample(&rat_int(8), &pts, &rat(1, 8), 8, &rat_int(1)).unwrap();
        let c = build_long_cover(&s, &rat_int(1)).unwrap();
        (s, c)
    }

    #[test]
    fn weights_are_barycentric_and_star_exact() {
        let (s, c) = fixture();
        for z in 0..s.len() {
            let w = nerve_weights(&s, &c, z);
            let total: Rat = w.iter().cloned().sum();
            assert!(num_traits::One::is_one(&total));
            // Support matches membership.
            for (u, set) in c.sets.iter().enumerate() {
                assert_eq!(set.members.contains(&z), !w[u].is_zero());
            }
        }
    }

    #[test]
    fn vertex_image_when_in_one_set() {
        let (s, c) = fixture();
        for z in 0..s.len() {
            let profile = c.member_sets(z);
            if profile.len() == 1 {
                let w = nerve_weights(&s, &c, z);
                assert!(num_traits::One::is_one(&w[profile[0]]));
            }
        }
        // Identical points have l^1 distance zero.
        let w0 = nerve_weights(&s, &c, 0);
        assert!(nerve_l1(&w0, &w0).is_zero());
    }

    #[test]
    fn contraction_holds_on_the_wheel() {
        let (s, c) = fixture();
        let rep = check_contraction(&s, &c);
        assert!(rep.violations.is_empty(), "{:?}", rep.violations);
        assert!(rep.star_mismatches.is_empty(), "{:?}", rep.star_mismatches);
        assert!(rep.pairs_checked > 0);
    }
}
