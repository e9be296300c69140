//! Long covers of a flow sample: a greedy farthest-point net of d_lambda
//! balls, grown until every point's on-grid flow window sits inside a
//! single set, plus the barycentric recoloring into disjoint families.

use num_traits::Zero;

use crate::cover::nerve::nerve_weights;
use crate::cover::sample::FlowSample;
use crate::error::{Error, Result};
use crate::rat::{rat_int, Rat};

#[derive(Debug, Clone)]
pub struct CoverSet {
    pub center: usize,
    pub radius: Rat,
    pub members: Vec<usize>,
    pub color: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Cover {
    pub sets: Vec<CoverSet>,
    pub alpha_hat: Rat,
    /// Max overlap minus one.
    pub observed_dim: usize,
}

impl Cover {
    pub fn member_sets(&self, z: usize) -> Vec<usize> {
        self.sets
            .iter()
            .enumerate()
            .filter(|(_, s)| s.members.contains(&z))
            .map(|(i, _)| i)
            .collect()
    }

    /// Exhaustive longness check: every point's on-grid flow window within
    /// `window` lies inside some single set.
    pub fn is_long(&self, sample: &FlowSample, window: &Rat) -> Result<bool> {
        for z in 0..sample.len() {
            let mut win = Vec::new();
            for k in sample.grid_range(window) {
                match sample.flow_index(z, k) {
                    Some(i) => win.push(i),
                    None => {
                        return Err(Error::budget(
                            "flow window leaves the sample; widen the grid",
                        ))
                    }
                }
            }
            let ok = self
                .sets
                .iter()
                .any(|s| win.iter().all(|i| s.members.contains(i)));
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn compute_observed_dim(sets: &[CoverSet], n: usize) -> usize {
        let mut max_overlap = 0usize;
        for z in 0..n {
            let count = sets.iter().filter(|s| s.members.contains(&z)).count();
            max_overlap = max_overlap.max(count);
        }
        max_overlap.saturating_sub(1)
    }
}

/// Greedy d_lambda net: farthest-point-first centers with balls of radius
/// 2 alpha_hat, stopping as soon as the cover is alpha_hat-long. Ties in
/// the farthest-point rule break toward the lowest index.
pub fn build_long_cover(sample: &FlowSample, alpha_hat: &Rat) -> Result<Cover> {
    if alpha_hat <= &Rat::zero() {
        return Err(Error::domain("alpha_hat must be positive"));
    }
    if alpha_hat < &sample.dt {
        return Err(Error::domain(
            "alpha_hat finer than the grid resolution; decrease dt",
        ));
    }
    let span = Rat::from_integer(sample.half_width.into()) * &sample.dt;
    if alpha_hat > &span {
        return Err(Error::budget(
            "alpha_hat exceeds the grid half-width; increase K",
        ));
    }
    let n = sample.len();
    if n == 0 {
        return Err(Error::domain("empty sample"));
    }
    let radius = rat_int(2) * alpha_hat;
    let mut centers: Vec<usize> = vec![0];
    loop {
        let sets: Vec<CoverSet> = centers
            .iter()
            .map(|&c| CoverSet {
                center: c,
                radius: radius.clone(),
                members: (0..n)
                    .filter(|&j| sample.dl(c, j) <= &radius)
                    .collect(),
                color: None,
            })
            .collect();
        let cover = Cover {
            observed_dim: Cover::compute_observed_dim(&sets, n),
            sets,
            alpha_hat: alpha_hat.clone(),
        };
        if cover.is_long(sample, alpha_hat)? {
            return Ok(cover);
        }
        // Farthest point from the current centers.
        let mut far: Option<(Rat, usize)> = None;
        for z in 0..n {
            if centers.contains(&z) {
                continue;
            }
            let d = centers
                .iter()
                .map(|&c| sample.dl(z, c).clone())
                .min()
                .unwrap();
            let better = match &far {
                None => true,
                Some((fd, _)) => d > *fd,
            };
            if better {
                far = Some((d, z));
            }
        }
        match far {
            Some((_, z)) => centers.push(z),
            None => {
                return Err(Error::degenerate(
                    "all points are centers yet the cover is not long",
                ))
            }
        }
    }
}

/// Recolors a cover through the barycentric subdivision of its nerve: the
/// pulled-back open star of a simplex sigma is the set of points whose
/// nerve weights on sigma strictly dominate the rest; its color is
/// dim(sigma). Same-color sets are automatically disjoint and every new
/// set lies inside each member of sigma.
pub fn color_cover(sample: &FlowSample, cover: &Cover, max_dim: usize) -> Result<Cover> {
    if cover.observed_dim > max_dim {
        return Err(Error::domain(format!(
            "cover dimension {} exceeds the configured bound {}",
            cover.observed_dim, max_dim
        )));
    }
    let n = sample.len();
    let weights: Vec<Vec<Rat>> = (0..n).map(|z| nerve_weights(sample, cover, z)).collect();
    use std::collections::BTreeMap;
    let mut star_members: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for z in 0..n {
        // Strict-drop prefixes of the sorted weight profile.
        let mut order: Vec<usize> = (0..cover.sets.len()).collect();
        order.sort_by(|&a, &b| {
            weights[z][b]
                .cmp(&weights[z][a])
                .then_with(|| a.cmp(&b))
        });
        for k in 1..=cover.sets.len() {
            let kth = &weights[z][order[k - 1]];
            if kth.is_zero() {
                break;
            }
            let next = if k < cover.sets.len() {
                weights[z][order[k]].clone()
            } else {
                Rat::zero()
            };
            if *kth > next {
                let mut sigma: Vec<usize> = order[..k].to_vec();
                sigma.sort();
                star_members.entry(sigma).or_default().push(z);
            }
        }
    }
    let mut sets = Vec::new();
    for (sigma, members) in star_members {
        let color = sigma.len() - 1;
        sets.push(CoverSet {
            center: cover.sets[sigma[0]].center,
            radius: cover.sets[sigma[0]].radius.clone(),
            members,
            color: Some(color),
        });
    }
    Ok(Cover {
        observed_dim: Cover::compute_observed_dim(&sets, n),
        sets,
        alpha_hat: cover.alpha_hat.clone(),
    })
}

/// Same-color disjointness and parent containment, checked exhaustively.
pub fn verify_coloring(colored: &Cover, parent: &Cover) -> Result<()> {
    for (i, a) in colored.sets.iter().enumerate() {
        for (j, b) in colored.sets.iter().enumerate() {
            if i < j && a.color == b.color {
                if a.members.iter().any(|z| b.members.contains(z)) {
                    return Err(Error::domain(format!(
                        "same-color sets {i} and {j} intersect"
                    )));
                }
            }
        }
        let contained = parent
            .sets
            .iter()
            .any(|p| a.members.iter().all(|z| p.members.contains(z)));
        if !contained {
            return Err(Error::domain(format!(
                "colored set {i} is not contained in any parent set"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::sample::circle_sample;
    use crate::rat::rat;

    fn wheel(n: i64) -> FlowSample {
        // n equally spaced points on a circle of circumference n, step 1.
        let pts: Vec<Rat> = (0..n).map(rat_int).collect();
        circle_sample(&rat_int(n), &pts, &rat_int(1), 3, &rat_int(1)).unwrap()
    }

    #[test]
    fn single_point_cover() {
        let m = crate::model::euclidean::Euclidean::new(1);
        let c = crate::flow::geodesic::Geodesic::constant(
            crate::model::euclidean::point_from_rats(&["0"]).unwrap(),
        );
        let b = crate::cover::sample::SampleBuilder::new(rat_int(1), 2, rat_int(1));
        let s = b.build(&m, &[c]).unwrap();
        let cover = build_long_cover(&s, &rat_int(2)).unwrap();
        assert_eq!(cover.sets.len(), 1);
        assert_eq!(cover.observed_dim, 0);
    }

    #[test]
    fn wheel_cover_is_long_and_colorable() {
        let s = wheel(12);
        let cover = build_long_cover(&s, &rat_int(2)).unwrap();
        assert!(cover.is_long(&s, &rat_int(2)).unwrap());
        let colored = color_cover(&s, &cover, 4).unwrap();
        verify_coloring(&colored, &cover).unwrap();
        // The colored sets still cover everything.
        for z in 0..s.len() {
            assert!(colored.sets.iter().any(|st| st.members.contains(&z)));
        }
    }

    #[test]
    fn two_far_orbits_get_disjoint_sets() {
        // Axes of two different generators in the free group: distinct
        // orbits, pushed far apart in d_lambda by a large lambda.
        use crate::cover::sample::SampleBuilder;
        use crate::flow::geodesic::Geodesic;
        use crate::model::cayley::CayleyTree;
        use crate::model::Model;
        let m = CayleyTree::new(2, 40);
        let ca = Geodesic::axis(&m, &m.parse_elem("a").unwrap()).unwrap();
        let cb = Geodesic::axis(&m, &m.parse_elem("b").unwrap()).unwrap();
        let b = SampleBuilder::new(rat(1, 2), 2, rat_int(40));
        let s = b.build(&m, &[ca, cb]).unwrap();
        let cover = build_long_cover(&s, &rat(1, 2)).unwrap();
        assert_eq!(cover.sets.len(), 2);
        assert_eq!(cover.observed_dim, 0);
        let m0: std::collections::BTreeSet<_> = cover.sets[0].members.iter().collect();
        let m1: std::collections::BTreeSet<_> = cover.sets[1].members.iter().collect();
        assert!(m0.is_disjoint(&m1));
    }
}
