//! The map from the flow space into the join space: partition weights pick
//! the slot masses, local sections supply the group entries, and the color
//! classes of the cover index the slots.

use num_traits::Zero;

use crate::cover::bump::Partition;
use crate::cover::cover::Cover;
use crate::cover::sample::{canon_key, FlowSample};
use crate::error::{Error, Result};
use crate::flow::geodesic::Geodesic;
use crate::join::{make_join_point, JoinFamily, JoinPoint};
use crate::model::Model;
use crate::pipeline::sections::{section_value, Section, SectionValue};
use crate::rat::Rat;

pub struct JoinMap {
    /// Colored cover; set i has color sets[i].color.
    pub cover: Cover,
    /// Partition subordinate to the colored cover.
    pub partition: Partition,
    /// One section per colored set.
    pub sections: Vec<Section>,
    pub family: JoinFamily,
    /// Number of slots (colors) in the join.
    pub n_colors: usize,
    pub precision: u32,
    pub quad_tol: Rat,
    pub key_window: Rat,
}

#[derive(Debug, Clone)]
pub struct ApplyOutcome {
    pub point: JoinPoint,
    /// Section misses and other soft issues; the join point is still usable
    /// for weight comparisons.
    pub issues: Vec<String>,
}

impl JoinMap {
    /// Partition weights of a query geodesic: a canonical-key lookup into
    /// the sample where possible, otherwise the extended chain-metric
    /// computation against the sample.
    pub fn weights_at(
        &self,
        model: &dyn Model,
        sample: &FlowSample,
        c: &Geodesic,
    ) -> Result<Vec<Rat>> {
        let (key, rep) = canon_key(model, c, &self.key_window, self.precision)?;
        if let Some(idx) = sample.keys.iter().position(|k| k == &key) {
            return Ok(self
                .partition
                .values
                .iter()
                .map(|row| row[idx].clone())
                .collect());
        }
        self.weights_extended(model, sample, &rep)
    }

    /// Extended weights for a genuinely out-of-sample query: direct
    /// certified distances from each grid shift of the query to the sample,
    /// then the same bump/normalization formulas.
    fn weights_extended(
        &self,
        model: &dyn Model,
        sample: &FlowSample,
        rep: &Geodesic,
    ) -> Result<Vec<Rat>> {
        let alpha_hat = &self.partition.alpha_hat;
        let grid = sample.grid_range(alpha_hat);
        // d_lambda from each shifted query to every sample point.
        let mut shifted_dl: Vec<Vec<Rat>> = Vec::with_capacity(grid.len());
        for &k in &grid {
            let q = rep.flow(&(Rat::from_integer(k.into()) * &sample.dt));
            let (qkey, qrep) = canon_key(model, &q, &self.key_window, self.precision)?;
            if let Some(idx) = sample.keys.iter().position(|kk| kk == &qkey) {
                shifted_dl.push(sample.d_lambda[idx].clone());
                continue;
            }
            // Certified direct distances, one relaxation through the sample.
            let mut direct = vec![vec![Rat::zero(); sample.len()]; 1];
            for j in 0..sample.len() {
                let target = match &sample.points[j] {
                    crate::cover::sample::SamplePoint::Geo(g) => g.clone(),
                    crate::cover::sample::SamplePoint::Circ(_) => {
                        return Err(Error::domain(
                            "geodesic query against a circle sample",
                        ))
                    }
                };
                let d = crate::flow::quad::dist_fs(model, &qrep, &target, &self.quad_tol)?;
                direct[0][j] = crate::cover::sample::snap_scalar(&d);
            }
            // Single playback of the chain relaxation for this shift alone.
            let mut row = vec![sample.dl_big(); sample.len()];
            for i in 0..sample.len() {
                let hop = &sample.lambda * &direct[0][i];
                for (j, o) in row.iter_mut().enumerate() {
                    let w = &hop + &sample.d_lambda[i][j];
                    if w < *o {
                        *o = w;
                    }
                }
            }
            shifted_dl.push(row);
        }
        // Bump values per cover set, using the same shrunken-core cutoffs
        // the partition used; we mirror its normalization.
        let n = sample.len();
        let mut bumps = Vec::with_capacity(self.cover.sets.len());
        for (u, set) in self.cover.sets.iter().enumerate() {
            let inner: Vec<usize> = set
                .members
                .iter()
                .copied()
                .filter(|&z| {
                    sample.grid_range(alpha_hat).into_iter().all(|k| {
                        sample
                            .flow_index(z, k)
                            .map(|zk| set.members.contains(&zk))
                            .unwrap_or(false)
                    })
                })
                .collect();
            let comp: Vec<usize> = (0..n).filter(|i| !inner.contains(i)).collect();
            let gap = &self.partition.lebesgue;
            let mut best = Rat::zero();
            for (gi, &k) in grid.iter().enumerate() {
                let t_abs = num_traits::Signed::abs(
                    &(Rat::from_integer(k.into()) * &sample.dt),
                );
                let damp = Rat::from_integer(1.into()) - t_abs / alpha_hat;
                if damp <= Rat::zero() {
                    continue;
                }
                let d_comp = if comp.is_empty() {
                    sample.dl_big()
                } else {
                    comp.iter()
                        .map(|&i| shifted_dl[gi][i].clone())
                        .min()
                        .unwrap()
                };
                let phi = (d_comp / gap).min(Rat::from_integer(1.into()));
                let val = damp * phi;
                if val > best {
                    best = val;
                }
            }
            let _ = u;
            bumps.push(best);
        }
        let total: Rat = bumps.iter().cloned().sum();
        if total <= Rat::zero() {
            return Err(Error::budget(
                "query escapes the cover: no bump is positive",
            ));
        }
        Ok(bumps.into_iter().map(|b| b / &total).collect())
    }

    /// Applies the join map to a geodesic: one slot per color, the slot
    /// mass being the color's total partition weight and the entry coming
    /// from the maximal-weight set's section.
    pub fn apply(
        &self,
        model: &dyn Model,
        sample: &FlowSample,
        c: &Geodesic,
    ) -> Result<ApplyOutcome> {
        let weights = self.weights_at(model, sample, c)?;
        let mut issues = Vec::new();
        let mut raw = Vec::with_capacity(self.n_colors);
        for color in 0..self.n_colors {
            let mut mass = Rat::zero();
            let mut best: Option<(Rat, usize)> = None;
            for (u, set) in self.cover.sets.iter().enumerate() {
                if set.color != Some(color) {
                    continue;
                }
                mass += &weights[u];
                if !weights[u].is_zero()
                    && best.as_ref().map_or(true, |(w, _)| weights[u] > *w)
                {
                    best = Some((weights[u].clone(), u));
                }
            }
            match best {
                None => raw.push((
                    Rat::zero(),
                    model.identity(),
                    self.family.default_label().to_string(),
                )),
                Some((_, u)) => {
                    let sec = &self.sections[u];
                    let elem = match section_value(model, sec, c, self.precision, &self.quad_tol)?
                    {
                        SectionValue::Found { elem, .. } => elem,
                        SectionValue::Missing { reason } => {
                            issues.push(format!("slot {color}: section miss: {reason}"));
                            model.identity()
                        }
                    };
                    raw.push((mass, elem, sec.label.clone()));
                }
            }
        }
        let point = make_join_point(model, &self.family, raw)?;
        Ok(ApplyOutcome { point, issues })
    }
}
