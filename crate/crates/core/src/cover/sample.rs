//! Finite flow samples of the orbit space: points closed under a flow
//! grid, with cached certified pairwise orbit distances and the chain
//! metric d_lambda computed by all-pairs shortest path.
//!
//! Downstream cover/bump/partition/nerve constructions consume only the
//! index structure, the exact snapped distance matrix, and the flow map,
//! so both flow-space samples and the circle-with-rotation fixture fit.

use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::geodesic::Geodesic;
use crate::flow::quad::dist_fs;
use crate::model::{Model, Point};
use crate::rat::{rat_snap_to_grid, Rat};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub enum SamplePoint {
    Geo(Geodesic),
    Circ(Rat),
}

#[derive(Debug, Clone)]
pub struct FlowSample {
    pub points: Vec<SamplePoint>,
    /// Canonical orbit keys, aligned with `points`.
    pub keys: Vec<String>,
    pub dt: Rat,
    pub half_width: i64,
    /// flow_map[i][K + k] = designated representative of flow_{k dt}(i),
    /// or None when the shift leaves the sample.
    pub flow_map: Vec<Vec<Option<usize>>>,
    /// Exact snapped orbit distances (symmetric, zero diagonal).
    pub dist: Vec<Vec<Rat>>,
    pub lambda: Rat,
    /// Pairs whose orbit minimization hit the ball budget boundary.
    pub flagged: Vec<(usize, usize)>,
    /// d_lambda all-pairs matrix.
    pub d_lambda: Vec<Vec<Rat>>,
}

/// Snap grid for certified distances: 2^-24.
fn snap_step() -> Rat {
    Rat::new(1.into(), (1i64 << 24).into())
}

pub fn snap_scalar(s: &Scalar) -> Rat {
    match s {
        Scalar::Exact(r) => r.clone(),
        Scalar::Enclosed(iv) => rat_snap_to_grid(&iv.mid_rat(), &snap_step()),
    }
}

/// Orbit-canonical key of a geodesic: the minimal serialized evaluation
/// table over the candidate normalizers (anchor normalizer composed with
/// stabilizer representatives at the given precision).
pub fn canon_key(
    model: &dyn Model,
    c: &Geodesic,
    key_window: &Rat,
    precision: u32,
) -> Result<(String, Geodesic)> {
    // Anchor at the flow-invariant present time: orbit folding must treat a
    // geodesic and its group translates identically, and time 0 is what the
    // window serialization is centered on.
    let anchor_time = Rat::zero();
    let anchor_pt = c.evaluate(model, &anchor_time)?;
    let anchors: Vec<Point> = match &anchor_pt {
        Point::Vertex(_) | Point::EdgePoint { .. } => anchor_pt
            .tree_anchors()
            .into_iter()
            .map(Point::Vertex)
            .collect(),
        other => vec![other.clone()],
    };
    let mut best: Option<(String, Geodesic)> = None;
    for a in &anchors {
        let eta = model.orbit_normalizer(a)?;
        let stabs = match a {
            Point::Vertex(_) | Point::EdgePoint { .. } => {
                let home = model.act_point(&eta, a)?;
                model.stabilizer_reps(&home, precision)?
            }
            _ => vec![model.identity()],
        };
        for s in stabs {
            let g = model.mul(&s, &eta)?;
            let cand = match c.act(model, &g) {
                Ok(c) => c,
                Err(Error::Budget(_)) | Err(Error::Precision(_)) => continue,
                Err(e) => return Err(e),
            };
            let key = eval_key(model, &cand, key_window)?;
            if best.as_ref().map_or(true, |(k, _)| key < *k) {
                best = Some((key, cand));
            }
        }
    }
    best.ok_or_else(|| Error::budget("no normalizer candidate survived the depth budget"))
}

/// Serialized evaluations on the half-integer grid of a window; depth
/// failures serialize as a marker so keys stay total and deterministic.
fn eval_key(model: &dyn Model, c: &Geodesic, window: &Rat) -> Result<String> {
    let mut out = String::new();
    let step = Rat::new(1.into(), 2.into());
    let mut t = -window.clone();
    while &t <= window {
        match c.evaluate(model, &t) {
            Ok(p) => {
                out.push_str(&p.display());
            }
            Err(Error::Budget(_)) | Err(Error::Precision(_)) => out.push('~'),
            Err(e) => return Err(e),
        }
        out.push('|');
        t = &t + &step;
    }
    Ok(out)
}

pub struct SampleBuilder {
    pub dt: Rat,
    pub half_width: i64,
    pub lambda: Rat,
    /// Ball radius for the orbit minimization in pairwise distances.
    pub orbit_beta: Rat,
    pub precision: u32,
    pub quad_tol: Rat,
    pub key_window: Rat,
}

impl SampleBuilder {
    pub fn new(dt: Rat, half_width: i64, lambda: Rat) -> SampleBuilder {
        SampleBuilder {
            dt,
            half_width,
            lambda,
            orbit_beta: Rat::from_integer(3.into()),
            precision: 2,
            quad_tol: Rat::new(1.into(), 100_000.into()),
            key_window: Rat::from_integer(8.into()),
        }
    }

    /// Flow sample from seed geodesics: grid shifts, orbit folding, the
    /// certified distance matrix, and the chain metric.
    pub fn build(&self, model: &dyn Model, seeds: &[Geodesic]) -> Result<FlowSample> {
        if self.dt <= Rat::zero() || self.half_width < 1 {
            return Err(Error::domain("grid needs dt > 0 and K >= 1"));
        }
        let mut keys: Vec<String> = Vec::new();
        let mut reps: Vec<Geodesic> = Vec::new();
        let mut index = std::collections::BTreeMap::new();
        for seed in seeds {
            for k in -self.half_width..=self.half_width {
                let shifted = seed.flow(&(Rat::from_integer(k.into()) * &self.dt));
                let (key, rep) = canon_key(model, &shifted, &self.key_window, self.precision)?;
                if !index.contains_key(&key) {
                    index.insert(key.clone(), reps.len());
                    keys.push(key);
                    reps.push(rep);
                }
            }
        }
        let n = reps.len();
        // Flow closure map.
        let mut flow_map = vec![vec![None; (2 * self.half_width + 1) as usize]; n];
        for i in 0..n {
            for k in -self.half_width..=self.half_width {
                let shifted = reps[i].flow(&(Rat::from_integer(k.into()) * &self.dt));
                match canon_key(model, &shifted, &self.key_window, self.precision) {
                    Ok((key, _)) => {
                        flow_map[i][(k + self.half_width) as usize] = index.get(&key).copied();
                    }
                    Err(Error::Budget(_)) | Err(Error::Precision(_)) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        // Certified pairwise orbit distances, in parallel over pairs.
        let ball = model.ball(&self.orbit_beta, self.precision)?;
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect();
        let computed: Vec<Result<(usize, usize, Scalar, bool)>> = pairs
            .par_iter()
            .map(|&(i, j)| {
                let mut best: Option<Scalar> = None;
                let mut best_is_boundary = false;
                for g in &ball {
                    let gc = match reps[i].act(model, g) {
                        Ok(c) => c,
                        Err(Error::Budget(_)) | Err(Error::Precision(_)) => continue,
                        Err(e) => return Err(e),
                    };
                    let d = dist_fs(model, &gc, &reps[j], &self.quad_tol)?;
                    let replace = best
                        .as_ref()
                        .map_or(true, |b| d.order_key(b) == std::cmp::Ordering::Less);
                    if replace {
                        // Boundary flag: the minimizer sits at the edge of
                        // the enumerated ball.
                        let dg = model.dg_origin(g)?.interval().hi;
                        let beta_f = crate::rat::rat_to_f64(&self.orbit_beta);
                        best_is_boundary = dg > beta_f - 1.25;
                        best = Some(d);
                    }
                }
                let d = best.ok_or_else(|| Error::budget("empty orbit ball"))?;
                Ok((i, j, d, best_is_boundary))
            })
            .collect();
        let mut dist = vec![vec![Rat::zero(); n]; n];
        let mut flagged = Vec::new();
        for item in computed {
            let (i, j, d, boundary) = item?;
            let snapped = snap_scalar(&d);
            dist[i][j] = snapped.clone();
            dist[j][i] = snapped;
            if boundary {
                flagged.push((i, j));
            }
        }
        let points = reps.into_iter().map(SamplePoint::Geo).collect();
        let mut s = FlowSample {
            points,
            keys,
            dt: self.dt.clone(),
            half_width: self.half_width,
            flow_map,
            dist,
            lambda: self.lambda.clone(),
            flagged,
            d_lambda: vec![],
        };
        s.compute_d_lambda();
        Ok(s)
    }
}

/// Circle fixture: positions with the rotation flow, exact arc distances.
pub fn circle_sample(
    circumference: &Rat,
    positions: &[Rat],
    dt: &Rat,
    half_width: i64,
    lambda: &Rat,
) -> Result<FlowSample> {
    if dt <= &Rat::zero() || half_width < 1 {
        return Err(Error::domain("grid needs dt > 0 and K >= 1"));
    }
    let reduce = |r: &Rat| -> Rat {
        let q = r / circumference;
        let f = Rat::from_integer(crate::rat::rat_floor(&q));
        r - f * circumference
    };
    let pts: Vec<Rat> = positions.iter().map(|p| reduce(p)).collect();
    let n = pts.len();
    let find = |x: &Rat| -> Option<usize> { pts.iter().position(|p| p == x) };
    let mut flow_map = vec![vec![None; (2 * half_width + 1) as usize]; n];
    for (i, p) in pts.iter().enumerate() {
        for k in -half_width..=half_width {
            let target = reduce(&(p + Rat::from_integer(k.into()) * dt));
            flow_map[i][(k + half_width) as usize] = find(&target);
        }
    }
    let mut dist = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let d = {
                let raw = reduce(&(&pts[i] - &pts[j]));
                let other = circumference - &raw;
                raw.min(other)
            };
            dist[i][j] = d;
        }
    }
    let keys = pts.iter().map(|p| format!("circ:{p}")).collect();
    let mut s = FlowSample {
        points: pts.into_iter().map(SamplePoint::Circ).collect(),
        keys,
        dt: dt.clone(),
        half_width,
        flow_map,
        dist,
        lambda: lambda.clone(),
        flagged: vec![],
        d_lambda: vec![],
    };
    s.compute_d_lambda();
    Ok(s)
}

impl FlowSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn flow_index(&self, i: usize, k: i64) -> Option<usize> {
        if k.abs() > self.half_width {
            return None;
        }
        self.flow_map[i][(k + self.half_width) as usize]
    }

    /// Grid shifts within |k dt| <= window.
    pub fn grid_range(&self, window: &Rat) -> Vec<i64> {
        let mut out = Vec::new();
        for k in -self.half_width..=self.half_width {
            if (Rat::from_integer(k.into()) * &self.dt).abs() <= *window {
                out.push(k);
            }
        }
        out
    }

    /// Single-hop relaxed edge weight: min over the grid of
    /// |t| + lambda * dist(flow_t(i), j).
    fn edge_weight(&self, i: usize, j: usize) -> Rat {
        let mut best: Option<Rat> = None;
        for k in -self.half_width..=self.half_width {
            if let Some(ik) = self.flow_index(i, k) {
                let w = (Rat::from_integer(k.into()) * &self.dt).abs()
                    + &self.lambda * &self.dist[ik][j];
                if best.as_ref().map_or(true, |b| w < *b) {
                    best = Some(w);
                }
            }
        }
        best.unwrap_or_else(|| &self.lambda * &self.dist[i][j])
    }

    fn compute_d_lambda(&mut self) {
        let n = self.len();
        let mut d = vec![vec![Rat::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let w1 = self.edge_weight(i, j);
                    let w2 = self.edge_weight(j, i);
                    d[i][j] = w1.min(w2);
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = &d[i][k] + &d[k][j];
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        self.d_lambda = d;
    }

    pub fn dl(&self, i: usize, j: usize) -> &Rat {
        &self.d_lambda[i][j]
    }

    /// d_lambda distance from a subset to a point.
    pub fn dl_to_set(&self, z: usize, set: &[usize]) -> Option<Rat> {
        set.iter().map(|&i| self.d_lambda[z][i].clone()).min()
    }

    /// Largest pairwise d_lambda value plus one: stands in for infinity.
    pub fn dl_big(&self) -> Rat {
        let mut m = Rat::zero();
        for row in &self.d_lambda {
            for v in row {
                if v > &m {
                    m = v.clone();
                }
            }
        }
        m + Rat::from_integer(1.into())
    }

    /// Chain distances from external query points given their snapped
    /// direct distances to every sample point: one relaxation through the
    /// sample suffices because internal chains are already optimal.
    pub fn extend_d_lambda(&self, direct: &[Vec<Rat>]) -> Vec<Rat> {
        // direct[k_idx][j]: distance from flow_{k dt}(query) to sample j,
        // indexed by grid offset k_idx = k + half_width.
        let n = self.len();
        let mut out = vec![self.dl_big(); n];
        for (k_idx, row) in direct.iter().enumerate() {
            let t = (Rat::from_integer((k_idx as i64 - self.half_width).into()) * &self.dt).abs();
            for i in 0..n {
                let hop = &t + &self.lambda * &row[i];
                for (j, o) in out.iter_mut().enumerate() {
                    let w = &hop + &self.d_lambda[i][j];
                    if w < *o {
                        *o = w;
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::cayley::CayleyTree;
    use crate::model::euclidean::{point_from_rats, Euclidean};
    use crate::rat::{rat, rat_int};

    #[test]
    fn constant_seed_folds_to_one_point() {
        let m = Euclidean::new(1);
        let c = Geodesic::constant(point_from_rats(&["0"]).unwrap());
        let b = SampleBuilder::new(rat_int(1), 1, rat_int(1));
        let s = b.build(&m, &[c]).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.flow_index(0, 1), Some(0));
    }

    #[test]
    fn integer_translations_fold_the_line() {
        // A unit-speed line in R^1 with the Z-action: integer flow shifts
        // are translations, so one representative remains.
        let m = Euclidean::new(1);
        let line = Geodesic::line(vec![Rat::zero()], vec![rat_int(1)]).unwrap();
        let b = SampleBuilder::new(rat_int(1), 3, rat_int(1));
        let s = b.build(&m, &[line]).unwrap();
        assert_eq!(s.len(), 1, "Z-translations identify all integer shifts");
        assert_eq!(s.flow_index(0, 2), Some(0));
    }

    #[test]
    fn cayley_axis_halves_fold_to_two_reps() {
        let m = CayleyTree::new(2, 40);
        let c = Geodesic::axis(&m, &m.parse_elem("a").unwrap()).unwrap();
        let b = SampleBuilder::new(rat(1, 2), 2, rat_int(1));
        let s = b.build(&m, &[c]).unwrap();
        assert_eq!(s.len(), 2, "period 1 folds the half-integer grid to 2");
        // Flow by one full step returns to the same representative.
        assert_eq!(s.flow_index(0, 2), Some(0));
        assert_eq!(s.flow_index(0, 1), Some(1));
    }

    #[test]
    fn d_lambda_bounded_by_flow_time_and_triangle() {
        let m = CayleyTree::new(2, 40);
        let ca = Geodesic::axis(&m, &m.parse_elem("a").unwrap()).unwrap();
        let cb = Geodesic::axis(&m, &m.parse_elem("b").unwrap()).unwrap();
        let b = SampleBuilder::new(rat(1, 2), 2, rat_int(1));
        let s = b.build(&m, &[ca, cb]).unwrap();
        let n = s.len();
        for i in 0..n {
            assert!(s.dl(i, i).is_zero());
            // On-grid flow shift: d_lambda at most |t|.
            if let Some(j) = s.flow_index(i, 1) {
                assert!(s.dl(i, j) <= &rat(1, 2));
            }
            for j in 0..n {
                for k in 0..n {
                    assert!(s.dl(i, j) <= &(s.dl(i, k) + s.dl(k, j)));
                }
                assert_eq!(s.dl(i, j), s.dl(j, i));
            }
        }
    }
}
