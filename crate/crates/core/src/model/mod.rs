//! Model spaces behind a common strategy trait.
//!
//! Each concrete space (Euclidean lattice quotient, finite weighted tree,
//! free-group Cayley tree, Bruhat-Tits tree of SL2(Q_p), rotation circle)
//! implements [`Model`] and registers a constructor by kind name in
//! [`Registry`]; scenarios select one at runtime.

pub mod bruhat_tits;
pub mod cayley;
pub mod circle;
pub mod config_tree;
pub mod euclidean;
pub mod path;
pub mod point;
pub mod tree_common;

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::group::element::GroupElement;
use crate::rat::{parse_rat, Rat};
use crate::scalar::Scalar;

pub use path::Path;
pub use point::{Point, VertexId};

pub trait Model: Send + Sync {
    fn kind_name(&self) -> &'static str;
    fn describe(&self) -> String;
    fn base_point(&self) -> Point;
    fn check_point(&self, x: &Point) -> Result<()>;
    fn distance(&self, x: &Point, y: &Point) -> Result<Scalar>;
    fn path(&self, x: &Point, y: &Point) -> Result<Path>;

    // Tree backend surface; non-tree models answer with a domain error.
    fn vertex_dist(&self, u: &VertexId, v: &VertexId) -> Result<Rat>;
    fn vertex_path(&self, u: &VertexId, v: &VertexId) -> Result<Vec<VertexId>>;
    fn neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>>;
    fn edge_len(&self, u: &VertexId, v: &VertexId) -> Result<Rat>;

    // Group attached to the space.
    fn identity(&self) -> GroupElement;
    fn mul(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement>;
    fn inv(&self, g: &GroupElement) -> Result<GroupElement>;
    fn elem_eq(&self, g: &GroupElement, h: &GroupElement) -> bool;
    /// Deterministic serialization used for tie-breaking and digests.
    fn elem_key(&self, g: &GroupElement) -> String;
    fn act_point(&self, g: &GroupElement, x: &Point) -> Result<Point>;
    /// D(g) = d_G(e, g); the two-sided metric is D(g^{-1} h).
    fn dg_origin(&self, g: &GroupElement) -> Result<Scalar>;
    /// Elements with d_G(e, g) < beta, enumerated at the given precision
    /// level, without duplicates and closed under inversion.
    fn ball(&self, beta: &Rat, precision: u32) -> Result<Vec<GroupElement>>;
    /// Elements carrying x to y, up to precision-level coset coarsening.
    fn point_translators(&self, x: &Point, y: &Point, precision: u32)
        -> Result<Vec<GroupElement>>;
    /// Representatives of the isotropy group of x at a precision level.
    fn stabilizer_reps(&self, x: &Point, precision: u32) -> Result<Vec<GroupElement>>;
    /// An element carrying x into the fundamental region around the base
    /// point; exact and orbit-canonical for the shipped models.
    fn orbit_normalizer(&self, x: &Point) -> Result<GroupElement>;
    fn parse_elem(&self, s: &str) -> Result<GroupElement>;

    /// Right-multiplication continuity modulus: a delta such that
    /// d_G(g, g') < delta and d_G(e, v) < alpha imply d_G(g v, g' v) < eps.
    /// The default covers the discrete models, where d_G separates distinct
    /// elements by at least 1.
    fn conjugation_delta(&self, eps: &Rat, _alpha: &Rat) -> Result<Rat> {
        let one = Rat::from_integer(1.into());
        Ok(one.min(eps.clone()) / Rat::from_integer(2.into()))
    }
}

pub type ModelHandle = Arc<dyn Model>;

/// Left-invariant metric d_G(g, h) = D(g^{-1} h).
pub fn metric_dg(model: &dyn Model, g: &GroupElement, h: &GroupElement) -> Result<Scalar> {
    let gi = model.inv(g)?;
    let gh = model.mul(&gi, h)?;
    model.dg_origin(&gh)
}

/// Evaluates a path at arc-length parameter `s`, clamped to the
/// parametrization range for finite paths.
pub fn eval_path(model: &dyn Model, path: &Path, s: &Rat) -> Result<Point> {
    match path {
        Path::Constant(p) => Ok(p.clone()),
        Path::Segment { x, y, len } => {
            let sv = Scalar::Exact(s.clone());
            let u = sv.max(&Scalar::zero()).min(len);
            if matches!(len.le(&Rat::zero()), crate::scalar::Trilean::True) {
                return Ok(Point::Euclidean(x.clone()));
            }
            let mut coords = Vec::with_capacity(x.len());
            for (xi, yi) in x.iter().zip(y.iter()) {
                let d = yi.sub(xi);
                let scaled = u.mul(&d);
                let frac = Scalar::Enclosed(scaled.interval().div(&len.interval()));
                let frac = if scaled.is_exact() && len.is_exact() {
                    Scalar::Exact(scaled.as_exact().unwrap() / len.as_exact().unwrap())
                } else {
                    frac
                };
                coords.push(xi.add(&frac));
            }
            Ok(Point::Euclidean(coords))
        }
        Path::Line { base, dir, norm } => {
            let sv = Scalar::Exact(s.clone());
            let mut coords = Vec::with_capacity(base.len());
            for (bi, di) in base.iter().zip(dir.iter()) {
                let num = sv.mul(&Scalar::Exact(di.clone()));
                let frac = if num.is_exact() && norm.is_exact() {
                    Scalar::Exact(num.as_exact().unwrap() / norm.as_exact().unwrap())
                } else {
                    Scalar::Enclosed(num.interval().div(&norm.interval()))
                };
                coords.push(Scalar::Exact(bi.clone()).add(&frac));
            }
            Ok(Point::Euclidean(coords))
        }
        Path::TreeSeg {
            start,
            stops,
            end,
            cum,
            len,
        } => eval_tree_seg(model, start, stops, end, cum, len, s),
        Path::TreeAxis {
            gen,
            anchor,
            period,
            phase,
        } => {
            let u = phase + s;
            let k = (&u / period).floor();
            let rem = &u - &k * period;
            let k_int = crate::rat::rat_floor(&(&u / period));
            let gk = elem_pow_big(model, gen, &k_int)?;
            let a0 = model.act_point(&gk, &Point::Vertex(anchor.clone()))?;
            let a1 = model.act_point(gen, &a0)?;
            let seg = model.path(&a0, &a1)?;
            eval_path(model, &seg, &rem)
        }
        Path::CircArc { start, sweep } => {
            let m = sweep.abs();
            let u = s.clone().max(Rat::zero()).min(m);
            let signed = if sweep.is_negative() { -u } else { u };
            Ok(Point::Circle(start + signed))
        }
    }
}

fn eval_tree_seg(
    model: &dyn Model,
    start: &Point,
    stops: &[VertexId],
    end: &Point,
    cum: &[Rat],
    len: &Rat,
    s: &Rat,
) -> Result<Point> {
    let s = s.clone().max(Rat::zero()).min(len.clone());
    if s.is_zero() {
        return Ok(start.clone());
    }
    if s == *len {
        return Ok(end.clone());
    }
    if stops.is_empty() {
        // start and end share an edge (or one is an endpoint vertex of it).
        return point_between(model, start, end, &s);
    }
    if s <= cum[0] {
        return point_between(model, start, &Point::Vertex(stops[0].clone()), &s);
    }
    for i in 0..stops.len() - 1 {
        if s <= cum[i + 1] {
            let off = &s - &cum[i];
            return edge_point(model, &stops[i], &stops[i + 1], &off);
        }
    }
    let off = &s - cum.last().unwrap();
    point_between(model, &Point::Vertex(stops.last().unwrap().clone()), end, &off)
}

/// Point at distance `off` from `a` toward `b`, where `a` and `b` lie on a
/// common edge (interior points or its endpoints).
fn point_between(model: &dyn Model, a: &Point, b: &Point, off: &Rat) -> Result<Point> {
    if off.is_zero() {
        return Ok(a.clone());
    }
    match (a, b) {
        (Point::Vertex(u), Point::Vertex(v)) => edge_point(model, u, v, off),
        (Point::Vertex(u), Point::EdgePoint { u: eu, v: ev, .. }) => {
            if u == eu {
                edge_point(model, eu, ev, off)
            } else {
                let l = model.edge_len(eu, ev)?;
                edge_point(model, eu, ev, &(&l - off))
            }
        }
        (Point::EdgePoint { u: eu, v: ev, offset }, Point::Vertex(w)) => {
            if w == ev {
                edge_point(model, eu, ev, &(offset + off))
            } else {
                edge_point(model, eu, ev, &(offset - off))
            }
        }
        (
            Point::EdgePoint { u: eu, v: ev, offset: o1 },
            Point::EdgePoint { offset: o2, .. },
        ) => {
            let signed = if o2 >= o1 { o1 + off } else { o1 - off };
            edge_point(model, eu, ev, &signed)
        }
        _ => Err(Error::domain("point_between on incompatible points")),
    }
}

/// Canonicalized point on the edge {u, v} at `offset` from `u`: vertex form
/// at the endpoints, orientation by vertex key inside.
pub fn edge_point(model: &dyn Model, u: &VertexId, v: &VertexId, offset: &Rat) -> Result<Point> {
    let len = model.edge_len(u, v)?;
    if offset.is_negative() || *offset > len {
        return Err(Error::domain(format!(
            "edge offset {} outside [0, {}]",
            offset, len
        )));
    }
    if offset.is_zero() {
        return Ok(Point::Vertex(u.clone()));
    }
    if *offset == len {
        return Ok(Point::Vertex(v.clone()));
    }
    if u <= v {
        Ok(Point::EdgePoint {
            u: u.clone(),
            v: v.clone(),
            offset: offset.clone(),
        })
    } else {
        Ok(Point::EdgePoint {
            u: v.clone(),
            v: u.clone(),
            offset: &len - offset,
        })
    }
}

/// g^k for a (possibly large, possibly negative) integer exponent.
pub fn elem_pow_big(
    model: &dyn Model,
    g: &GroupElement,
    k: &num_bigint::BigInt,
) -> Result<GroupElement> {
    use num_traits::ToPrimitive;
    let kk = k
        .to_i64()
        .ok_or_else(|| Error::budget("axis power exponent out of range"))?;
    elem_pow(model, g, kk)
}

pub fn elem_pow(model: &dyn Model, g: &GroupElement, k: i64) -> Result<GroupElement> {
    let mut out = model.identity();
    let base = if k < 0 { model.inv(g)? } else { g.clone() };
    for _ in 0..k.unsigned_abs() {
        out = model.mul(&out, &base)?;
    }
    Ok(out)
}

/// Applies a group element to a whole path.
pub fn act_path(model: &dyn Model, g: &GroupElement, p: &Path) -> Result<Path> {
    match p {
        Path::Constant(x) => Ok(Path::Constant(model.act_point(g, x)?)),
        Path::Segment { x, y, .. } => {
            let gx = model.act_point(g, &Point::Euclidean(x.clone()))?;
            let gy = model.act_point(g, &Point::Euclidean(y.clone()))?;
            model.path(&gx, &gy)
        }
        Path::TreeSeg { start, end, .. } => {
            let gx = model.act_point(g, start)?;
            let gy = model.act_point(g, end)?;
            model.path(&gx, &gy)
        }
        Path::TreeAxis {
            gen,
            anchor,
            period,
            phase,
        } => {
            let gi = model.inv(g)?;
            let conj = model.mul(&model.mul(g, gen)?, &gi)?;
            let ga = model.act_point(g, &Point::Vertex(anchor.clone()))?;
            let anchor = match ga {
                Point::Vertex(v) => v,
                _ => return Err(Error::domain("axis anchor must stay a vertex")),
            };
            Ok(Path::TreeAxis {
                gen: conj,
                anchor,
                period: period.clone(),
                phase: phase.clone(),
            })
        }
        Path::Line { base, dir, norm } => {
            let gb = model.act_point(g, &Point::euclidean_exact(base.clone()))?;
            let base = match gb {
                Point::Euclidean(cs) => cs
                    .into_iter()
                    .map(|c| c.as_exact().cloned().ok_or_else(|| {
                        Error::domain("line translate must stay exact")
                    }))
                    .collect::<Result<Vec<_>>>()?,
                _ => return Err(Error::domain("line translate left the space")),
            };
            Ok(Path::Line {
                base,
                dir: dir.clone(),
                norm: norm.clone(),
            })
        }
        Path::CircArc { start, sweep } => {
            let gs = model.act_point(g, &Point::Circle(start.clone()))?;
            match gs {
                Point::Circle(r) => Ok(Path::CircArc {
                    start: r,
                    sweep: sweep.clone(),
                }),
                _ => Err(Error::domain("circle translate left the space")),
            }
        }
    }
}

/// Radial projection onto the closed R-ball around `b`: the identity inside
/// the ball, otherwise the point at distance R from `b` along [b, x].
pub fn radial_projection(model: &dyn Model, b: &Point, r: &Rat, x: &Point) -> Result<Point> {
    if r.is_negative() {
        return Err(Error::domain("radial projection needs R >= 0"));
    }
    let d = model.distance(b, x)?;
    if matches!(d.le(r), crate::scalar::Trilean::True) {
        return Ok(x.clone());
    }
    let p = model.path(b, x)?;
    eval_path(model, &p, r)
}

/// Parameter pack for the comparison-gap estimate. `window` bounds the time
/// offset, `lead` is the flow lead time, `spread` bounds d(x1, x2), and
/// `slack` is the extra reach beyond the derived radius.
#[derive(Debug, Clone)]
pub struct ComparisonConfig {
    pub window: Rat,
    pub lead: Rat,
    pub spread: Rat,
    pub slack: Rat,
}

impl ComparisonConfig {
    pub fn new(window: Rat, lead: Rat, spread: Rat, slack: Rat) -> Result<Self> {
        if lead <= spread {
            return Err(Error::domain("comparison config needs lead > spread"));
        }
        if window.is_negative() || spread.is_negative() || slack.is_negative() {
            return Err(Error::domain("comparison config needs nonnegative radii"));
        }
        Ok(ComparisonConfig {
            window,
            lead,
            spread,
            slack,
        })
    }

    /// T = window + lead.
    pub fn flow_time(&self) -> Rat {
        &self.window + &self.lead
    }

    /// R = lead + 2 window + spread.
    pub fn reach(&self) -> Rat {
        &self.lead + Rat::from_integer(2.into()) * &self.window + &self.spread
    }

    /// 2 spread (slack + 2 window + 2 spread) / lead.
    pub fn gap_bound(&self) -> Rat {
        let two = Rat::from_integer(2.into());
        &two * &self.spread * (&self.slack + &two * &self.window + &two * &self.spread)
            / &self.lead
    }
}

/// d(c1(T + tau + t), c2(T + t)) for the geodesics c1 = [x1, x], c2 =
/// [x2, x] and tau = d(x, x1) - d(x, x2); the comparison estimate bounds
/// this by `cfg.gap_bound()` whenever the preconditions hold.
pub fn comparison_gap(
    model: &dyn Model,
    cfg: &ComparisonConfig,
    x: &Point,
    x1: &Point,
    x2: &Point,
    t: &Rat,
) -> Result<Scalar> {
    if t.abs() > cfg.window {
        return Err(Error::domain("comparison time outside the window"));
    }
    let d12 = model.distance(x1, x2)?;
    if !matches!(d12.le(&cfg.spread), crate::scalar::Trilean::True) {
        return Err(Error::domain("comparison points are further than spread"));
    }
    let reach_plus = cfg.reach() + cfg.slack.clone();
    let d1x = model.distance(x1, x)?;
    if matches!(d1x.le(&reach_plus), crate::scalar::Trilean::False) {
        return Err(Error::domain("x beyond comparison reach"));
    }
    let dx1 = model.distance(x, x1)?;
    let dx2 = model.distance(x, x2)?;
    let tau = dx1.sub(&dx2);
    let t_scalar = Scalar::Exact(&cfg.flow_time() + t);
    let s1 = t_scalar.add(&tau);
    let s2 = t_scalar;
    let c1 = model.path(x1, x)?;
    let c2 = model.path(x2, x)?;
    // Evaluation times can be enclosures on Euclidean models; evaluate at
    // the midpoint representative and widen by the 1-Lipschitz defect.
    let p1 = eval_path_scalar(model, &c1, &s1)?;
    let p2 = eval_path_scalar(model, &c2, &s2)?;
    model.distance(&p1, &p2)
}

/// Path evaluation at a scalar time: exact when the time is exact, else the
/// midpoint evaluation widened by the enclosure radius (paths are
/// 1-Lipschitz, so the defect bounds the position error).
fn eval_path_scalar(model: &dyn Model, p: &Path, s: &Scalar) -> Result<Point> {
    match s {
        Scalar::Exact(r) => eval_path(model, p, r),
        Scalar::Enclosed(iv) => {
            let mid = iv.mid_rat();
            let pt = eval_path(model, p, &mid)?;
            match pt {
                Point::Euclidean(cs) => {
                    let rad = crate::interval::Interval::new(-iv.width() / 2.0, iv.width() / 2.0);
                    Ok(Point::Euclidean(
                        cs.into_iter()
                            .map(|c| Scalar::Enclosed(c.interval().add(&rad)))
                            .collect(),
                    ))
                }
                other => Ok(other),
            }
        }
    }
}

/// Scenario description of a model, as read from config files.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelConfig {
    Euclidean {
        dimension: usize,
    },
    Tree {
        /// Edges as (vertex, vertex, rational weight) triples.
        edges: Vec<(String, String, String)>,
    },
    Cayley {
        rank: u8,
        #[serde(default = "default_cayley_depth")]
        depth: u32,
    },
    BruhatTits {
        prime: u32,
        depth: u32,
        precision: Option<u32>,
    },
    Circle {
        circumference: String,
        rotation: String,
    },
}

fn default_cayley_depth() -> u32 {
    64
}

impl ModelConfig {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ModelConfig::Euclidean { .. } => "euclidean",
            ModelConfig::Tree { .. } => "tree",
            ModelConfig::Cayley { .. } => "cayley",
            ModelConfig::BruhatTits { .. } => "bruhat-tits",
            ModelConfig::Circle { .. } => "circle",
        }
    }
}

type Builder = fn(&ModelConfig) -> Result<ModelHandle>;

/// Name-keyed strategy registry for model constructors.
pub struct Registry {
    builders: BTreeMap<&'static str, Builder>,
}

impl Registry {
    pub fn new() -> Self {
        Registry {
            builders: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &'static str, b: Builder) {
        self.builders.insert(name, b);
    }

    pub fn builtin() -> Self {
        let mut r = Registry::new();
        r.register("euclidean", euclidean::build);
        r.register("tree", config_tree::build);
        r.register("cayley", cayley::build);
        r.register("bruhat-tits", bruhat_tits::build);
        r.register("circle", circle::build);
        r
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.builders.keys().copied().collect()
    }

    pub fn build(&self, cfg: &ModelConfig) -> Result<ModelHandle> {
        let name = cfg.kind_name();
        let b = self
            .builders
            .get(name)
            .ok_or_else(|| Error::config(format!("unknown model kind {name:?}")))?;
        b(cfg)
    }
}

impl Default for Registry {
    fn default() -> Self {
        Registry::builtin()
    }
}

pub(crate) fn parse_weight(s: &str) -> Result<Rat> {
    let w = parse_rat(s)?;
    if w <= Rat::zero() {
        return Err(Error::config(format!("edge weight {s:?} must be positive")));
    }
    Ok(w)
}
