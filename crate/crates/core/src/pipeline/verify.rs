//! End-to-end assembly and verification: derive the parameter chain from a
//! compact set and target bounds, build the cover/partition/section
//! machinery over a fundamental-domain sample, compose the two maps, and
//! check the three conclusions (approximate equivariance, radial
//! stability, coarse continuity) plus the discrete-image bound, tallying
//! pass / fail / inconclusive / skipped without ever counting an undecided
//! check as a pass.

use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cover::bump::partition;
use crate::cover::cover::{build_long_cover, color_cover, verify_coloring};
use crate::cover::sample::{canon_key, FlowSample, SampleBuilder};
use crate::error::{Error, Result};
use crate::flow::fol::fol_fs_min;
use crate::flow::geodesic::Geodesic;
use crate::flow::period::PeriodBudget;
use crate::group::{fol_v_check, FolVBound, FolVOutcome, GroupElement, SearchBudget};
use crate::join::{
    act_join, discrete_distance, discrete_projection, fol_j_check, FolJBound, JoinFamily,
    JoinPoint, JoinVerdict,
};
use crate::model::{radial_projection, Model, Point};
use crate::pipeline::f1::JoinMap;
use crate::pipeline::params::{choose_delta_cutoff, choose_flow_params, FlowParams};
use crate::pipeline::sections::{build_section, section_value, Section, SectionValue};
use crate::rat::{rat, rat_int, rat_to_f64, rat_to_string, Rat};

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// Radius of the d_G ball standing in for the compact set M.
    pub m_beta: Rat,
    pub eps: Rat,
    pub eta: Rat,
    pub slack_l: Rat,
    pub x_count: usize,
    /// Sampling radius in the space (kept within the depth budget).
    pub x_radius: i64,
    pub seed: u64,
    pub dt: Rat,
    pub lambda: Rat,
    pub precision: u32,
    pub cyclic_range: i64,
    /// Period threshold: short-period bases keep their translation group.
    pub ell: Rat,
    pub t_max: Rat,
    pub quad_tol: Rat,
    pub schedule_len: usize,
    pub rprime_offsets: Vec<Rat>,
    /// Axis seeds (parsed per model) added to the fundamental sample.
    pub axis_seeds: Vec<String>,
    pub check_discrete: bool,
    /// Cap on glue-composition triples (they are expensive).
    pub glue_cap: usize,
}

impl PipelineConfig {
    pub fn new(eps: Rat, eta: Rat, slack_l: Rat) -> PipelineConfig {
        PipelineConfig {
            m_beta: rat(3, 2),
            eps,
            eta,
            slack_l,
            x_count: 100,
            x_radius: 6,
            seed: 7,
            dt: rat_int(1),
            lambda: rat_int(1),
            precision: 2,
            cyclic_range: 16,
            ell: rat_int(3),
            t_max: rat_int(3),
            quad_tol: rat(1, 100_000),
            schedule_len: 6,
            rprime_offsets: vec![Rat::zero(), rat(1, 2), rat_int(2)],
            axis_seeds: vec![],
            check_discrete: true,
            glue_cap: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
    Skipped,
}

#[derive(Debug, Clone)]
pub struct CheckRecord {
    pub id: String,
    pub tag: String,
    pub verdict: Verdict,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct VerifierReport {
    pub constants: Vec<(String, String)>,
    pub records: Vec<CheckRecord>,
}

impl VerifierReport {
    pub fn count(&self, v: &Verdict) -> usize {
        self.records.iter().filter(|r| r.verdict == *v).count()
    }

    pub fn push(&mut self, id: String, tag: &str, verdict: Verdict, detail: String) {
        self.records.push(CheckRecord {
            id,
            tag: tag.to_string(),
            verdict,
            detail,
        });
    }

    pub fn echo(&mut self, key: &str, value: String) {
        self.constants.push((key.to_string(), value));
    }

    /// 0 = all pass, 1 = failures, 2 = inconclusive above the threshold.
    pub fn exit_code(&self, inconclusive_tolerance: f64) -> i32 {
        if self.count(&Verdict::Fail) > 0 {
            return 1;
        }
        let total = self.records.len().max(1);
        let inc = self.count(&Verdict::Inconclusive);
        if (inc as f64) / (total as f64) > inconclusive_tolerance {
            return 2;
        }
        0
    }
}

pub struct Pipeline {
    pub sample: FlowSample,
    pub join_map: JoinMap,
    pub m_set: Vec<GroupElement>,
    pub alpha: Rat,
    pub beta: Rat,
    pub eta0: Rat,
    pub delta: Rat,
    pub cutoff: Rat,
    pub flow: FlowParams,
    pub rho: Option<Rat>,
}

/// The base-to-point map into the flow space at lead time T.
pub fn f0(model: &dyn Model, big_t: &Rat, x: &Point) -> Result<Geodesic> {
    let c = Geodesic::between(model, &model.base_point(), x)?;
    Ok(c.flow(big_t))
}

/// Random point in the model at combinatorial radius `radius`.
pub fn sample_point(model: &dyn Model, rng: &mut ChaCha8Rng, radius: i64) -> Result<Point> {
    let base = model.base_point();
    match &base {
        Point::Vertex(_) => {
            let mut v = match base {
                Point::Vertex(v) => v,
                _ => unreachable!(),
            };
            let steps = rng.gen_range(0..=radius.max(0)) as usize;
            let mut prev: Option<crate::model::VertexId> = None;
            for _ in 0..steps {
                let mut ns = model.neighbors(&v)?;
                if let Some(p) = &prev {
                    ns.retain(|w| w != p);
                }
                if ns.is_empty() {
                    break;
                }
                let next = ns[rng.gen_range(0..ns.len())].clone();
                prev = Some(v);
                v = next;
            }
            Ok(Point::Vertex(v))
        }
        Point::Euclidean(cs) => {
            let dim = cs.len();
            let mut coords = Vec::with_capacity(dim);
            for _ in 0..dim {
                let num = rng.gen_range(-(radius * 8)..=(radius * 8));
                coords.push(rat(num, 8));
            }
            Ok(Point::euclidean_exact(coords))
        }
        Point::Circle(_) => {
            let num = rng.gen_range(0..(radius.max(1) * 8));
            Ok(Point::Circle(rat(num, 8)))
        }
        _ => Err(Error::domain("unsupported base point for sampling")),
    }
}

fn grid_ceil(x: &Rat, step: &Rat) -> Rat {
    let q = (x / step).ceil();
    q * step
}

/// Certified alpha: an upper bound for max over M of d(b, g b).
fn derive_alpha(model: &dyn Model, m_set: &[GroupElement]) -> Result<Rat> {
    let b = model.base_point();
    let mut best = rat(1, 4);
    for g in m_set {
        let gb = match model.act_point(g, &b) {
            Ok(p) => p,
            Err(Error::Budget(_)) | Err(Error::Precision(_)) => continue,
            Err(e) => return Err(e),
        };
        let d = model.distance(&b, &gb)?.interval().hi;
        let r = Rat::from_float(d).unwrap_or_else(|| rat_int(1));
        if r > best {
            best = r;
        }
    }
    Ok(grid_ceil(&best, &rat(1, 32)))
}

/// Discovered beta: elements moving a section base by less than 3 alpha in
/// the flow metric stay within d_G-distance beta of the identity.
fn derive_beta(
    model: &dyn Model,
    bases: &[Geodesic],
    alpha: &Rat,
    precision: u32,
    quad_tol: &Rat,
) -> Result<Rat> {
    let three_alpha = rat_int(3) * alpha;
    let probe_radius = &three_alpha + rat_int(3);
    let ball = model.ball(&probe_radius, precision)?;
    let mut best = rat_int(1);
    for c0 in bases {
        let c0_at_zero = c0.evaluate(model, &Rat::zero())?;
        for g in &ball {
            // Cheap anchor filter before any quadrature.
            let ga = match model.act_point(g, &c0_at_zero) {
                Ok(p) => p,
                Err(Error::Budget(_)) | Err(Error::Precision(_)) => continue,
                Err(e) => return Err(e),
            };
            let d0 = model.distance(&ga, &c0_at_zero)?.interval();
            let lower = d0.lo - 2.0 + 2.0 * (-d0.lo / 2.0).exp();
            if lower >= rat_to_f64(&three_alpha) {
                continue;
            }
            let gc = match c0.act(model, g) {
                Ok(c) => c,
                Err(Error::Budget(_)) | Err(Error::Precision(_)) => continue,
                Err(e) => return Err(e),
            };
            let d = crate::flow::quad::dist_fs(model, &gc, c0, quad_tol)?;
            if d.interval().lo < rat_to_f64(&three_alpha) {
                let dg = model.dg_origin(g)?.interval().hi;
                let r = Rat::from_float(dg).unwrap_or_else(Rat::zero);
                if r >= best {
                    best = grid_ceil(&(r + rat_int(1)), &rat(1, 4));
                }
            }
        }
    }
    Ok(best)
}

pub struct Assembly {
    pub pipeline: Pipeline,
    pub report: VerifierReport,
    pub x_points: Vec<Point>,
}

pub fn assemble(model: &dyn Model, cfg: &PipelineConfig) -> Result<Assembly> {
    let mut report = VerifierReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let m_set = model.ball(&cfg.m_beta, cfg.precision)?;
    report.echo("m_size", m_set.len().to_string());
    let alpha = derive_alpha(model, &m_set)?;
    report.echo("alpha", rat_to_string(&alpha));

    // Sample of the space.
    let mut x_points = Vec::with_capacity(cfg.x_count);
    for _ in 0..cfg.x_count {
        x_points.push(sample_point(model, &mut rng, cfg.x_radius)?);
    }

    // Fundamental-domain seeds: constants through the sampled region plus
    // configured axes.
    let mut seeds: Vec<Geodesic> = vec![Geodesic::constant(model.base_point())];
    for x in x_points.iter().take(24) {
        seeds.push(Geodesic::constant(x.clone()));
    }
    for s in &cfg.axis_seeds {
        let g = model.parse_elem(s)?;
        match Geodesic::axis(model, &g) {
            Ok(a) => seeds.push(a),
            Err(Error::Degenerate(_)) => {}
            Err(e) => return Err(e),
        }
    }

    // Longness scale: iterate until the partition's observed support count
    // certifies the variation target (2 n + 3) alpha / alpha_hat < eps / 2.
    let mut n_guess: usize = 1;
    let mut tries = 0;
    let (sample, colored, part, alpha_hat) = loop {
        tries += 1;
        if tries > 4 {
            return Err(Error::budget("longness scale failed to stabilize"));
        }
        let target = &cfg.eps / rat_int(2);
        let alpha_hat = grid_ceil(
            &(rat_int(2 * n_guess as i64 + 3) * &alpha / &target),
            &rat_int(1),
        ) + rat_int(1);
        let half_width = {
            use num_traits::ToPrimitive;
            (&alpha_hat / &cfg.dt).ceil().to_integer().to_i64().unwrap() + 1
        };
        let mut builder = SampleBuilder::new(cfg.dt.clone(), half_width, cfg.lambda.clone());
        builder.precision = cfg.precision;
        builder.quad_tol = cfg.quad_tol.clone();
        let sample = builder.build(model, &seeds)?;
        let cover = build_long_cover(&sample, &alpha_hat)?;
        let colored = color_cover(&sample, &cover, 8)?;
        verify_coloring(&colored, &cover)?;
        if !colored.is_long(&sample, &alpha)? {
            return Err(Error::degenerate(
                "colored cover lost longness at the base scale",
            ));
        }
        let part = partition(&sample, &colored, &alpha_hat)?;
        let bound = rat_int(2 * part.n_obs as i64 + 3) * &alpha / &alpha_hat;
        if bound < &cfg.eps / rat_int(2) {
            break (sample, colored, part, alpha_hat);
        }
        n_guess = part.n_obs.max(n_guess + 1);
    };
    report.echo("sample_size", sample.len().to_string());
    report.echo("alpha_hat", rat_to_string(&alpha_hat));
    report.echo("cover_sets", colored.sets.len().to_string());
    report.echo("observed_dim", colored.observed_dim.to_string());
    report.echo("partition_n_obs", part.n_obs.to_string());

    // Sections per colored set, based at the set centers.
    let period_budget = PeriodBudget {
        precision: cfg.precision,
        eq_horizon: 10,
    };
    let mut sections = Vec::with_capacity(colored.sets.len());
    for (u, set) in colored.sets.iter().enumerate() {
        let base = match &sample.points[set.center] {
            crate::cover::sample::SamplePoint::Geo(g) => g.clone(),
            crate::cover::sample::SamplePoint::Circ(_) => {
                return Err(Error::domain("pipeline needs geodesic samples"))
            }
        };
        let sec = build_section(
            model,
            base,
            format!("V{u}"),
            &alpha,
            &cfg.ell,
            &cfg.t_max,
            &period_budget,
        )?;
        report.echo(
            &format!("section_{u}"),
            format!(
                "label={} period={} cyclic={}",
                sec.label,
                sec.period
                    .tau
                    .as_ref()
                    .map(rat_to_string)
                    .unwrap_or_else(|| "inf".into()),
                sec.subgroup.cyclic_generator.is_some()
            ),
        );
        sections.push(sec);
    }
    let beta = derive_beta(
        model,
        &sections.iter().map(|s| s.base.clone()).collect::<Vec<_>>(),
        &alpha,
        cfg.precision,
        &cfg.quad_tol,
    )?;
    report.echo("beta", rat_to_string(&beta));
    let eta0 = {
        let half_beta = &beta / rat_int(2);
        let d = crate::group::fol_v_triangle_delta(model, &cfg.eta, &half_beta)?;
        d.min(cfg.eta.clone())
    };
    report.echo("eta0", rat_to_string(&eta0));

    let family = JoinFamily::new(sections.iter().map(|s| s.subgroup.clone()).collect())?;
    let n_colors = colored
        .sets
        .iter()
        .filter_map(|s| s.color)
        .max()
        .unwrap_or(0)
        + 1;
    report.echo("n_colors", n_colors.to_string());

    let mut join_map = JoinMap {
        cover: colored,
        partition: part,
        sections,
        family,
        n_colors,
        precision: cfg.precision,
        quad_tol: cfg.quad_tol.clone(),
        key_window: rat_int(8),
    };

    // Section calibration down the geometric schedule.
    let search = SearchBudget {
        cyclic_range: cfg.cyclic_range,
        precision: cfg.precision,
    };
    let vb = FolVBound::new(beta.clone(), eta0.clone())?;
    for u in 0..join_map.sections.len() {
        let mut ok = false;
        for _ in 0..cfg.schedule_len {
            match calibrate_section(model, &sample, &join_map, u, &m_set, &vb, &search, cfg)? {
                None => {
                    ok = true;
                    break;
                }
                Some(fail) => {
                    report.push(
                        format!("section-{u}-shrink"),
                        "section-consistency",
                        Verdict::Inconclusive,
                        format!("shrinking delta after: {fail}"),
                    );
                    let d = &join_map.sections[u].delta / rat_int(2);
                    join_map.sections[u].delta = d;
                }
            }
        }
        let sec = &join_map.sections[u];
        report.push(
            format!("section-{u}"),
            "section-consistency",
            if ok { Verdict::Pass } else { Verdict::Inconclusive },
            format!("delta = {}", rat_to_string(&sec.delta)),
        );
    }

    let delta = join_map
        .sections
        .iter()
        .map(|s| s.delta.clone())
        .min()
        .unwrap_or_else(|| rat(1, 2));
    report.echo("delta", rat_to_string(&delta));
    let cutoff = choose_delta_cutoff(&delta)?;
    report.echo("cutoff", rat_to_string(&cutoff));
    let flow = choose_flow_params(&alpha, &cutoff, &cfg.slack_l, &delta)?;
    report.echo("window", rat_to_string(&flow.window));
    report.echo("lead", rat_to_string(&flow.lead));
    report.echo("R", rat_to_string(&flow.big_r));
    report.echo("T", rat_to_string(&flow.big_t));

    let pipeline = Pipeline {
        sample,
        join_map,
        m_set,
        alpha,
        beta,
        eta0,
        delta,
        cutoff,
        flow,
        rho: None,
    };
    Ok(Assembly {
        pipeline,
        report,
        x_points,
    })
}

/// One calibration pass over a section: foliated-closeness propagation on
/// flow shifts and matrix-close pairs, and equivariance against the compact
/// set. Returns the first failure description, if any.
#[allow(clippy::too_many_arguments)]
fn calibrate_section(
    model: &dyn Model,
    sample: &FlowSample,
    jm: &JoinMap,
    u: usize,
    m_set: &[GroupElement],
    vb: &FolVBound,
    search: &SearchBudget,
    cfg: &PipelineConfig,
) -> Result<Option<String>> {
    let sec = &jm.sections[u];
    let members = &jm.cover.sets[u].members;
    let probe_members: Vec<usize> = members.iter().copied().take(6).collect();
    for &z in &probe_members {
        let cz = match &sample.points[z] {
            crate::cover::sample::SamplePoint::Geo(g) => g.clone(),
            _ => continue,
        };
        let hz = match section_value(model, sec, &cz, cfg.precision, &cfg.quad_tol)? {
            SectionValue::Found { elem, .. } => elem,
            SectionValue::Missing { reason } => {
                return Ok(Some(format!("no section value at member {z}: {reason}")))
            }
        };
        // Flow pairs: fol(c, flow_t c) < (alpha, delta) holds trivially.
        for k in sample.grid_range(&sec.alpha) {
            if k == 0 {
                continue;
            }
            let shifted = cz.flow(&(Rat::from_integer(k.into()) * &sample.dt));
            let hs = match section_value(model, sec, &shifted, cfg.precision, &cfg.quad_tol)? {
                SectionValue::Found { elem, .. } => elem,
                SectionValue::Missing { .. } => continue,
            };
            match fol_v_check(model, &sec.subgroup, &hz, &hs, vb, search)? {
                FolVOutcome::Witness { .. } => {}
                _ => {
                    return Ok(Some(format!(
                        "flow pair (z={z}, k={k}) breaks the section bound"
                    )))
                }
            }
        }
        // Equivariance pairs.
        for g in m_set.iter().take(6) {
            let gc = match cz.act(model, g) {
                Ok(c) => c,
                Err(Error::Budget(_)) | Err(Error::Precision(_)) => continue,
                Err(e) => return Err(e),
            };
            let hg = match section_value(model, sec, &gc, cfg.precision, &cfg.quad_tol)? {
                SectionValue::Found { elem, .. } => elem,
                SectionValue::Missing { .. } => continue,
            };
            let ghz = model.mul(g, &hz)?;
            match fol_v_check(model, &sec.subgroup, &hg, &ghz, vb, search)? {
                FolVOutcome::Witness { .. } => {}
                _ => {
                    return Ok(Some(format!(
                        "equivariance pair (z={z}, g={}) breaks the section bound",
                        g.display()
                    )))
                }
            }
        }
    }
    Ok(None)
}

/// Runs the full verifier: assembles the pipeline and checks the three
/// conclusions on the sample, plus the discrete-image distance when the
/// group is discrete.
pub fn verify_main(model: &dyn Model, cfg: &PipelineConfig) -> Result<(Pipeline, VerifierReport)> {
    let Assembly {
        mut pipeline,
        mut report,
        x_points,
    } = assemble(model, cfg)?;
    let bound = FolJBound::new(
        pipeline.beta.clone(),
        cfg.eta.clone(),
        cfg.eps.clone(),
    )?;
    let half_bound = FolJBound::new(
        &pipeline.beta / rat_int(2),
        pipeline.eta0.clone(),
        &cfg.eps / rat_int(2),
    )?;
    let search = SearchBudget {
        cyclic_range: cfg.cyclic_range,
        precision: cfg.precision,
    };
    let b = model.base_point();
    let jm = &pipeline.join_map;
    let sample = &pipeline.sample;

    // Image cache: f = f1 after f0.
    let mut apply_f = |x: &Point,
                       report: &mut VerifierReport,
                       id: &str|
     -> Result<Option<JoinPoint>> {
        let c = f0(model, &pipeline.flow.big_t, x)?;
        match jm.apply(model, sample, &c) {
            Ok(out) => {
                for issue in out.issues {
                    report.push(
                        format!("{id}-issue"),
                        "section-consistency",
                        Verdict::Inconclusive,
                        issue,
                    );
                }
                Ok(Some(out.point))
            }
            Err(Error::Budget(m)) | Err(Error::Precision(m)) => {
                report.push(
                    id.to_string(),
                    "join-map",
                    Verdict::Inconclusive,
                    format!("budget: {m}"),
                );
                Ok(None)
            }
            Err(e) => Err(e),
        }
    };

    let discrete_ok = cfg.check_discrete
        && !matches!(model.identity(), GroupElement::Matrix(_))
        && cfg.eta < rat_int(1);

    // Conclusion 1: approximate equivariance over the compact set.
    let mut glue_done = 0usize;
    for (xi, x) in x_points.iter().enumerate() {
        let fx = match apply_f(x, &mut report, &format!("f-at-x{xi}"))? {
            Some(p) => p,
            None => continue,
        };
        for (gi, g) in pipeline.m_set.iter().enumerate() {
            let id = format!("equivariance-x{xi}-g{gi}");
            let gx = match model.act_point(g, x) {
                Ok(p) => p,
                Err(Error::Budget(_)) | Err(Error::Precision(_)) => {
                    report.push(id, "join-equivariance", Verdict::Skipped,
                        "translate leaves the depth budget".into());
                    continue;
                }
                Err(e) => return Err(e),
            };
            let fgx = match apply_f(&gx, &mut report, &id)? {
                Some(p) => p,
                None => continue,
            };
            let gfx = act_join(model, g, &fx)?;
            let rep = fol_j_check(model, &jm.family, &fgx, &gfx, &bound, &search)?;
            let verdict = match rep.verdict {
                JoinVerdict::Holds => Verdict::Pass,
                JoinVerdict::Fails => Verdict::Fail,
                JoinVerdict::Inconclusive => Verdict::Inconclusive,
            };
            let detail = rep.failure.clone().unwrap_or_default();
            report.push(id.clone(), "join-equivariance", verdict, detail);
            if discrete_ok {
                let p1 = discrete_projection(model, &jm.family, &fgx, cfg.cyclic_range)?;
                let p2 = discrete_projection(model, &jm.family, &gfx, cfg.cyclic_range)?;
                let d = discrete_distance(&p1, &p2);
                report.push(
                    format!("{id}-discrete"),
                    "discrete-image",
                    if d < cfg.eps { Verdict::Pass } else { Verdict::Fail },
                    format!("d_E = {}", rat_to_string(&d)),
                );
            }
            // Glue composition on a few triples: both halves at
            // (beta/2, eta0, eps/2) must imply the full bound.
            if glue_done < cfg.glue_cap {
                glue_done += 1;
                let c_mid = f0(model, &pipeline.flow.big_t, x)?
                    .act(model, g)?;
                if let Ok(mid_out) = jm.apply(model, sample, &c_mid) {
                    let h1 =
                        fol_j_check(model, &jm.family, &fgx, &mid_out.point, &half_bound, &search)?;
                    let h2 = fol_j_check(
                        model,
                        &jm.family,
                        &mid_out.point,
                        &gfx,
                        &half_bound,
                        &search,
                    )?;
                    let whole = fol_j_check(model, &jm.family, &fgx, &gfx, &bound, &search)?;
                    let implied = !(h1.verdict == JoinVerdict::Holds
                        && h2.verdict == JoinVerdict::Holds)
                        || whole.verdict == JoinVerdict::Holds;
                    report.push(
                        format!("glue-x{xi}-g{gi}"),
                        "glue-composition",
                        if implied { Verdict::Pass } else { Verdict::Fail },
                        format!("halves=({:?},{:?})", h1.verdict, h2.verdict),
                    );
                }
            }
        }
    }

    // Conclusion 2: radial stability for R' at and beyond R.
    for (xi, x) in x_points.iter().enumerate() {
        let fx = match apply_f(x, &mut report, &format!("f2-at-x{xi}"))? {
            Some(p) => p,
            None => continue,
        };
        for (oi, off) in cfg.rprime_offsets.iter().enumerate() {
            let rp = &pipeline.flow.big_r + off;
            let px = radial_projection(model, &b, &rp, x)?;
            let id = format!("radial-x{xi}-o{oi}");
            let fpx = match apply_f(&px, &mut report, &id)? {
                Some(p) => p,
                None => continue,
            };
            let rep = fol_j_check(model, &jm.family, &fx, &fpx, &bound, &search)?;
            let verdict = match rep.verdict {
                JoinVerdict::Holds => Verdict::Pass,
                JoinVerdict::Fails => Verdict::Fail,
                JoinVerdict::Inconclusive => Verdict::Inconclusive,
            };
            report.push(id.clone(), "radial-stability", verdict, String::new());
            if discrete_ok {
                let p1 = discrete_projection(model, &jm.family, &fx, cfg.cyclic_range)?;
                let p2 = discrete_projection(model, &jm.family, &fpx, cfg.cyclic_range)?;
                let d = discrete_distance(&p1, &p2);
                report.push(
                    format!("{id}-discrete"),
                    "discrete-image",
                    if d < cfg.eps { Verdict::Pass } else { Verdict::Fail },
                    format!("d_E = {}", rat_to_string(&d)),
                );
            }
        }
    }

    // Conclusion 3: coarse continuity; the modulus rho is discovered from
    // the sampled pairs.
    let mut close_pairs: Vec<(usize, usize, Rat)> = Vec::new();
    for i in 0..x_points.len().min(40) {
        for j in (i + 1)..x_points.len().min(40) {
            let d = model.distance(&x_points[i], &x_points[j])?;
            let hi = Rat::from_float(d.interval().hi).unwrap_or_else(|| rat_int(1));
            close_pairs.push((i, j, hi));
        }
    }
    close_pairs.sort_by(|a, b| a.2.cmp(&b.2));
    let mut rho: Option<Rat> = None;
    for (i, j, dx) in close_pairs.iter().take(30) {
        let ci = f0(model, &pipeline.flow.big_t, &x_points[*i])?;
        let cj = f0(model, &pipeline.flow.big_t, &x_points[*j])?;
        let d = crate::flow::quad::dist_fs(model, &ci, &cj, &cfg.quad_tol)?;
        if d.interval().hi < rat_to_f64(&pipeline.delta) {
            rho = Some(dx.clone());
        } else {
            break;
        }
    }
    if let Some(r) = &rho {
        report.echo("rho", rat_to_string(r));
        for (i, j, dx) in close_pairs.iter().filter(|(_, _, d)| d <= r).take(20) {
            let id = format!("continuity-x{i}-x{j}");
            let fi = match apply_f(&x_points[*i], &mut report, &id)? {
                Some(p) => p,
                None => continue,
            };
            let fj = match apply_f(&x_points[*j], &mut report, &id)? {
                Some(p) => p,
                None => continue,
            };
            let rep = fol_j_check(model, &jm.family, &fi, &fj, &bound, &search)?;
            let verdict = match rep.verdict {
                JoinVerdict::Holds => Verdict::Pass,
                JoinVerdict::Fails => Verdict::Fail,
                JoinVerdict::Inconclusive => Verdict::Inconclusive,
            };
            report.push(
                id,
                "coarse-continuity",
                verdict,
                format!("d_X = {}", rat_to_string(dx)),
            );
        }
    } else {
        report.push(
            "continuity-modulus".into(),
            "coarse-continuity",
            Verdict::Inconclusive,
            "no sampled pair fell below the flow modulus".into(),
        );
    }
    pipeline.rho = rho;
    Ok((pipeline, report))
}
