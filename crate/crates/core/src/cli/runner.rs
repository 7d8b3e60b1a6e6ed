//! Resolution of a configuration into jobs, execution and artifact output.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use num_traits::One;

use super::config::{
    ConfigError, Diagnostic, ExperimentConfig, FiltrationSpec, Generator, GeneratorKind, ProcessSpec, RunConfig,
    DEFAULT_HORIZON, DEFAULT_PROFILE_TOLERANCE, DEFAULT_SEED,
};
use super::fixtures;
use crate::convergence::{
    fatou_check, order_cauchy_profile, ConvergenceProfile, order_profile, un_profile, uo_cauchy_profile, uo_profile, SequenceFamily,
};
use crate::error::{Error, Result};
use crate::filtration::{
    chain_to_filtration_in, double_condition_diagnostics, exact_tower, operator_norm, validate_filtration,
    Filtration, PartitionChain, Projection, ProjectionKind,
};
use crate::gallery;
use crate::lattice::{is_weak_unit, Element, LatticeModel};
use crate::martingale::urn::{urn_experiment, MAX_DEPTH};
use crate::martingale::{
    bochner_experiment, bochner_filtration, closed_martingale, closed_martingale_experiment, doob_experiment,
    exact_martingale, kb_vs_c0_experiment, positive_part_convergence, verify_process, write_summary_csv,
    ExperimentReport, FiberSpec, KindClaim, ProcessTrace,
};
use crate::matrix::Matrix;
use crate::par::Strategy;
use crate::random;
use crate::representation::{contractive_extension_check, default_probes, ALView};
use crate::suites::indicator_like;

/// Largest dimension for exact rational checks and fixed-point programs.
const EXACT_LIMIT: usize = 64;

/// Command-line values, which take precedence over the configuration.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub horizon: Option<usize>,
}

pub struct Plan {
    pub jobs: Vec<Job>,
    pub out: Option<PathBuf>,
}

pub struct Job {
    pub name: String,
    path: String,
    task: Task,
    diagnostics: Vec<Diagnostic>,
    profile_tolerance: f64,
    seed: u64,
    pub expect: BTreeMap<String, bool>,
}

enum Task {
    Filtered(Box<Filtered>),
    Urn(u32),
    KbVsC0(usize),
    Sequence { family: SequenceFamily, limit: Option<Element>, unit: Element, battery: Option<Vec<Element>> },
    Bochner { chain: PartitionChain<f64>, fiber: FiberSpec, x: Element },
    Projection { projection: Projection, model: LatticeModel },
}

struct Filtered {
    filtration: Filtration,
    view: Option<ALView>,
    exact: Option<ExactStages>,
    trace: Option<ProcessTrace>,
    exact_values: Option<Vec<Vec<BigRational>>>,
    /// Generator of a closed martingale, or the closing vector of an explicit trace.
    x: Option<Element>,
}

struct ExactStages {
    stages: Vec<Matrix<BigRational>>,
    mu: Option<Vec<BigRational>>,
}

fn err(path: &str, message: impl std::fmt::Display) -> ConfigError {
    ConfigError::new(path, message)
}

fn positive(path: &str, v: Option<f64>) -> std::result::Result<Option<f64>, ConfigError> {
    match v {
        Some(t) if !(t > 0.0 && t.is_finite()) => Err(err(path, format!("tolerance {t} must be positive and finite"))),
        v => Ok(v),
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.')) && name != "."
        && name != ".."
}

/// Checks references and invariants and builds every experiment.
pub fn resolve(config: RunConfig, overrides: Overrides) -> std::result::Result<Plan, ConfigError> {
    let global_tolerance = positive("tolerance", config.tolerance)?;
    if config.experiments.is_empty() {
        return Err(err("experiments", "no experiments configured"));
    }
    let mut names = BTreeMap::new();
    let mut jobs = Vec::new();
    for (i, exp) in config.experiments.into_iter().enumerate() {
        let path = format!("experiments[{i}]");
        if !valid_name(&exp.name) {
            return Err(err(&format!("{path}.name"), format!("{:?} is not a valid file name", exp.name)));
        }
        if let Some(first) = names.insert(exp.name.clone(), i) {
            return Err(err(&format!("{path}.name"), format!("duplicate of experiments[{first}]")));
        }
        let ctx = Context {
            path,
            index: i,
            tolerance_override: overrides.tolerance,
            tolerance: global_tolerance,
            horizon: overrides.horizon.or(config.horizon),
            horizon_override: overrides.horizon,
            seed: overrides.seed.or(config.seed).unwrap_or(DEFAULT_SEED),
        };
        jobs.push(resolve_experiment(exp, &ctx)?);
    }
    Ok(Plan { jobs, out: config.out })
}

struct Context {
    path: String,
    index: usize,
    tolerance_override: Option<f64>,
    tolerance: Option<f64>,
    horizon: Option<usize>,
    horizon_override: Option<usize>,
    seed: u64,
}

fn merge_fixture(exp: ExperimentConfig, path: &str) -> std::result::Result<ExperimentConfig, ConfigError> {
    let ProcessSpec::Fixture(name) = &exp.process else { return Ok(exp) };
    let fixture = fixtures::load(name).map_err(|e| err(&format!("{path}.process.fixture"), e))?;
    if exp.model.is_some() || exp.filtration.is_some() || exp.al_view.is_some() {
        return Err(err(path, "a fixture supplies its own model, filtration and al_view"));
    }
    let mut merged = fixture.experiment;
    if matches!(merged.process, ProcessSpec::Fixture(_)) {
        return Err(err(&format!("{path}.process.fixture"), "fixtures cannot refer to fixtures"));
    }
    merged.name = exp.name;
    merged.diagnostics = exp.diagnostics.or(merged.diagnostics);
    merged.tolerance = exp.tolerance.or(merged.tolerance);
    merged.profile_tolerance = exp.profile_tolerance.or(merged.profile_tolerance);
    merged.horizon = exp.horizon.or(merged.horizon);
    merged.expect.extend(exp.expect);
    Ok(merged)
}

fn element(path: &str, coords: Vec<f64>, dim: usize) -> std::result::Result<Element, ConfigError> {
    if coords.len() != dim {
        return Err(err(path, format!("expected {dim} coordinates, found {}", coords.len())));
    }
    Ok(Element::new(coords))
}

fn generate(
    path: &str,
    g: Option<Generator>,
    dim: usize,
    rng: &mut random::Rng64,
) -> std::result::Result<Element, ConfigError> {
    match g {
        Some(Generator::Coords(c)) => element(path, c, dim),
        None | Some(Generator::Named(GeneratorKind::Random)) => Ok(random::element(rng, dim, 1.0)),
        Some(Generator::Named(GeneratorKind::Indicator)) => Ok(indicator_like(rng, dim)),
    }
}

fn require_model(path: &str, model: Option<LatticeModel>) -> std::result::Result<LatticeModel, ConfigError> {
    model.ok_or_else(|| err(&format!("{path}.model"), "this process needs a model"))
}

fn resolve_experiment(exp: ExperimentConfig, ctx: &Context) -> std::result::Result<Job, ConfigError> {
    let path = ctx.path.as_str();
    let exp = merge_fixture(exp, path)?;
    let tolerance =
        ctx.tolerance_override.or(positive(&format!("{path}.tolerance"), exp.tolerance)?).or(ctx.tolerance);
    let profile_tolerance = positive(&format!("{path}.profile_tolerance"), exp.profile_tolerance)?
        .unwrap_or(DEFAULT_PROFILE_TOLERANCE);
    let horizon = ctx.horizon_override.or(exp.horizon).or(ctx.horizon).unwrap_or(DEFAULT_HORIZON);
    if horizon < 2 {
        return Err(err(&format!("{path}.horizon"), format!("horizon {horizon} < 2")));
    }
    let mut rng = random::stream(ctx.seed, ctx.index as u64);
    let explicit_diagnostics = exp.diagnostics.clone();
    let process_path = format!("{path}.process");

    let (task, defaults) = match exp.process.clone() {
        ProcessSpec::Fixture(_) => unreachable!("fixtures are merged above"),
        ProcessSpec::Explicit { values, claim, x } => {
            let mut f = resolve_filtered(&exp, path, tolerance)?;
            let dim = f.filtration.model().dim();
            let vpath = format!("{process_path}.explicit.values");
            let approx = values
                .iter()
                .enumerate()
                .map(|(n, v)| element(&format!("{vpath}[{n}]"), v.iter().map(|e| e.approx).collect(), dim))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let trace = ProcessTrace::new(f.filtration.clone(), approx, claim.unwrap_or(KindClaim::None))
                .map_err(|e| err(&vpath, e))?;
            f.exact_values = Some(values.iter().map(|v| v.iter().map(|e| e.exact.clone()).collect()).collect());
            f.trace = Some(trace);
            f.x = x.map(|c| element(&format!("{process_path}.explicit.x"), c, dim)).transpose()?;
            let exact = f.exact.is_some();
            (Task::Filtered(Box::new(f)), default_diagnostics(false, exact))
        }
        ProcessSpec::ClosedMartingale { x } => {
            let mut f = resolve_filtered(&exp, path, tolerance)?;
            let dim = f.filtration.model().dim();
            let x = generate(&format!("{process_path}.closed_martingale.x"), x, dim, &mut rng)?;
            if let Some(ex) = &f.exact {
                let xe: Vec<BigRational> =
                    x.coords().iter().map(|&v| BigRational::from_float(v).expect("finite")).collect();
                f.exact_values = Some(ex.stages.iter().map(|e| e.apply(&xe)).collect());
            }
            f.x = Some(x);
            let exact = f.exact.is_some();
            (Task::Filtered(Box::new(f)), default_diagnostics(true, exact))
        }
        ProcessSpec::Urn { depth } => {
            if depth == 0 || depth > MAX_DEPTH {
                return Err(err(&format!("{process_path}.urn.depth"), format!("depth must be in 1..={MAX_DEPTH}")));
            }
            (Task::Urn(depth), Vec::new())
        }
        ProcessSpec::KbVsC0 {} => {
            if horizon < 4 {
                return Err(err(&format!("{path}.horizon"), format!("kb_vs_c0 needs horizon ≥ 4, got {horizon}")));
            }
            (Task::KbVsC0(horizon), Vec::new())
        }
        ProcessSpec::Sequence { terms, limit, unit, battery } => {
            let model = require_model(path, exp.model.clone())?;
            let dim = model.dim();
            let spath = format!("{process_path}.sequence");
            let terms = terms
                .into_iter()
                .enumerate()
                .map(|(n, t)| element(&format!("{spath}.terms[{n}]"), t, dim))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let family = SequenceFamily::new(model.clone(), terms).map_err(|e| err(&format!("{spath}.terms"), e))?;
            let limit = limit.map(|c| element(&format!("{spath}.limit"), c, dim)).transpose()?;
            let unit = match unit {
                Some(c) => element(&format!("{spath}.unit"), c, dim)?,
                None => model.default_unit(),
            };
            if !is_weak_unit(&unit).map_err(|e| err(&format!("{spath}.unit"), e))? {
                return Err(err(&format!("{spath}.unit"), format!("{unit} is not a weak unit")));
            }
            let battery = battery
                .map(|b| {
                    b.into_iter()
                        .enumerate()
                        .map(|(k, c)| element(&format!("{spath}.battery[{k}]"), c, dim))
                        .collect::<std::result::Result<Vec<_>, _>>()
                })
                .transpose()?;
            (Task::Sequence { family, limit, unit, battery }, Vec::new())
        }
        ProcessSpec::Bochner { chain, fiber, x } => {
            let bpath = format!("{process_path}.bochner");
            let unit = element(&format!("{bpath}.fiber.unit"), fiber.unit, fiber.model.dim())?;
            let fiber = FiberSpec { model: fiber.model, unit: Some(unit), functional: fiber.functional };
            let dim = chain.dim() * fiber.model.dim();
            let x = generate(&format!("{bpath}.x"), x, dim, &mut rng)?;
            (Task::Bochner { chain, fiber, x }, Vec::new())
        }
        ProcessSpec::Projection { matrix } => {
            let ppath = format!("{process_path}.projection.matrix");
            let m = Matrix::from_rows(matrix).map_err(|e| err(&ppath, e))?;
            let projection = Projection::new(m, ProjectionKind::GeneralPositive).map_err(|e| err(&ppath, e))?;
            let model = match exp.model.clone() {
                Some(m) if m.dim() != projection.dim() => {
                    return Err(err(&format!("{path}.model"), "model and matrix dimensions differ"))
                }
                Some(m) => m,
                None => LatticeModel::ell1(projection.dim()).map_err(|e| err(&ppath, e))?,
            };
            if projection.dim() > EXACT_LIMIT {
                return Err(err(&ppath, format!("dimension above {EXACT_LIMIT}")));
            }
            (Task::Projection { projection, model }, Vec::new())
        }
    };

    let diagnostics = match explicit_diagnostics {
        Some(list) => {
            let dpath = format!("{path}.diagnostics");
            let Task::Filtered(f) = &task else {
                return Err(err(&dpath, "diagnostics apply to explicit and closed_martingale processes only"));
            };
            let closed = f.trace.is_none();
            for d in &list {
                if *d == Diagnostic::Residual && !closed {
                    return Err(err(&dpath, "residual needs a closed_martingale process"));
                }
                if *d == Diagnostic::PositivePart && f.x.is_none() {
                    return Err(err(&dpath, "positive_part needs the closing vector `x`"));
                }
            }
            let mut list = list;
            list.sort();
            list.dedup();
            list
        }
        None => defaults,
    };
    Ok(Job {
        name: exp.name,
        path: ctx.path.clone(),
        task,
        diagnostics,
        profile_tolerance,
        seed: ctx.seed.wrapping_add(ctx.index as u64),
        expect: exp.expect,
    })
}

fn default_diagnostics(closed: bool, exact: bool) -> Vec<Diagnostic> {
    let mut d = vec![Diagnostic::Validate, Diagnostic::Process];
    d.push(if closed { Diagnostic::Residual } else { Diagnostic::Doob });
    if exact {
        d.push(Diagnostic::Exact);
    }
    d.sort();
    d
}

fn resolve_filtered(
    exp: &ExperimentConfig,
    path: &str,
    tolerance: Option<f64>,
) -> std::result::Result<Filtered, ConfigError> {
    let fpath = format!("{path}.filtration");
    let spec: &FiltrationSpec = exp.filtration.as_ref().ok_or_else(|| err(&fpath, "this process needs a filtration"))?;
    let sources = [spec.stages.is_some(), spec.chain.is_some(), spec.dyadic.is_some()];
    if sources.iter().filter(|s| **s).count() != 1 {
        return Err(err(&fpath, "exactly one of stages, chain or dyadic is required"));
    }
    let (mut filtration, exact) = if let Some(stages) = &spec.stages {
        let spath = format!("{fpath}.stages");
        if stages.is_empty() {
            return Err(err(&spath, "a filtration needs at least one stage"));
        }
        let model = require_model(path, exp.model.clone())?;
        let mut projections = Vec::with_capacity(stages.len());
        let mut exact = Vec::with_capacity(stages.len());
        for (k, rows) in stages.iter().enumerate() {
            let kpath = format!("{spath}[{k}]");
            let m = Matrix::from_rows(rows.iter().map(|r| r.iter().map(|e| e.approx).collect()).collect())
                .map_err(|e| err(&kpath, e))?;
            projections.push(Projection::new(m, ProjectionKind::GeneralPositive).map_err(|e| err(&kpath, e))?);
            exact.push(
                Matrix::from_rows(rows.iter().map(|r| r.iter().map(|e| e.exact.clone()).collect()).collect())
                    .map_err(|e| err(&kpath, e))?,
            );
        }
        let f = Filtration::new(model, projections, None).map_err(|e| err(&spath, e))?;
        let exact = (f.model().dim() <= EXACT_LIMIT).then_some(ExactStages { stages: exact, mu: None });
        (f, exact)
    } else {
        let (chain, cpath) = match (&spec.chain, spec.dyadic) {
            (Some(c), _) => (c.clone(), format!("{fpath}.chain")),
            (None, Some(d)) if (1..=MAX_DEPTH).contains(&d) => {
                (gallery::dyadic_exact(d).map_err(|e| err(&fpath, e))?, format!("{fpath}.dyadic"))
            }
            (None, d) => return Err(err(&format!("{fpath}.dyadic"), format!("depth {d:?} outside 1..={MAX_DEPTH}"))),
        };
        let approx = chain.to_f64();
        let model = match exp.model.clone() {
            Some(m) => m,
            None => LatticeModel::l1(approx.mu().to_vec()).map_err(|e| err(&cpath, e))?,
        };
        let f = chain_to_filtration_in(&approx, model).map_err(|e| err(&cpath, e))?;
        let exact = if chain.dim() <= EXACT_LIMIT {
            let stages = chain.conditional_expectations().map_err(|e| err(&cpath, e))?;
            Some(ExactStages { stages, mu: Some(chain.mu().to_vec()) })
        } else {
            None
        };
        (f, exact)
    };
    if let Some(w) = &spec.witness {
        filtration = filtration.with_witness(w.clone()).map_err(|e| err(&format!("{fpath}.witness"), e))?;
    }
    if let Some(t) = tolerance {
        filtration = filtration.with_tolerance(t);
    }
    let model = filtration.model().clone();
    let view = match (&exp.al_view, filtration.witness()) {
        (Some(spec), _) => {
            Some(ALView::from_spec(model, spec.clone()).map_err(|e| err(&format!("{path}.al_view"), e))?)
        }
        (None, Some(w)) => ALView::new(model, w.x0star.clone(), w.x0.clone()).ok(),
        (None, None) => None,
    };
    Ok(Filtered { filtration, view, exact, trace: None, exact_values: None, x: None })
}

fn flag(report: &mut ExperimentReport, name: &str, value: bool) {
    report.scalar(name, if value { 1.0 } else { 0.0 });
    report.verdict(name, value, name);
}

/// Absorbs a sub-experiment whose hypotheses may fail; a failed hypothesis
/// becomes the verdict `<section>.hypotheses_hold = false`.
fn gated(report: &mut ExperimentReport, section: &str, outcome: Result<ExperimentReport>) -> Result<()> {
    let key = format!("{section}.hypotheses_hold");
    match outcome {
        Ok(r) => {
            report.absorb(section, r);
            flag(report, &key, true);
            Ok(())
        }
        Err(Error::Hypothesis(m)) => {
            flag(report, &key, false);
            report.note(format!("{section}: {m}"));
            Ok(())
        }
        Err(e) => Err(e),
    }
}

fn run_filtered(job: &Job, t: &Filtered) -> Result<ExperimentReport> {
    let f = &t.filtration;
    let mut report = ExperimentReport::new(job.name.clone());
    let has = |d: Diagnostic| job.diagnostics.contains(&d);

    let bound = if has(Diagnostic::Validate) {
        let v = validate_filtration(f)?;
        report.scalar("filtration.stages", v.stages as f64);
        report.scalar("filtration.max_compatibility_defect", v.max_compatibility_defect);
        report.scalar("filtration.bounded_const", v.bounded_const);
        report.verdict("filtration.compatible", v.compatible, "filtration.max_compatibility_defect");
        flag(&mut report, "filtration.bistochastic", v.bistochastic);
        flag(&mut report, "filtration.bounded_const_exact", v.bounded_const_exact);
        report.verdict(
            "filtration.contractive",
            v.bounded_const <= 1.0 + f.tolerance(),
            "filtration.bounded_const",
        );
        v.bounded_const
    } else {
        f.stages().iter().map(|e| operator_norm(f.model(), e.matrix()).0).fold(0.0, f64::max)
    };

    let (trace, closed) = match (&t.trace, &t.x) {
        (Some(trace), _) => (trace.clone(), None),
        (None, Some(x)) => {
            let (trace, r) = closed_martingale_experiment(f, x, bound)?;
            (trace, Some(r))
        }
        (None, None) => unreachable!("filtered tasks carry a trace or a generator"),
    };

    if has(Diagnostic::Process) {
        let c = verify_process(&trace, f.tolerance());
        report.scalar("process.max_violation", c.max_violation);
        report.scalar("process.max_sub_violation", c.max_sub_violation);
        report.scalar("process.max_range_defect", c.max_range_defect);
        report.verdict("process.adapted", c.adapted, "process.max_range_defect");
        report.verdict("process.martingale", c.is_martingale, "process.max_violation");
        report.verdict("process.submartingale", c.is_submartingale, "process.max_sub_violation");
        let claim_holds = match trace.kind_claim() {
            KindClaim::Martingale => c.is_martingale,
            KindClaim::Submartingale => c.is_submartingale,
            KindClaim::None => true,
        };
        report.verdict("process.claim_holds", claim_holds, "process.max_violation");
    }
    if has(Diagnostic::Residual) {
        if let Some(r) = closed {
            report.absorb("residual", r);
        }
    }
    if has(Diagnostic::Doob) {
        let outcome = match &t.view {
            Some(view) => doob_experiment(&trace, view, job.profile_tolerance),
            None => Err(Error::Hypothesis("no weak unit and strictly positive functional configured".into())),
        };
        gated(&mut report, "doob", outcome)?;
    }
    if has(Diagnostic::PositivePart) {
        let x = t.x.as_ref().expect("checked during resolution");
        gated(&mut report, "positive_part", positive_part_convergence(&trace, x, job.profile_tolerance))?;
    }
    if has(Diagnostic::Exact) {
        match &t.exact {
            Some(ex) => exact_section(&mut report, ex, t.exact_values.as_deref())?,
            None => report.note(format!("exact: skipped, dimension above {EXACT_LIMIT}")),
        }
    }
    if has(Diagnostic::DoubleCondition) {
        if f.model().dim() > EXACT_LIMIT {
            report.note(format!("double_condition: skipped, dimension above {EXACT_LIMIT}"));
        } else {
            for (n, e) in f.stages().iter().enumerate() {
                let r = double_condition_diagnostics(e, f.model())?;
                let p = format!("double_condition.stage_{}", n + 1);
                report.scalar(&format!("{p}.fixed_weak_unit_margin"), r.fixed_weak_unit_margin);
                report.scalar(&format!("{p}.fixed_functional_margin"), r.fixed_functional_margin);
                flag(&mut report, &format!("{p}.witness_exists"), r.witness_exists);
                flag(&mut report, &format!("{p}.equivalence_holds"), r.equivalence_holds);
            }
        }
    }
    if has(Diagnostic::Contraction) {
        match &t.view {
            Some(view) => {
                let probes = default_probes(f.model().dim(), job.seed);
                for (n, e) in f.stages().iter().enumerate() {
                    let c = contractive_extension_check(view, e.matrix(), &probes)?;
                    let p = format!("contraction.stage_{}", n + 1);
                    report.scalar(&format!("{p}.ratio"), c.contraction_ratio);
                    flag(&mut report, &format!("{p}.preserves_functional"), c.preserves);
                }
            }
            None => report.note("contraction: skipped, no al_view or witness configured"),
        }
    }
    Ok(report)
}

fn exact_section(
    report: &mut ExperimentReport,
    ex: &ExactStages,
    values: Option<&[Vec<BigRational>]>,
) -> Result<()> {
    report.scalar("exact.stages", ex.stages.len() as f64);
    report.verdict("exact.tower", exact_tower(&ex.stages), "exact.stages");
    report.verdict("exact.idempotent", ex.stages.iter().all(|e| e.mul(e) == *e), "exact.stages");
    if let Some(mu) = &ex.mu {
        let ones = vec![BigRational::one(); mu.len()];
        report.verdict("exact.fixes_ones", ex.stages.iter().all(|e| e.apply(&ones) == ones), "exact.stages");
        report.verdict("exact.preserves_mu", ex.stages.iter().all(|e| e.apply_transpose(mu) == *mu), "exact.stages");
    }
    if let Some(v) = values {
        report.verdict("exact.martingale", exact_martingale(&ex.stages, v)?, "exact.stages");
    }
    Ok(())
}

fn run_sequence(
    name: &str,
    family: &SequenceFamily,
    limit: Option<&Element>,
    unit: &Element,
    battery: Option<&[Element]>,
    tol: f64,
) -> Result<ExperimentReport> {
    fn add(report: &mut ExperimentReport, key: &str, p: ConvergenceProfile) {
        let ok = p.converged();
        report.profile(key, p);
        report.verdict(key, ok, key);
    }
    let mut report = ExperimentReport::new(name);
    add(&mut report, "uo_cauchy", uo_cauchy_profile(family, unit, tol)?);
    add(&mut report, "order_cauchy", order_cauchy_profile(family, tol)?);
    if let Some(limit) = limit {
        add(&mut report, "order", order_profile(family, limit, tol)?);
        add(&mut report, "uo", uo_profile(family, limit, unit, tol)?);
        if let Some(b) = battery {
            add(&mut report, "un", un_profile(family, limit, b, tol)?);
        }
        let model = family.model();
        report.scalar("limit_norm", model.norm(limit));
        report.verdict("limit_accepted", model.accepts_limit(limit), "limit_norm");
        match fatou_check(family, limit, tol, 1e-9) {
            Ok(c) => {
                report.scalar("fatou.limit_norm", c.lhs);
                report.scalar("fatou.liminf", c.liminf);
                report.verdict("fatou.holds", c.ok, "fatou.liminf");
            }
            Err(Error::Precondition(m)) => report.note(format!("fatou: {m}")),
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

fn run_job(job: &Job) -> Result<ExperimentReport> {
    let tol = job.profile_tolerance;
    let mut report = match &job.task {
        Task::Filtered(t) => run_filtered(job, t)?,
        Task::Urn(depth) => urn_experiment(*depth, tol)?.report,
        Task::KbVsC0(h) => kb_vs_c0_experiment(*h, tol)?,
        Task::Sequence { family, limit, unit, battery } => {
            run_sequence(&job.name, family, limit.as_ref(), unit, battery.as_deref(), tol)?
        }
        Task::Bochner { chain, fiber, x } => {
            let f = bochner_filtration(chain, fiber, None)?;
            let trace = closed_martingale(&f, x)?;
            bochner_experiment(chain, fiber, &trace, tol)?
        }
        Task::Projection { projection, model } => {
            let r = double_condition_diagnostics(projection, model)?;
            let mut report = ExperimentReport::new(job.name.clone());
            report.scalar("dim", projection.dim() as f64);
            report.scalar("fixed_weak_unit_margin", r.fixed_weak_unit_margin);
            report.scalar("fixed_functional_margin", r.fixed_functional_margin);
            flag(&mut report, "strictly_positive", r.strictly_positive);
            flag(&mut report, "adjoint_strictly_positive", r.adjoint_strictly_positive);
            flag(&mut report, "structural_matches_basis", r.structural_matches_basis);
            report.verdict("fixed_weak_unit", r.fixed_weak_unit.is_some(), "fixed_weak_unit_margin");
            report.verdict("fixed_strict_functional", r.fixed_strict_functional.is_some(), "fixed_functional_margin");
            flag(&mut report, "witness_exists", r.witness_exists);
            flag(&mut report, "equivalence_holds", r.equivalence_holds);
            for n in r.notes {
                report.note(n);
            }
            report
        }
    };
    report.name = job.name.clone();
    Ok(report)
}

pub struct RunOutcome {
    pub reports: Vec<ExperimentReport>,
    /// One line per expected verdict that is missing or differs.
    pub mismatches: Vec<String>,
}

/// Runs every job, concurrently under `strategy`; reports keep config order.
pub fn execute(plan: &Plan, strategy: Strategy) -> std::result::Result<RunOutcome, ConfigError> {
    let results = strategy.map(&plan.jobs, |job| run_job(job).map_err(|e| err(&job.path, e)));
    let mut reports = Vec::with_capacity(results.len());
    let mut mismatches = Vec::new();
    for (job, r) in plan.jobs.iter().zip(results) {
        let report = r?;
        for (verdict, want) in &job.expect {
            match report.get(verdict) {
                Some(got) if got == *want => {}
                Some(got) => mismatches.push(format!("{}: {verdict} expected {want}, got {got}", job.name)),
                None => mismatches.push(format!("{}: {verdict} expected {want}, but no such verdict", job.name)),
            }
        }
        reports.push(report);
    }
    Ok(RunOutcome { reports, mismatches })
}

/// Writes `reports/<name>.json`, `profiles/<name>/<profile>.csv` and
/// `summary.csv` under `out`.
pub fn write_artifacts(out: &Path, reports: &[ExperimentReport]) -> io::Result<()> {
    let report_dir = out.join("reports");
    fs::create_dir_all(&report_dir)?;
    for r in reports {
        let mut json = serde_json::to_string_pretty(r).map_err(io::Error::other)?;
        json.push('\n');
        fs::write(report_dir.join(format!("{}.json", r.name)), json)?;
        if !r.profiles.is_empty() {
            let dir = out.join("profiles").join(&r.name);
            fs::create_dir_all(&dir)?;
            for (name, p) in &r.profiles {
                let file = fs::File::create(dir.join(format!("{name}.csv")))?;
                p.write_csv(io::BufWriter::new(file)).map_err(io::Error::other)?;
            }
        }
    }
    let file = fs::File::create(out.join("summary.csv"))?;
    write_summary_csv(reports, io::BufWriter::new(file)).map_err(io::Error::other)
}
