//! Problem files, task dispatch and report rendering for the `riesz` binary.
//!
//! A problem file is TOML with four parts: the `task`, an optional `seed`,
//! the `[space]` and named `[functions.*]`, and task `[params]`. See
//! `SCHEMA.md` next to this crate for the full layout.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use riesz_core::representation::{
    additivity_check, measure_from_function, measure_of_interval, roundtrip, weakly_compact_image_check,
    RoundtripOptions, StieltjesOperator,
};
use riesz_core::semivariation::{e_set, semivariation, wcs_check, ESetMode, SemivariationOptions};
use riesz_core::stieltjes::{integrate_g_dx, integrate_x_dg, per_partes, IntegralOptions, IntegralResult};
use riesz_core::{CPoly, Error, Field, PiecewiseFunction, Seminorm, SpaceModel, TagRule, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    IntegrateGdx,
    IntegrateXdg,
    Perpartes,
    Semivariation,
    Eset,
    WcsCheck,
    RepresentApply,
    ImageCheck,
    Roundtrip,
    Measure,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::IntegrateGdx => "integrate-gdx",
            Task::IntegrateXdg => "integrate-xdg",
            Task::Perpartes => "perpartes",
            Task::Semivariation => "semivariation",
            Task::Eset => "eset",
            Task::WcsCheck => "wcs-check",
            Task::RepresentApply => "represent-apply",
            Task::ImageCheck => "image-check",
            Task::Roundtrip => "roundtrip",
            Task::Measure => "measure",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub task: Task,
    #[serde(default)]
    pub seed: u64,
    pub space: SpaceSpec,
    #[serde(default)]
    pub functions: BTreeMap<String, FunctionSpec>,
    #[serde(default)]
    pub params: Params,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub dimension: usize,
    #[serde(default = "real")]
    pub field: Field,
    pub seminorms: Vec<SeminormSpec>,
}

fn real() -> Field {
    Field::Real
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SeminormSpec {
    WeightedSup { weights: Vec<f64> },
    WeightedOne { weights: Vec<f64> },
    Quadratic { matrix: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpSpec {
    pub t: f64,
    pub value: Vector,
}

/// Polynomials are coefficient arrays in the variable `t`, lowest degree
/// first; complex entries are `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpec {
    Constant {
        a: f64,
        b: f64,
        value: Vector,
    },
    Polynomial {
        a: f64,
        b: f64,
        /// One polynomial per coordinate.
        coordinates: Vec<CPoly>,
    },
    Step {
        a: f64,
        b: f64,
        initial: Vector,
        #[serde(default)]
        jumps: Vec<JumpSpec>,
    },
    Piecewise {
        breakpoints: Vec<f64>,
        /// `pieces[i][k]`: coordinate `k` on cell `i`.
        pieces: Vec<Vec<CPoly>>,
        /// Explicit value at every breakpoint; right-continuous if absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        values: Option<Vec<Vector>>,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Vector function (integrator or integrand); defaults to `x`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<String>,
    /// Scalar function; defaults to `g`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_levels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_cells: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tags: Option<TagRule>,
    /// Seminorm index; every seminorm when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seminorm: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<usize>,
    /// `exact` or `grid` for the increment set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<EsetMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duals: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_functions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cuts: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EsetMode {
    Exact,
    Grid,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Unreadable or invalid problem file; the location comes first.
    Schema(String),
    /// The task itself failed.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Schema(m) => write!(f, "schema error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

fn schema(at: &str, msg: impl fmt::Display) -> CliError {
    CliError::Schema(format!("{at}: {msg}"))
}

/// Input-shaped core errors are schema errors at `at`; the rest are task
/// failures.
fn classify(at: &str, e: Error) -> CliError {
    match e {
        Error::InvalidInput(_) | Error::DimensionMismatch { .. } | Error::DomainMismatch { .. } | Error::OutOfDomain { .. } => {
            schema(at, e)
        }
        other => CliError::Numerical(other.to_string()),
    }
}

pub fn parse_problem(text: &str) -> Result<ProblemFile, CliError> {
    toml::from_str(text).map_err(|e| CliError::Schema(e.to_string().trim_end().to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TaskEcho {
    pub task: Task,
    pub seed: u64,
    pub params: Params,
}

/// Delimiter-separated convergence data: one header and one row per level.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Trace {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub task: TaskEcho,
    pub result: Value,
    /// One record per seminorm.
    pub diagnostics: Vec<Value>,
    pub trace: Trace,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

struct Context<'a> {
    file: &'a ProblemFile,
    space: SpaceModel,
    functions: BTreeMap<String, PiecewiseFunction>,
}

fn build_space(spec: &SpaceSpec) -> Result<SpaceModel, CliError> {
    let mut ps = Vec::with_capacity(spec.seminorms.len());
    for (i, s) in spec.seminorms.iter().enumerate() {
        let at = format!("space.seminorms[{i}]");
        let p = match s {
            SeminormSpec::WeightedSup { weights } => Seminorm::weighted_sup(weights.clone()),
            SeminormSpec::WeightedOne { weights } => Seminorm::weighted_one(weights.clone()),
            SeminormSpec::Quadratic { matrix } => Seminorm::quadratic(matrix.clone()),
        }
        .map_err(|e| schema(&at, e))?;
        ps.push(p);
    }
    SpaceModel::new(spec.dimension, spec.field, ps).map_err(|e| schema("space", e))
}

fn build_function(spec: &FunctionSpec) -> riesz_core::Result<PiecewiseFunction> {
    match spec {
        FunctionSpec::Constant { a, b, value } => PiecewiseFunction::constant(*a, *b, value),
        FunctionSpec::Polynomial { a, b, coordinates } => PiecewiseFunction::polynomial(*a, *b, coordinates.clone()),
        FunctionSpec::Step { a, b, initial, jumps } => {
            let js: Vec<(f64, Vector)> = jumps.iter().map(|j| (j.t, j.value.clone())).collect();
            PiecewiseFunction::step(*a, *b, initial, &js)
        }
        FunctionSpec::Piecewise { breakpoints, pieces, values: None } => {
            PiecewiseFunction::new(breakpoints.clone(), pieces.clone())
        }
        FunctionSpec::Piecewise { breakpoints, pieces, values: Some(v) } => {
            PiecewiseFunction::with_values(breakpoints.clone(), pieces.clone(), v.clone())
        }
    }
}

impl<'a> Context<'a> {
    fn new(file: &'a ProblemFile) -> Result<Self, CliError> {
        let space = build_space(&file.space)?;
        let mut functions = BTreeMap::new();
        for (name, spec) in &file.functions {
            let f = build_function(spec).map_err(|e| schema(&format!("functions.{name}"), e))?;
            if space.field() == Field::Real && !f.is_real() {
                return Err(schema(&format!("functions.{name}"), "complex coefficients in a real space"));
            }
            functions.insert(name.clone(), f);
        }
        Ok(Context { file, space, functions })
    }

    fn named(&self, key: &str, given: &Option<String>) -> Result<&PiecewiseFunction, CliError> {
        let name = given.as_deref().unwrap_or(key);
        self.functions
            .get(name)
            .ok_or_else(|| schema(&format!("params.{key}"), format!("unknown function '{name}'")))
    }

    fn vector_fn(&self) -> Result<&PiecewiseFunction, CliError> {
        let x = self.named("x", &self.file.params.x)?;
        if x.dim() != self.space.dimension() {
            return Err(schema(
                "params.x",
                format!("function has {} coordinates, the space {}", x.dim(), self.space.dimension()),
            ));
        }
        Ok(x)
    }

    fn scalar_fn(&self) -> Result<&PiecewiseFunction, CliError> {
        let g = self.named("g", &self.file.params.g)?;
        if g.dim() != 1 {
            return Err(schema("params.g", format!("expected a scalar function, got {} coordinates", g.dim())));
        }
        Ok(g)
    }

    fn seminorm_indices(&self) -> Result<Vec<usize>, CliError> {
        let n = self.space.seminorms().len();
        match self.file.params.seminorm {
            Some(i) if i >= n => Err(schema("params.seminorm", format!("index {i} out of range for {n} seminorms"))),
            Some(i) => Ok(vec![i]),
            None => Ok((0..n).collect()),
        }
    }
}

fn positive(at: &str, v: Option<f64>, default: f64) -> Result<f64, CliError> {
    match v {
        Some(t) if !(t > 0.0 && t.is_finite()) => Err(schema(at, "must be a positive finite number")),
        Some(t) => Ok(t),
        None => Ok(default),
    }
}

fn bounded(at: &str, v: Option<usize>, default: usize, lo: usize, hi: usize) -> Result<usize, CliError> {
    let v = v.unwrap_or(default);
    if v < lo || v > hi {
        return Err(schema(at, format!("must lie in [{lo}, {hi}], got {v}")));
    }
    Ok(v)
}

fn integral_options(p: &Params) -> Result<IntegralOptions, CliError> {
    let d = IntegralOptions::default();
    Ok(IntegralOptions {
        tol: positive("params.tol", p.tol, d.tol)?,
        max_levels: bounded("params.max_levels", p.max_levels, d.max_levels, 0, 30)?,
        tags: p.tags,
        max_cells: bounded("params.max_cells", p.max_cells, d.max_cells, 1, 1 << 24)?,
    })
}

fn value_columns(prefix: &str, dim: usize, field: Field) -> Vec<String> {
    (0..dim)
        .flat_map(|k| match field {
            Field::Real => vec![format!("{prefix}_{k}")],
            Field::Complex => vec![format!("{prefix}_{k}_re"), format!("{prefix}_{k}_im")],
        })
        .collect()
}

fn value_cells(v: &Vector, field: Field) -> Vec<f64> {
    v.iter()
        .flat_map(|z| match field {
            Field::Real => vec![z.re],
            Field::Complex => vec![z.re, z.im],
        })
        .collect()
}

fn integral_trace(space: &SpaceModel, results: &[&IntegralResult]) -> Trace {
    let field = space.field();
    let dim = results.first().map_or(0, |r| r.value.dim());
    let mut columns = vec!["level".to_string(), "cells".into(), "mesh".into()];
    if results.len() > 1 {
        columns.insert(0, "integral".into());
    }
    columns.extend(value_columns("value", dim, field));
    columns.extend((0..space.seminorms().len()).map(|i| format!("estimate_{i}")));
    let mut rows = Vec::new();
    for (j, r) in results.iter().enumerate() {
        for row in &r.trace {
            let mut cells = vec![row.level as f64, row.cells as f64, row.mesh];
            if results.len() > 1 {
                cells.insert(0, j as f64);
            }
            cells.extend(value_cells(&row.value, field));
            cells.extend(&row.estimates);
            rows.push(cells);
        }
    }
    Trace { columns, rows }
}

fn integral_diagnostics(space: &SpaceModel, r: &IntegralResult) -> Vec<Value> {
    space
        .seminorms()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            json!({
                "seminorm": i,
                "kind": p.kind(),
                "estimate": r.estimates[i],
                "continuity_bound": r.continuity_bounds[i],
            })
        })
        .collect()
}

fn integral_payload(r: &IntegralResult) -> Value {
    json!({
        "value": r.value,
        "converged": r.converged,
        "levels": r.levels,
        "estimates": r.estimates,
        "continuity_bounds": r.continuity_bounds,
    })
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

type Outcome = (Value, Vec<Value>, Trace);

fn run_integral(ctx: &Context, gdx: bool) -> Result<Outcome, CliError> {
    let (x, g) = (ctx.vector_fn()?, ctx.scalar_fn()?);
    let opts = integral_options(&ctx.file.params)?;
    let r = if gdx {
        integrate_g_dx(&ctx.space, g, x, &opts)
    } else {
        integrate_x_dg(&ctx.space, x, g, &opts)
    }
    .map_err(|e| classify("params", e))?;
    Ok((integral_payload(&r), integral_diagnostics(&ctx.space, &r), integral_trace(&ctx.space, &[&r])))
}

fn run_perpartes(ctx: &Context) -> Result<Outcome, CliError> {
    let (x, g) = (ctx.vector_fn()?, ctx.scalar_fn()?);
    let opts = integral_options(&ctx.file.params)?;
    let r = per_partes(&ctx.space, x, g, &opts).map_err(|e| classify("params", e))?;
    let payload = json!({
        "lhs": r.lhs,
        "rhs": r.rhs,
        "gaps": r.gaps,
        "x_dg": integral_payload(&r.x_dg),
        "g_dx": integral_payload(&r.g_dx),
    });
    let diagnostics = ctx
        .space
        .seminorms()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            json!({
                "seminorm": i,
                "kind": p.kind(),
                "gap": r.gaps[i],
                "estimate_x_dg": r.x_dg.estimates[i],
                "estimate_g_dx": r.g_dx.estimates[i],
            })
        })
        .collect();
    Ok((payload, diagnostics, integral_trace(&ctx.space, &[&r.x_dg, &r.g_dx])))
}

fn run_semivariation(ctx: &Context) -> Result<Outcome, CliError> {
    let x = ctx.vector_fn()?;
    let p = &ctx.file.params;
    let d = SemivariationOptions::default();
    let opts = SemivariationOptions {
        tol: positive("params.tol", p.tol, d.tol)?,
        max_levels: bounded("params.max_levels", p.max_levels, d.max_levels, 0, 30)?,
        phases: bounded("params.phases", p.phases, d.phases, 1, 64)?,
        max_cells: bounded("params.max_cells", p.max_cells, d.max_cells, 1, 1 << 22)?,
    };
    let mut reports = Vec::new();
    let mut trace = Trace { columns: vec!["seminorm".into(), "level".into(), "value".into()], rows: Vec::new() };
    for i in ctx.seminorm_indices()? {
        let r = semivariation(&ctx.space, i, x, &opts).map_err(|e| classify("params", e))?;
        trace.rows.extend(r.trace.iter().enumerate().map(|(l, v)| vec![i as f64, l as f64, *v]));
        reports.push(r);
    }
    let diagnostics = reports
        .iter()
        .map(|r| {
            json!({
                "seminorm": r.seminorm_index,
                "kind": ctx.space.seminorms()[r.seminorm_index].kind(),
                "value": r.value,
                "exact": r.exact,
                "converged": r.converged,
                "upper_bound": r.upper_bound,
            })
        })
        .collect();
    Ok((json!({ "semivariations": to_value(&reports) }), diagnostics, trace))
}

fn run_eset(ctx: &Context) -> Result<Outcome, CliError> {
    let x = ctx.vector_fn()?;
    let p = &ctx.file.params;
    let mode = match p.mode.unwrap_or(if x.is_step() { EsetMode::Exact } else { EsetMode::Grid }) {
        EsetMode::Exact => ESetMode::Exact,
        EsetMode::Grid => ESetMode::Grid(bounded("params.resolution", p.resolution, 8, 1, 20)?),
    };
    let set = e_set(x, mode).map_err(|e| classify("params", e))?;
    let diagnostics = ctx
        .space
        .seminorms()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let max = set.iter().map(|v| s.eval(v).expect("dimension checked")).fold(0.0, f64::max);
            json!({ "seminorm": i, "kind": s.kind(), "max": max })
        })
        .collect();
    let mode_name = match mode {
        ESetMode::Exact => json!({ "kind": "exact" }),
        ESetMode::Grid(r) => json!({ "kind": "grid", "resolution": r }),
    };
    Ok((json!({ "mode": mode_name, "count": set.len(), "set": set }), diagnostics, Trace::default()))
}

fn run_wcs(ctx: &Context) -> Result<Outcome, CliError> {
    let x = ctx.vector_fn()?;
    let r = bounded("params.resolution", ctx.file.params.resolution, 16, 1, 20)?;
    let report = wcs_check(&ctx.space, x, r).map_err(|e| classify("params", e))?;
    let diagnostics = report.seminorms.iter().map(to_value).collect();
    Ok((to_value(&report), diagnostics, Trace::default()))
}

fn operator(ctx: &Context) -> Result<StieltjesOperator, CliError> {
    StieltjesOperator::new(ctx.space.clone(), ctx.vector_fn()?.clone()).map_err(|e| classify("params.x", e))
}

fn run_apply(ctx: &Context) -> Result<Outcome, CliError> {
    let op = operator(ctx)?;
    let g = ctx.scalar_fn()?;
    let tol = positive("params.tol", ctx.file.params.tol, 1e-8)?;
    let r = op.apply_detailed(g, tol).map_err(|e| classify("params.g", e))?;
    Ok((integral_payload(&r), integral_diagnostics(&ctx.space, &r), integral_trace(&ctx.space, &[&r])))
}

fn run_image(ctx: &Context) -> Result<Outcome, CliError> {
    let op = operator(ctx)?;
    let p = &ctx.file.params;
    let samples = bounded("params.samples", p.samples, 10, 1, 10_000)?;
    let tol = positive("params.tol", p.tol, 1e-9)?;
    let report = weakly_compact_image_check(&op, samples, ctx.file.seed, tol).map_err(|e| classify("params", e))?;
    let diagnostics = op.wcs().seminorms.iter().map(to_value).collect();
    Ok((to_value(&report), diagnostics, Trace::default()))
}

fn run_roundtrip(ctx: &Context) -> Result<Outcome, CliError> {
    let x = ctx.vector_fn()?;
    let p = &ctx.file.params;
    let d = RoundtripOptions::default();
    let opts = RoundtripOptions {
        probes: bounded("params.probes", p.probes, d.probes, 1, 100_000)?,
        duals: bounded("params.duals", p.duals, d.duals, 0, 1000)?,
        functions: bounded("params.test_functions", p.test_functions, d.functions, 0, 1000)?,
        tol: positive("params.tol", p.tol, d.tol)?,
        seed: ctx.file.seed,
    };
    let report = roundtrip(&ctx.space, x, &opts).map_err(|e| classify("params.x", e))?;
    let diagnostics = ctx
        .space
        .seminorms()
        .iter()
        .enumerate()
        .map(|(i, s)| json!({ "seminorm": i, "kind": s.kind(), "cumulative_gap": report.cumulative_gaps[i] }))
        .collect();
    Ok((to_value(&report), diagnostics, Trace::default()))
}

fn run_measure(ctx: &Context) -> Result<Outcome, CliError> {
    let x = ctx.vector_fn()?;
    let m = measure_from_function(x).map_err(|e| classify("params.x", e))?;
    let (a, b) = m.domain();
    let p = &ctx.file.params;
    let intervals = p.intervals.clone().unwrap_or_else(|| vec![[a, b]]);
    let mut masses = Vec::new();
    for (i, [c, d]) in intervals.iter().enumerate() {
        let v = measure_of_interval(&m, *c, *d).map_err(|e| schema(&format!("params.intervals[{i}]"), e))?;
        masses.push(json!({ "c": c, "d": d, "mass": v }));
    }
    let additivity = match &p.cuts {
        Some(cuts) => Some(additivity_check(&m, cuts).map_err(|e| schema("params.cuts", e))?),
        None => None,
    };
    let total = measure_of_interval(&m, a, b).map_err(|e| classify("params", e))?;
    let diagnostics = ctx
        .space
        .seminorms()
        .iter()
        .enumerate()
        .map(|(i, s)| json!({ "seminorm": i, "kind": s.kind(), "total": s.eval(&total).expect("dimension checked") }))
        .collect();
    let payload = json!({
        "cumulative": m.cumulative(),
        "intervals": masses,
        "additivity_gap": additivity,
    });
    Ok((payload, diagnostics, Trace::default()))
}

/// Runs the task of a parsed problem file. `timing` adds the wall time to
/// the report, which makes it non-reproducible.
pub fn run_task(file: &ProblemFile, timing: bool) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let ctx = Context::new(file)?;
    let (result, diagnostics, trace) = match file.task {
        Task::IntegrateGdx => run_integral(&ctx, true),
        Task::IntegrateXdg => run_integral(&ctx, false),
        Task::Perpartes => run_perpartes(&ctx),
        Task::Semivariation => run_semivariation(&ctx),
        Task::Eset => run_eset(&ctx),
        Task::WcsCheck => run_wcs(&ctx),
        Task::RepresentApply => run_apply(&ctx),
        Task::ImageCheck => run_image(&ctx),
        Task::Roundtrip => run_roundtrip(&ctx),
        Task::Measure => run_measure(&ctx),
    }?;
    Ok(RunReport {
        task: TaskEcho { task: file.task, seed: file.seed, params: file.params.clone() },
        result,
        diagnostics,
        trace,
        wall_time: timing.then(|| start.elapsed().as_secs_f64()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Structured,
    Table,
}

fn number(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        "nan".into()
    }
}

/// Structured output is pretty JSON with sorted keys; the table is the
/// trace as comma-separated rows under one header line.
pub fn emit(report: &RunReport, format: Format) -> String {
    match format {
        Format::Structured => {
            let v = to_value(report);
            let mut s = serde_json::to_string_pretty(&v).expect("json renders");
            s.push('\n');
            s
        }
        Format::Table => {
            let mut s = report.trace.columns.join(",");
            s.push('\n');
            for row in &report.trace.rows {
                s.push_str(&row.iter().map(|x| number(*x)).collect::<Vec<_>>().join(","));
                s.push('\n');
            }
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const JUMP: &str = r#"
task = "semivariation"

[space]
dimension = 2
seminorms = [{ kind = "weighted-one", weights = [1.0, 1.0] }]

[functions.x]
kind = "step"
a = 0.0
b = 1.0
initial = [0.0, 0.0]
jumps = [{ t = 0.5, value = [1.0, -2.0] }]
"#;

    #[test]
    fn semivariation_of_a_jump() {
        let r = run_task(&parse_problem(JUMP).unwrap(), false).unwrap();
        assert_eq!(r.diagnostics[0]["value"], json!(3.0));
        assert_eq!(r.diagnostics[0]["exact"], json!(true));
        assert!(r.wall_time.is_none());
    }

    fn with_g(task: &str, g: &str) -> ProblemFile {
        let text = format!("{}\n[functions.g]\n{g}\n", JUMP.replace("semivariation", task));
        parse_problem(&text).unwrap()
    }

    #[test]
    fn unit_integrand_gives_the_total_increment() {
        let r = run_task(&with_g("integrate-gdx", "kind = \"constant\"\na = 0.0\nb = 1.0\nvalue = [1.0]"), false).unwrap();
        assert_eq!(r.result["value"], json!([1.0, -2.0]));
        assert_eq!(r.trace.rows.len(), r.result["levels"].as_u64().unwrap() as usize);
    }

    #[test]
    fn parts_of_a_step_against_a_line() {
        // ∫ x dg = (1, -2)(1 - 1/2) and g(1) x(1) - ∫ g dx = (1, -2) - (1, -2)/2
        let r = run_task(&with_g("perpartes", "kind = \"polynomial\"\na = 0.0\nb = 1.0\ncoordinates = [[0.0, 1.0]]"), false).unwrap();
        assert_eq!(r.result["lhs"], json!([0.5, -1.0]));
        assert!(r.result["gaps"][0].as_f64().unwrap() <= 1e-12);
    }

    #[test]
    fn unknown_fields_are_schema_errors() {
        let bad = JUMP.replace("initial", "inital");
        let e = parse_problem(&bad).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("inital"));
    }

    #[test]
    fn missing_function_names_its_location() {
        let mut file = parse_problem(JUMP).unwrap();
        file.params.x = Some("y".into());
        let e = run_task(&file, false).unwrap_err();
        assert_eq!(e, CliError::Schema("params.x: unknown function 'y'".into()));
    }

    #[test]
    fn table_rows_follow_the_trace() {
        let r = run_task(&parse_problem(JUMP).unwrap(), false).unwrap();
        let table = emit(&r, Format::Table);
        assert_eq!(table.lines().count(), r.trace.rows.len() + 1);
        assert_eq!(table.lines().next(), Some("seminorm,level,value"));
        let empty = RunReport { trace: Trace { columns: vec!["level".into()], rows: vec![] }, ..r };
        assert_eq!(emit(&empty, Format::Table), "level\n");
    }

    #[test]
    fn structured_output_round_trips() {
        let r = run_task(&parse_problem(JUMP).unwrap(), false).unwrap();
        let s = emit(&r, Format::Structured);
        let v: Value = serde_json::from_str(&s).unwrap();
        let mut again = serde_json::to_string_pretty(&v).unwrap();
        again.push('\n');
        assert_eq!(s, again);
    }
}
