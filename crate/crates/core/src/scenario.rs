//! JSON scenarios: named measures, functions and gauges plus a list of
//! tasks, each writing one CSV or JSON artifact.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::NevError;
use crate::foliation::{
    classify_point, conformal_invariance_check, crypto_gauge, enigma_member, horocyclic_profile,
    kernel_extreme_bound_check,
};
use crate::gauges::{compose, product, Gauge, Table, C_SWEEP};
use crate::measures::{layer_cake_residual, Measure};
use crate::pick::{aronszajn_krein, mobius_compose, MobiusMap, PickFunction};
use crate::quotients::{augur_bounds, dyadic_grid, fit_augur_constants, quotient_series, Method};
use crate::regularity::{
    fortunate_verdict, gamma_regular_verdict, regfort_equivalence_check, sub_density_verdict,
};

/// Failure of a scenario or one of its tasks.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioError {
    Io(String),
    Schema(String),
    Compute(NevError),
}

impl ScenarioError {
    /// 2 for verdict preconditions, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Compute(e) if e.is_verdict_error() => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScenarioError::Io(m) => write!(f, "I/O error: {m}"),
            ScenarioError::Schema(m) => write!(f, "schema error: {m}"),
            ScenarioError::Compute(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ScenarioError {}

impl From<NevError> for ScenarioError {
    fn from(e: NevError) -> Self {
        ScenarioError::Compute(e)
    }
}

type SResult<T> = std::result::Result<T, ScenarioError>;

fn schema(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Schema(msg.into())
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Dirac { at: f64, #[serde(default = "one")] mass: f64 },
    Atoms { atoms: Vec<(f64, f64)> },
    Uniform { a: f64, b: f64 },
    PowerDensity {
        #[serde(default)]
        center: f64,
        #[serde(default = "one")]
        radius: f64,
        #[serde(default = "one")]
        coeff: f64,
        exponent: f64,
    },
    Cantor,
    LebesgueLine,
    Sum { parts: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Triple {
        #[serde(default)]
        a: f64,
        #[serde(default)]
        b: f64,
        measure: String,
    },
    Identity,
    NegInverse,
    Jacobi { diagonal: Vec<f64>, off_diagonal: Vec<f64> },
    Mobius { map: [f64; 4], inner: String },
    NegativeReciprocal { inner: String },
    AronszajnKrein { inner: String, alpha: f64 },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GaugeSpec {
    Power {
        #[serde(default = "one")]
        coeff: f64,
        power: f64,
        #[serde(default)]
        log: f64,
    },
    Identity,
    Constant { value: f64 },
    Table { points: Vec<(f64, f64)> },
    Compose { outer: String, inner: String },
    Product { left: String, right: String },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Dyadic { from: i32, to: i32 },
    Values { values: Vec<f64> },
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Dyadic { from: 3, to: 20 }
    }
}

impl GridSpec {
    pub fn resolve(&self) -> SResult<Vec<f64>> {
        let g = match self {
            GridSpec::Dyadic { from, to } => {
                if !(1 <= *from && from < to && *to <= 60) {
                    return Err(schema(format!("dyadic grid needs 1 ≤ from < to ≤ 60, got {from}..{to}")));
                }
                dyadic_grid(*from, *to)
            }
            GridSpec::Values { values } => values.clone(),
        };
        if g.len() < 2 || g.iter().any(|&e| !(e > 0.0 && e < 1.0)) || g.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(schema("ε grid must be strictly decreasing inside (0, 1)"));
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodSpec {
    /// Kernel method when the measure is explicit, direct otherwise.
    #[default]
    Auto,
    Direct,
    Kernel,
    /// Both methods; the task fails if they differ by more than the tolerance.
    Both,
}

fn default_eps0() -> f64 {
    0.125
}
fn default_net() -> usize {
    2000
}
fn default_bound_net() -> usize {
    10_000
}
fn default_betas() -> Vec<f64> {
    (1..=10).map(|k| 2f64.powi(k)).collect()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum TaskOp {
    QuotientSweep {
        function: String,
        k: String,
        lambda: String,
        #[serde(default)]
        tau: f64,
        #[serde(default)]
        method: MethodSpec,
    },
    CcLim {
        function: String,
        k: String,
        lambda: String,
        #[serde(default)]
        tau: f64,
        #[serde(default)]
        method: MethodSpec,
    },
    Augur {
        measure: String,
        #[serde(default)]
        b: f64,
        k: String,
        lambda: String,
        #[serde(default)]
        tau: f64,
        #[serde(default = "default_eps0")]
        eps0: f64,
    },
    SubDensity { measure: String, fortune: String, #[serde(default)] tau: f64 },
    Fortunate { function: String, fortune: String, #[serde(default)] tau: f64 },
    GammaRegular { measure: String, gamma: String, #[serde(default)] tau: f64 },
    Regfort {
        function: String,
        gamma: String,
        #[serde(default)]
        tau: f64,
        #[serde(default)]
        augury: Option<String>,
    },
    LayerCake { measure: String, gamma: String, #[serde(default)] tau: f64 },
    Classify { function: String, taus: Vec<f64> },
    Enigma { function: String, k: String, lambda: String, #[serde(default)] tau: f64 },
    CryptoGauge { function: String, #[serde(default)] tau: f64 },
    Conformal {
        function: String,
        map: [f64; 4],
        k: String,
        lambda: String,
        gamma: String,
        #[serde(default)]
        tau: f64,
    },
    Horocycle {
        function: String,
        gamma: String,
        #[serde(default = "one")]
        alpha: f64,
        #[serde(default)]
        tau: f64,
        #[serde(default = "default_betas")]
        betas: Vec<f64>,
        #[serde(default = "default_net")]
        net_size: usize,
    },
    KernelBound {
        gamma: String,
        beta: f64,
        c: f64,
        #[serde(default = "default_bound_net")]
        net_size: usize,
    },
}

impl TaskOp {
    pub fn name(&self) -> &'static str {
        match self {
            TaskOp::QuotientSweep { .. } => "quotient_sweep",
            TaskOp::CcLim { .. } => "cc_lim",
            TaskOp::Augur { .. } => "augur",
            TaskOp::SubDensity { .. } => "sub_density",
            TaskOp::Fortunate { .. } => "fortunate",
            TaskOp::GammaRegular { .. } => "gamma_regular",
            TaskOp::Regfort { .. } => "regfort",
            TaskOp::LayerCake { .. } => "layer_cake",
            TaskOp::Classify { .. } => "classify",
            TaskOp::Enigma { .. } => "enigma",
            TaskOp::CryptoGauge { .. } => "crypto_gauge",
            TaskOp::Conformal { .. } => "conformal",
            TaskOp::Horocycle { .. } => "horocycle",
            TaskOp::KernelBound { .. } => "kernel_bound",
        }
    }

    /// `(kind, name)` of every definition the task refers to.
    fn references(&self) -> Vec<(&'static str, &str)> {
        let (f, m, g) = ("function", "measure", "gauge");
        match self {
            TaskOp::QuotientSweep { function, k, lambda, .. }
            | TaskOp::CcLim { function, k, lambda, .. }
            | TaskOp::Enigma { function, k, lambda, .. } => vec![(f, function), (g, k), (g, lambda)],
            TaskOp::Augur { measure, k, lambda, .. } => vec![(m, measure), (g, k), (g, lambda)],
            TaskOp::SubDensity { measure, fortune, .. } => vec![(m, measure), (g, fortune)],
            TaskOp::Fortunate { function, fortune, .. } => vec![(f, function), (g, fortune)],
            TaskOp::GammaRegular { measure, gamma, .. } | TaskOp::LayerCake { measure, gamma, .. } => {
                vec![(m, measure), (g, gamma)]
            }
            TaskOp::Regfort { function, gamma, augury, .. } => {
                let mut v = vec![(f, function.as_str()), (g, gamma.as_str())];
                if let Some(a) = augury {
                    v.push((g, a));
                }
                v
            }
            TaskOp::Classify { function, .. } | TaskOp::CryptoGauge { function, .. } => vec![(f, function)],
            TaskOp::Conformal { function, k, lambda, gamma, .. } => {
                vec![(f, function), (g, k), (g, lambda), (g, gamma)]
            }
            TaskOp::Horocycle { function, gamma, .. } => vec![(f, function), (g, gamma)],
            TaskOp::KernelBound { gamma, .. } => vec![(g, gamma)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Task {
    #[serde(flatten)]
    pub op: TaskOp,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridSpec,
    /// Agreement tolerance for `method: both` sweeps.
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub measures: BTreeMap<String, MeasureSpec>,
    #[serde(default)]
    pub functions: BTreeMap<String, FunctionSpec>,
    #[serde(default)]
    pub gauges: BTreeMap<String, GaugeSpec>,
    pub tasks: Vec<Task>,
}

pub const DEFAULT_TOLERANCE: f64 = 1e-6;

impl Scenario {
    /// Parse JSON; errors carry the line and column.
    pub fn from_json(text: &str) -> SResult<Self> {
        serde_json::from_str(text).map_err(|e| schema(format!("line {} column {}: {e}", e.line(), e.column())))
    }

    pub fn load(path: &Path) -> SResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            ScenarioError::Schema(m) => schema(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

/// Definitions of a scenario, resolved to library objects.
#[derive(Debug, Clone)]
pub struct Context {
    pub measures: BTreeMap<String, Measure>,
    pub functions: BTreeMap<String, PickFunction>,
    pub gauges: BTreeMap<String, Gauge>,
    pub grid: Vec<f64>,
    pub seed: u64,
    pub tolerance: f64,
}

const MAX_NESTING: usize = 32;

fn resolve_measure(
    name: &str,
    specs: &BTreeMap<String, MeasureSpec>,
    done: &mut BTreeMap<String, Measure>,
    depth: usize,
) -> SResult<Measure> {
    if let Some(m) = done.get(name) {
        return Ok(m.clone());
    }
    if depth > MAX_NESTING {
        return Err(schema(format!("measure '{name}' is defined cyclically")));
    }
    let spec = specs.get(name).ok_or_else(|| schema(format!("unknown measure '{name}'")))?;
    let m = match spec {
        MeasureSpec::Dirac { at, mass } => Measure::dirac(*at, *mass)?,
        MeasureSpec::Atoms { atoms } => {
            let mut a = atoms.clone();
            a.sort_by(|x, y| x.0.total_cmp(&y.0));
            Measure::atoms(a)?
        }
        MeasureSpec::Uniform { a, b } => Measure::uniform(*a, *b)?,
        MeasureSpec::PowerDensity { center, radius, coeff, exponent } => {
            Measure::power_density(*center, *radius, *coeff, *exponent)?
        }
        MeasureSpec::Cantor => Measure::cantor(),
        MeasureSpec::LebesgueLine => Measure::lebesgue_line(),
        MeasureSpec::Sum { parts } => {
            let mut acc = Measure::zero();
            for p in parts {
                acc = acc.plus(resolve_measure(p, specs, done, depth + 1)?);
            }
            acc
        }
    }
    .with_name(name);
    done.insert(name.to_string(), m.clone());
    Ok(m)
}

fn resolve_gauge(
    name: &str,
    specs: &BTreeMap<String, GaugeSpec>,
    done: &mut BTreeMap<String, Gauge>,
    depth: usize,
) -> SResult<Gauge> {
    if let Some(g) = done.get(name) {
        return Ok(g.clone());
    }
    if depth > MAX_NESTING {
        return Err(schema(format!("gauge '{name}' is defined cyclically")));
    }
    let spec = specs.get(name).ok_or_else(|| schema(format!("unknown gauge '{name}'")))?;
    let g = match spec {
        GaugeSpec::Power { coeff, power, log } => Gauge::power_log(*coeff, *power, *log)?,
        GaugeSpec::Identity => Gauge::identity(),
        GaugeSpec::Constant { value } => Gauge::power_log(*value, 0.0, 0.0)?,
        GaugeSpec::Table { points } => Gauge::Table(Table::new(points.clone())?),
        GaugeSpec::Compose { outer, inner } => compose(
            &resolve_gauge(outer, specs, done, depth + 1)?,
            &resolve_gauge(inner, specs, done, depth + 1)?,
        )?,
        GaugeSpec::Product { left, right } => product(
            &resolve_gauge(left, specs, done, depth + 1)?,
            &resolve_gauge(right, specs, done, depth + 1)?,
        ),
    };
    done.insert(name.to_string(), g.clone());
    Ok(g)
}

fn resolve_function(
    name: &str,
    specs: &BTreeMap<String, FunctionSpec>,
    measures: &BTreeMap<String, Measure>,
    done: &mut BTreeMap<String, PickFunction>,
    depth: usize,
) -> SResult<PickFunction> {
    if let Some(f) = done.get(name) {
        return Ok(f.clone());
    }
    if depth > MAX_NESTING {
        return Err(schema(format!("function '{name}' is defined cyclically")));
    }
    let spec = specs.get(name).ok_or_else(|| schema(format!("unknown function '{name}'")))?;
    let mut inner = |n: &str| resolve_function(n, specs, measures, done, depth + 1);
    let f = match spec {
        FunctionSpec::Triple { a, b, measure } => {
            let mu = measures.get(measure).ok_or_else(|| schema(format!("unknown measure '{measure}'")))?;
            PickFunction::triple(*a, *b, mu.clone())?
        }
        FunctionSpec::Identity => PickFunction::identity(),
        FunctionSpec::NegInverse => PickFunction::neg_inverse(),
        FunctionSpec::Jacobi { diagonal, off_diagonal } => PickFunction::jacobi(diagonal, off_diagonal)?,
        FunctionSpec::Mobius { map, inner: i } => {
            let m = MobiusMap::new(map[0], map[1], map[2], map[3])?;
            mobius_compose(m, &inner(i)?)
        }
        FunctionSpec::NegativeReciprocal { inner: i } => PickFunction::negative_reciprocal(inner(i)?),
        FunctionSpec::AronszajnKrein { inner: i, alpha } => aronszajn_krein(&inner(i)?, *alpha),
    };
    done.insert(name.to_string(), f.clone());
    Ok(f)
}

impl Context {
    /// Resolve every definition and check the tasks' references and outputs.
    pub fn build(s: &Scenario) -> SResult<Self> {
        let mut measures = BTreeMap::new();
        for name in s.measures.keys() {
            resolve_measure(name, &s.measures, &mut measures, 0)?;
        }
        let mut gauges = BTreeMap::new();
        for name in s.gauges.keys() {
            resolve_gauge(name, &s.gauges, &mut gauges, 0)?;
        }
        let mut functions = BTreeMap::new();
        for name in s.functions.keys() {
            resolve_function(name, &s.functions, &measures, &mut functions, 0)?;
        }
        let mut outputs = BTreeSet::new();
        for (i, t) in s.tasks.iter().enumerate() {
            for (kind, name) in t.op.references() {
                let known = match kind {
                    "function" => functions.contains_key(name),
                    "measure" => measures.contains_key(name),
                    _ => gauges.contains_key(name),
                };
                if !known {
                    return Err(schema(format!("task {} ({}): unknown {kind} '{name}'", i + 1, t.op.name())));
                }
            }
            if t.output.is_empty() || !outputs.insert(t.output.clone()) {
                return Err(schema(format!("task {}: output path '{}' is empty or repeated", i + 1, t.output)));
            }
        }
        let tolerance = s.tolerance.unwrap_or(DEFAULT_TOLERANCE);
        if !(tolerance > 0.0) {
            return Err(schema("tolerance must be positive"));
        }
        Ok(Context {
            measures,
            functions,
            gauges,
            grid: s.grid.resolve()?,
            seed: s.seed,
            tolerance,
        })
    }

    fn f(&self, n: &str) -> &PickFunction {
        &self.functions[n]
    }
    fn m(&self, n: &str) -> &Measure {
        &self.measures[n]
    }
    fn g(&self, n: &str) -> &Gauge {
        &self.gauges[n]
    }
}

/// CSV with a header row and full-precision scientific values.
pub fn csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| format!("{v:.16e}")).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

fn json<T: Serialize>(v: &T) -> SResult<String> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| ScenarioError::Io(format!("serialization: {e}")))
}

pub fn sweep_csv(
    f: &PickFunction,
    k: &Gauge,
    lambda: &Gauge,
    tau: f64,
    grid: &[f64],
    method: MethodSpec,
    tolerance: f64,
) -> SResult<String> {
    let auto = if f.as_triple().is_some() { Method::Kernel } else { Method::Direct };
    match method {
        MethodSpec::Both => {
            let d = quotient_series(f, k, lambda, tau, grid, Method::Direct)?;
            let q = quotient_series(f, k, lambda, tau, grid, Method::Kernel)?;
            let mut rows = Vec::new();
            for ((&e, &a), &b) in grid.iter().zip(&d.values).zip(&q.values) {
                let rel = (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
                if rel > tolerance {
                    return Err(NevError::Numeric {
                        message: format!("direct and kernel values differ by {rel:.3e} at ε = {e:e}"),
                        partial: b,
                    }
                    .into());
                }
                rows.push(vec![e, a, b]);
            }
            Ok(csv(&["eps", "direct", "kernel"], &rows))
        }
        other => {
            let m = match other {
                MethodSpec::Direct => Method::Direct,
                MethodSpec::Kernel => Method::Kernel,
                _ => auto,
            };
            let s = quotient_series(f, k, lambda, tau, grid, m)?;
            let rows: Vec<Vec<f64>> = s.grid.iter().zip(&s.values).map(|(&e, &v)| vec![e, v]).collect();
            Ok(csv(&["eps", "value"], &rows))
        }
    }
}

fn series_values(ctx: &Context, f: &PickFunction, k: &Gauge, l: &Gauge, tau: f64, method: MethodSpec) -> SResult<Vec<f64>> {
    let m = match method {
        MethodSpec::Direct => Method::Direct,
        MethodSpec::Kernel => Method::Kernel,
        _ if f.as_triple().is_some() => Method::Kernel,
        _ => Method::Direct,
    };
    Ok(quotient_series(f, k, l, tau, &ctx.grid, m)?.values)
}

/// Compute one task and return the artifact's text.
pub fn execute(ctx: &Context, op: &TaskOp) -> SResult<String> {
    match op {
        TaskOp::QuotientSweep { function, k, lambda, tau, method } => sweep_csv(
            ctx.f(function),
            ctx.g(k),
            ctx.g(lambda),
            *tau,
            &ctx.grid,
            *method,
            ctx.tolerance,
        ),
        TaskOp::CcLim { function, k, lambda, tau, method } => {
            let vals = series_values(ctx, ctx.f(function), ctx.g(k), ctx.g(lambda), *tau, *method)?;
            json(&crate::quotients::cc_lim_estimate(&ctx.grid, &vals)?)
        }
        TaskOp::Augur { measure, b, k, lambda, tau, eps0 } => {
            let (mu, l, kk) = (ctx.m(measure), ctx.g(lambda), ctx.g(k));
            let c = fit_augur_constants(mu, *b, l, *tau, *eps0)?;
            let f = PickFunction::triple(0.0, *b, mu.clone())?;
            let grid: Vec<f64> = ctx.grid.iter().copied().filter(|&e| e <= *eps0).collect();
            let s = quotient_series(&f, kk, l, *tau, &grid, Method::Kernel)?;
            let mut rows = Vec::new();
            for (&e, &a) in grid.iter().zip(&s.values) {
                let bd = augur_bounds(mu, *b, kk, l, *tau, e, c)?;
                rows.push(vec![e, a, bd.lower, bd.upper()]);
            }
            Ok(csv(&["eps", "value", "lower", "upper"], &rows))
        }
        TaskOp::SubDensity { measure, fortune, tau } => {
            json(&sub_density_verdict(ctx.m(measure), ctx.g(fortune), *tau, &C_SWEEP)?)
        }
        TaskOp::Fortunate { function, fortune, tau } => {
            json(&fortunate_verdict(ctx.f(function), ctx.g(fortune), *tau)?)
        }
        TaskOp::GammaRegular { measure, gamma, tau } => {
            json(&gamma_regular_verdict(ctx.m(measure), ctx.g(gamma), *tau, &C_SWEEP)?)
        }
        TaskOp::Regfort { function, gamma, tau, augury } => json(&regfort_equivalence_check(
            ctx.f(function),
            ctx.g(gamma),
            *tau,
            augury.as_deref().map(|a| ctx.g(a)),
            &C_SWEEP,
        )?),
        TaskOp::LayerCake { measure, gamma, tau } => json(&layer_cake_residual(ctx.m(measure), ctx.g(gamma), *tau)?),
        TaskOp::Classify { function, taus } => {
            let f = ctx.f(function);
            let v = taus.iter().map(|&t| classify_point(f, t)).collect::<Result<Vec<_>, _>>()?;
            json(&v)
        }
        TaskOp::Enigma { function, k, lambda, tau } => {
            json(&enigma_member(ctx.f(function), ctx.g(k), ctx.g(lambda), *tau)?)
        }
        TaskOp::CryptoGauge { function, tau } => {
            let g = crypto_gauge(ctx.f(function), *tau)?;
            let rows = match &g {
                Gauge::Table(t) => t.points().iter().map(|&(x, v)| vec![x, v]).collect(),
                _ => Vec::new(),
            };
            Ok(csv(&["t", "value"], &rows))
        }
        TaskOp::Conformal { function, map, k, lambda, gamma, tau } => {
            let m = MobiusMap::new(map[0], map[1], map[2], map[3])?;
            json(&conformal_invariance_check(ctx.f(function), m, ctx.g(k), ctx.g(lambda), ctx.g(gamma), *tau)?)
        }
        TaskOp::Horocycle { function, gamma, alpha, tau, betas, net_size } => {
            let prof = horocyclic_profile(ctx.f(function), ctx.g(gamma), *alpha, *tau, betas, *net_size, ctx.seed)?;
            let rows: Vec<Vec<f64>> = prof.into_iter().map(|(b, s)| vec![b, s]).collect();
            Ok(csv(&["beta", "sup"], &rows))
        }
        TaskOp::KernelBound { gamma, beta, c, net_size } => {
            json(&kernel_extreme_bound_check(ctx.g(gamma), *beta, *c, *net_size)?)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskSummary {
    pub index: usize,
    pub op: &'static str,
    pub output: String,
    pub error: Option<String>,
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub tasks: Vec<TaskSummary>,
    pub exit_code: i32,
}

impl RunReport {
    pub fn table(&self) -> String {
        let mut out = String::from("task  op              status  output\n");
        for t in &self.tasks {
            let status = if t.error.is_none() { "ok" } else { "FAILED" };
            let _ = writeln!(out, "{:>4}  {:<15} {:<7} {}", t.index, t.op, status, t.output);
            if let Some(e) = &t.error {
                let _ = writeln!(out, "      {e}");
            }
        }
        out
    }
}

fn write_artifact(dir: &Path, rel: &str, text: &str) -> SResult<PathBuf> {
    let path = dir.join(rel);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| ScenarioError::Io(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(&path, text).map_err(|e| ScenarioError::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

/// Run all tasks in order. Exit code 0 if every task succeeds, 1 if any
/// task hit an I/O or numerical failure, 2 if the only failures are
/// verdict preconditions.
pub fn run_scenario(s: &Scenario, out_dir: &Path) -> SResult<RunReport> {
    let ctx = Context::build(s)?;
    let mut tasks = Vec::new();
    for (i, t) in s.tasks.iter().enumerate() {
        let result = execute(&ctx, &t.op).and_then(|text| write_artifact(out_dir, &t.output, &text));
        let (error, exit_code) = match result {
            Ok(_) => (None, 0),
            Err(e) => (Some(e.to_string()), e.exit_code()),
        };
        tasks.push(TaskSummary {
            index: i + 1,
            op: t.op.name(),
            output: t.output.clone(),
            error,
            exit_code,
        });
    }
    let exit_code = if tasks.iter().any(|t| t.exit_code == 1) {
        1
    } else if tasks.iter().any(|t| t.exit_code == 2) {
        2
    } else {
        0
    };
    Ok(RunReport { tasks, exit_code })
}
