//! The `degrobin` command line: classification, oracle profiles, nonlinear
//! solves, parameter sweeps and estimate checks.
//!
//! Everything except quick classification reads a JSON problem document
//! (`--config`). Output goes to `--out` (written atomically) or stdout.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::coefficients::check_pointwise_inequality;
use crate::error::Error;
use crate::estimates::{
    estimate_harness_energy, estimate_harness_linfty, estimate_harness_w1s, linfty_monotone,
    SolutionRoute,
};
use crate::fd_solver::{picard_solve, radial_flux, ProblemSpec, SolveReport};
use crate::radial_oracle::{solve_boundary_value, RadialExampleSpec};
use crate::regimes::{classify, parse_exact, RegimeReport};
use crate::source::Source;

pub const OUTPUT_SCHEMA: &str = include_str!("../schema/output_columns.json");

const HELP_FOOTER: &str = concat!(
    "Exit codes: 0 success, 2 invalid config, 3 non-convergence, 4 nonexistence, 5 I/O failure.\n\n",
    "Output columns (shipped as schema/output_columns.json):\n",
    include_str!("../schema/output_columns.json")
);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success,
    InvalidConfig,
    NonConvergence,
    Nonexistence,
    Io,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::InvalidConfig => 2,
            ExitStatus::NonConvergence => 3,
            ExitStatus::Nonexistence => 4,
            ExitStatus::Io => 5,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub status: ExitStatus,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            status: ExitStatus::InvalidConfig,
            message: message.into(),
        }
    }

    fn io(path: &Path, err: std::io::Error) -> Self {
        Self {
            status: ExitStatus::Io,
            message: format!("{}: {err}", path.display()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let status = match err {
            Error::Domain(_) | Error::InvalidSpec(_) | Error::RegimeMismatch(_) => {
                ExitStatus::InvalidConfig
            }
            Error::NonConvergence(_) => ExitStatus::NonConvergence,
            Error::Nonexistence(_) => ExitStatus::Nonexistence,
        };
        Self {
            status,
            message: err.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Tsv,
}

#[derive(Debug, Parser)]
#[command(
    name = "degrobin",
    version,
    about = "Regimes, closed-form profiles, radial solves and estimate checks for -div(b(|u|) grad u) = f with Robin data",
    after_long_help = HELP_FOOTER
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON problem document.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Output format (default: json for classify, csv otherwise).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Mesh intervals M (oracle: number of sample intervals).
    #[arg(long, global = true)]
    pub mesh: Option<usize>,

    /// Truncation level n.
    #[arg(long, global = true)]
    pub trunc: Option<f64>,

    /// Picard tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Seed for the fuzz suites.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regime and exponents of a datum f in L^q.
    Classify(ClassifyArgs),
    /// Sampled closed-form radial profile for f = A |x|^-gamma, gamma < 2.
    Oracle,
    /// Truncated nonlinear solve.
    Solve,
    /// Solves over one swept parameter, merged in sweep order.
    Sweep,
    /// Estimate checks: linfty, energy, w1s or pointwise.
    Verify,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub dim: Option<u32>,
    /// Decimal or a/b.
    #[arg(long)]
    pub theta: Option<String>,
    /// Decimal or a/b.
    #[arg(long)]
    pub q: Option<String>,
    /// Use floating point instead of exact rationals.
    #[arg(long)]
    pub float: bool,
}

/// A JSON number or a string such as `"9/7"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum NumberText {
    Number(f64),
    Text(String),
}

impl NumberText {
    fn into_text(self) -> String {
        match self {
            NumberText::Number(x) => x.to_string(),
            NumberText::Text(s) => s,
        }
    }
}

#[derive(Debug, Deserialize)]
struct ClassifyDocument {
    dim: Option<u32>,
    theta: Option<NumberText>,
    q: Option<NumberText>,
    #[serde(default)]
    float: bool,
}

#[derive(Debug, Serialize)]
struct ClassifyConfig {
    dim: u32,
    theta: String,
    q: String,
    exact: bool,
}

fn default_samples() -> usize {
    100
}

#[derive(Debug, Serialize, Deserialize)]
struct OracleConfig {
    #[serde(flatten)]
    spec: RadialExampleSpec,
    /// Samples at `r_i = R i / samples`.
    #[serde(default = "default_samples")]
    samples: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum SweepParameter {
    Amplitude,
    Gamma,
    Theta,
    Beta,
    Radius,
    Truncation,
    Intervals,
    Tolerance,
}

impl SweepParameter {
    fn name(self) -> &'static str {
        match self {
            SweepParameter::Amplitude => "amplitude",
            SweepParameter::Gamma => "gamma",
            SweepParameter::Theta => "theta",
            SweepParameter::Beta => "beta",
            SweepParameter::Radius => "radius",
            SweepParameter::Truncation => "truncation",
            SweepParameter::Intervals => "intervals",
            SweepParameter::Tolerance => "tolerance",
        }
    }

    fn apply(self, base: &ProblemSpec, value: f64) -> Result<ProblemSpec, CliError> {
        let mut spec = base.clone();
        match self {
            SweepParameter::Amplitude | SweepParameter::Gamma => match &mut spec.source {
                Source::Power { amplitude, gamma } => {
                    if matches!(self, SweepParameter::Amplitude) {
                        *amplitude = value;
                    } else {
                        *gamma = value;
                    }
                }
                Source::Tabulated { .. } => {
                    return Err(CliError::config(format!(
                        "cannot sweep {} on a tabulated source",
                        self.name()
                    )))
                }
            },
            SweepParameter::Theta => spec.theta = value,
            SweepParameter::Beta => spec.beta = value,
            SweepParameter::Radius => spec.radius = value,
            SweepParameter::Truncation => spec.truncation = value,
            SweepParameter::Intervals => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(CliError::config(format!(
                        "intervals must be a positive integer, got {value}"
                    )));
                }
                spec.mesh.intervals = value as usize;
            }
            SweepParameter::Tolerance => spec.iteration.tolerance = value,
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SweepAxis {
    parameter: SweepParameter,
    values: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SweepConfig {
    problem: ProblemSpec,
    axis: SweepAxis,
}

fn default_fuzz_samples() -> usize {
    10_000
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "harness", rename_all = "snake_case")]
enum VerifyConfig {
    Linfty {
        base: RadialExampleSpec,
        amplitudes: Vec<f64>,
    },
    Energy {
        problem: ProblemSpec,
        q: f64,
        amplitudes: Vec<f64>,
        #[serde(default)]
        route: SolutionRoute,
    },
    W1s {
        problem: ProblemSpec,
        q: f64,
        amplitudes: Vec<f64>,
    },
    Pointwise {
        #[serde(default = "default_fuzz_samples")]
        samples: usize,
        #[serde(default)]
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Missing,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Num)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// Shortest round-trip form; scientific outside `[1e-4, 1e16)`, no negative zero.
fn format_number(x: f64) -> String {
    let x = x + 0.0;
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e16).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => Value::from(*x + 0.0),
            Cell::Num(x) => Value::from(x.to_string()),
            Cell::Int(n) => Value::from(*n),
            Cell::Bool(b) => Value::from(*b),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Missing => Value::Null,
        }
    }
}

/// Rows plus a few scalar summary entries.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(String, Cell)>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    fn note(&mut self, key: &str, value: impl Into<Cell>) {
        self.summary.push((key.to_string(), value.into()));
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Renders a table with its config header. Deterministic: no timestamps,
/// sorted JSON keys, shortest round-trip float formatting.
pub fn render(command: &str, config: &Value, table: &Table, format: Format) -> String {
    match format {
        Format::Json => {
            let mut summary = Map::new();
            for (k, v) in &table.summary {
                summary.insert(k.clone(), v.json());
            }
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|row| {
                    let mut obj = Map::new();
                    for (c, v) in table.columns.iter().zip(row) {
                        obj.insert(c.clone(), v.json());
                    }
                    Value::Object(obj)
                })
                .collect();
            let doc = serde_json::json!({
                "command": command,
                "config": config,
                "result": { "summary": summary, "rows": rows },
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("json values serialize");
            s.push('\n');
            s
        }
        Format::Csv | Format::Tsv => {
            let tsv = format == Format::Tsv;
            let mut out = format!("# degrobin {command}\n# config: {config}\n");
            for (k, v) in &table.summary {
                out.push_str(&format!("# {k}: {}\n", v.text()));
            }
            let join = |cells: Vec<String>| {
                if tsv {
                    cells
                        .iter()
                        .map(|c| c.replace(['\t', '\n'], " "))
                        .collect::<Vec<_>>()
                        .join("\t")
                } else {
                    cells.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(",")
                }
            };
            if tsv {
                out.push_str("# ");
            }
            out.push_str(&join(table.columns.clone()));
            out.push('\n');
            for row in &table.rows {
                out.push_str(&join(row.iter().map(Cell::text).collect()));
                out.push('\n');
            }
            out
        }
    }
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents.as_bytes())
        .map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

fn load_document<T: DeserializeOwned>(path: Option<&Path>) -> Result<T, CliError> {
    let path = path.ok_or_else(|| CliError::config("this command needs --config <path>"))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn to_value<T: Serialize>(config: &T) -> Value {
    serde_json::to_value(config).expect("configs serialize")
}

/// Result of one command: the rendered table and the status to exit with.
pub struct Outcome {
    pub command: &'static str,
    pub config: Value,
    pub table: Table,
    pub status: ExitStatus,
}

impl Outcome {
    fn ok(command: &'static str, config: Value, table: Table) -> Self {
        Self {
            command,
            config,
            table,
            status: ExitStatus::Success,
        }
    }
}

impl Cli {
    fn override_problem(&self, spec: &mut ProblemSpec) {
        if let Some(m) = self.mesh {
            spec.mesh.intervals = m;
        }
        if let Some(n) = self.trunc {
            spec.truncation = n;
        }
        if let Some(t) = self.tol {
            spec.iteration.tolerance = t;
        }
    }
}

fn report_cells<T: fmt::Display>(r: &RegimeReport<T>, cell: impl Fn(&T) -> Cell) -> Vec<Cell> {
    let opt = |x: &Option<T>| x.as_ref().map_or(Cell::Missing, &cell);
    vec![
        Cell::Int(r.dim as u64),
        cell(&r.theta),
        cell(&r.q),
        Cell::Text(r.regime.to_string()),
        cell(&r.q_bounded),
        cell(&r.q_lower_energy),
        cell(&r.q_lower_nonenergy),
        Cell::Bool(r.gamma_condition),
        opt(&r.q_double_star),
        opt(&r.summability_exponent),
        opt(&r.s),
        opt(&r.s_conj),
        opt(&r.p_test),
        opt(&r.trace_exponent),
    ]
}

fn run_classify(cli: &Cli, args: &ClassifyArgs) -> Result<Outcome, CliError> {
    let doc: ClassifyDocument = match &cli.config {
        Some(p) => load_document(Some(p))?,
        None => ClassifyDocument {
            dim: None,
            theta: None,
            q: None,
            float: false,
        },
    };
    let missing = |what: &str| CliError::config(format!("classify needs {what} (flag or config)"));
    let config = ClassifyConfig {
        dim: args.dim.or(doc.dim).ok_or_else(|| missing("--dim"))?,
        theta: args
            .theta
            .clone()
            .or_else(|| doc.theta.map(NumberText::into_text))
            .ok_or_else(|| missing("--theta"))?,
        q: args
            .q
            .clone()
            .or_else(|| doc.q.map(NumberText::into_text))
            .ok_or_else(|| missing("--q"))?,
        exact: !(args.float || doc.float),
    };
    let mut table = Table::new(&[
        "dim",
        "theta",
        "q",
        "regime",
        "q_bounded",
        "q_lower_energy",
        "q_lower_nonenergy",
        "gamma_condition",
        "q_double_star",
        "summability_exponent",
        "s",
        "s_conj",
        "p_test",
        "trace_exponent",
    ]);
    let parse = |s: &str| {
        parse_exact(s).ok_or_else(|| CliError::config(format!("not a decimal or a/b number: {s}")))
    };
    let (theta, q) = (parse(&config.theta)?, parse(&config.q)?);
    if config.exact {
        let report = classify(config.dim, theta, q)?.to_strings();
        table.rows.push(report_cells(&report, |s| Cell::Text(s.clone())));
    } else {
        let report = classify(config.dim, theta, q)?.to_f64();
        table.rows.push(report_cells(&report, |x| Cell::Num(*x)));
    }
    Ok(Outcome::ok("classify", to_value(&config), table))
}

fn run_oracle(cli: &Cli) -> Result<Outcome, CliError> {
    let mut config: OracleConfig = load_document(cli.config.as_deref())?;
    if let Some(m) = cli.mesh {
        config.samples = m;
    }
    if config.samples == 0 {
        return Err(CliError::config("samples must be positive"));
    }
    let spec = config.spec;
    spec.validate()?;
    let form = solve_boundary_value(&spec)?;
    if !form.exists {
        let sup = spec.family().sup_f();
        let threshold =
            sup * spec.beta * (spec.dim as f64 - spec.gamma) * spec.radius.powf(spec.gamma - 1.0);
        return Err(Error::Nonexistence(format!(
            "boundary load A R^(1-gamma)/(beta (N-gamma)) = {} reaches sup F = {sup}; \
             with theta = 1 a bounded radial solution exists only for A < {threshold}",
            form.load
        ))
        .into());
    }
    let family = spec.family();
    let mut table = Table::new(&["r", "u", "v"]);
    for i in 0..=config.samples {
        let r = spec.radius * i as f64 / config.samples as f64;
        table
            .rows
            .push(vec![r.into(), form.u(&family, r)?.into(), form.v(r)?.into()]);
    }
    table.note("v_boundary", form.v_boundary);
    table.note("load", form.load);
    table.note("u_center", form.u(&family, 0.0)?);
    Ok(Outcome::ok("oracle", to_value(&config), table))
}

fn solve_summary(table: &mut Table, report: &SolveReport) {
    table.note("picard_iterations", report.picard_iterations);
    table.note("converged", report.converged);
    table.note("final_update_norm", report.final_update_norm);
    table.note("weak_residual", report.weak_residual);
    table.note("linear_residual", report.linear_residual);
    table.note("truncation_active", report.truncation_active);
    table.note("truncation", report.truncation);
}

fn run_solve(cli: &Cli) -> Result<Outcome, CliError> {
    let mut spec: ProblemSpec = load_document(cli.config.as_deref())?;
    cli.override_problem(&mut spec);
    spec.validate()?;
    let report = picard_solve(&spec)?;
    let flux = radial_flux(&spec, &report.solution);
    let mut table = Table::new(&["r", "u", "v", "flux"]);
    let u = &report.solution;
    for (i, &r) in u.nodes().iter().enumerate() {
        table.rows.push(vec![
            r.into(),
            u.values()[i].into(),
            report.v_equiv.values()[i].into(),
            flux[i].into(),
        ]);
    }
    solve_summary(&mut table, &report);
    Ok(Outcome::ok("solve", to_value(&spec), table))
}

fn run_sweep(cli: &Cli) -> Result<Outcome, CliError> {
    let mut config: SweepConfig = load_document(cli.config.as_deref())?;
    cli.override_problem(&mut config.problem);
    config.problem.validate()?;
    if config.axis.values.is_empty() {
        return Err(CliError::config("sweep axis has no values"));
    }
    let param = config.axis.parameter;
    let members = config
        .axis
        .values
        .iter()
        .map(|&v| param.apply(&config.problem, v))
        .collect::<Result<Vec<_>, _>>()?;
    let reports = members
        .par_iter()
        .map(|spec| match picard_solve(spec) {
            Ok(r) => Ok(r),
            Err(Error::NonConvergence(nc)) => Ok(nc.report),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&[
        param.name(),
        "max_abs",
        "boundary_value",
        "picard_iterations",
        "converged",
        "weak_residual",
        "linear_residual",
        "truncation_active",
    ]);
    for (&v, r) in config.axis.values.iter().zip(&reports) {
        table.rows.push(vec![
            v.into(),
            r.max_abs().into(),
            r.solution.boundary_value().into(),
            r.picard_iterations.into(),
            r.converged.into(),
            r.weak_residual.into(),
            r.linear_residual.into(),
            r.truncation_active.into(),
        ]);
    }
    let all = reports.iter().all(|r| r.converged);
    table.note("members", reports.len());
    table.note("all_converged", all);
    let mut outcome = Outcome::ok("sweep", to_value(&config), table);
    if !all {
        outcome.status = ExitStatus::NonConvergence;
    }
    Ok(outcome)
}

/// One pointwise-inequality sample: `p` in `[1+1e-6, 10]`, `theta` in `(0, 1]`,
/// `t` uniform on `[0, 1e6]` or log-uniform on `[1e-8, 1e6]`.
pub fn pointwise_sample(rng: &mut impl Rng) -> (f64, f64, f64) {
    let p = rng.gen_range(1.0 + 1e-6..=10.0);
    let theta = 1.0 - rng.gen_range(0.0..1.0);
    let t = if rng.gen_bool(0.5) {
        rng.gen_range(0.0..=1e6)
    } else {
        10f64.powf(rng.gen_range(-8.0..=6.0))
    };
    (p, theta, t)
}

fn run_verify(cli: &Cli) -> Result<Outcome, CliError> {
    let mut config: VerifyConfig = load_document(cli.config.as_deref())?;
    match &mut config {
        VerifyConfig::Energy { problem, .. } | VerifyConfig::W1s { problem, .. } => {
            cli.override_problem(problem)
        }
        VerifyConfig::Pointwise { seed, .. } => {
            if let Some(s) = cli.seed {
                *seed = s;
            }
        }
        VerifyConfig::Linfty { .. } => {}
    }
    let table = match &config {
        VerifyConfig::Linfty { base, amplitudes } => {
            let specs: Vec<_> = amplitudes
                .iter()
                .map(|&a| RadialExampleSpec {
                    amplitude: a,
                    ..*base
                })
                .collect();
            let rows = estimate_harness_linfty(&specs)?;
            let mut t = Table::new(&[
                "theta", "gamma", "amplitude", "q", "f_lq", "b_of_max", "max_u", "note",
            ]);
            for r in &rows {
                t.rows.push(vec![
                    r.theta.into(),
                    r.gamma.into(),
                    r.amplitude.into(),
                    r.q.into(),
                    r.f_lq.into(),
                    r.b_of_max.into(),
                    r.max_u.into(),
                    r.note.clone().map_or(Cell::Missing, Cell::Text),
                ]);
            }
            t.note("monotone", linfty_monotone(&rows));
            t
        }
        VerifyConfig::Energy {
            problem,
            q,
            amplitudes,
            route,
        } => {
            problem.validate()?;
            let rows = estimate_harness_energy(problem, *q, amplitudes, *route)?;
            let mut t = Table::new(&[
                "amplitude",
                "f_lq",
                "u_norm",
                "ratio",
                "h1",
                "gradient_l2_weighted",
            ]);
            for r in &rows {
                t.rows.push(vec![
                    r.amplitude.into(),
                    r.f_lq.into(),
                    r.u_norm.into(),
                    r.ratio.into(),
                    r.h1.into(),
                    r.gradient_l2_weighted.into(),
                ]);
            }
            let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
            if !ratios.is_empty() {
                let hi = ratios.iter().cloned().fold(f64::MIN, f64::max);
                let lo = ratios.iter().cloned().fold(f64::MAX, f64::min);
                t.note("ratio_spread", hi / lo);
            }
            t
        }
        VerifyConfig::W1s {
            problem,
            q,
            amplitudes,
        } => {
            problem.validate()?;
            let res = estimate_harness_w1s(problem, *q, amplitudes)?;
            let mut t = Table::new(&["amplitude", "f_lq", "s", "w1s"]);
            for r in &res.rows {
                t.rows
                    .push(vec![r.amplitude.into(), r.f_lq.into(), r.s.into(), r.w1s.into()]);
            }
            t.note("slope", res.slope.map_or(Cell::Missing, Cell::Num));
            t
        }
        VerifyConfig::Pointwise { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut t = Table::new(&["p", "theta", "t", "lhs", "rhs", "holds"]);
            let mut violations = 0usize;
            for _ in 0..*samples {
                let (p, theta, x) = pointwise_sample(&mut rng);
                let c = check_pointwise_inequality(p, theta, x)?;
                violations += usize::from(!c.holds);
                t.rows.push(vec![
                    p.into(),
                    theta.into(),
                    x.into(),
                    c.lhs.into(),
                    c.rhs.into(),
                    c.holds.into(),
                ]);
            }
            t.note("violations", violations);
            t
        }
    };
    Ok(Outcome::ok("verify", to_value(&config), table))
}

/// Runs a parsed command without writing anything.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Classify(args) => run_classify(cli, args),
        Command::Oracle => run_oracle(cli),
        Command::Solve => run_solve(cli),
        Command::Sweep => run_sweep(cli),
        Command::Verify => run_verify(cli),
    }
}

/// Runs a parsed command and writes its output; returns the exit status.
pub fn run(cli: &Cli) -> Result<ExitStatus, CliError> {
    let outcome = execute(cli)?;
    let format = cli.format.unwrap_or(match cli.command {
        Command::Classify(_) => Format::Json,
        _ => Format::Csv,
    });
    let text = render(outcome.command, &outcome.config, &outcome.table, format);
    match &cli.out {
        Some(path) => write_atomic(path, &text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
        }
    }
    Ok(outcome.status)
}

/// Entry point for the binary: parses `args`, runs, reports errors on stderr
/// and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitStatus::InvalidConfig.code()
            } else {
                ExitStatus::Success.code()
            };
        }
    };
    match run(&cli) {
        Ok(status) => {
            if status != ExitStatus::Success {
                eprintln!("degrobin: finished with status {}", status.code());
            }
            status.code()
        }
        Err(e) => {
            eprintln!("degrobin: {e}");
            e.status.code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("degrobin").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn classify_quick_flags_exact() {
        let cli = parse(&["classify", "--dim", "3", "--theta", "0.5", "--q", "1.4"]);
        let out = execute(&cli).unwrap();
        let row = &out.table.rows[0];
        let col = |name: &str| {
            let i = out.table.columns.iter().position(|c| c == name).unwrap();
            row[i].clone()
        };
        assert_eq!(col("regime"), Cell::Text("Energy".into()));
        assert_eq!(col("q_double_star"), Cell::Text("21".into()));
        assert_eq!(col("q_lower_nonenergy"), Cell::Text("9/7".into()));
    }

    #[test]
    fn classify_missing_flag_is_config_error() {
        let cli = parse(&["classify", "--dim", "3", "--theta", "0.5"]);
        assert_eq!(execute(&cli).err().unwrap().status, ExitStatus::InvalidConfig);
    }

    #[test]
    fn csv_quoting_and_tsv_header() {
        let mut t = Table::new(&["a", "note"]);
        t.rows.push(vec![Cell::Num(1.5), Cell::Text("x, y".into())]);
        t.note("k", true);
        let cfg = serde_json::json!({"x": 1});
        let csv = render("solve", &cfg, &t, Format::Csv);
        assert_eq!(
            csv,
            "# degrobin solve\n# config: {\"x\":1}\n# k: true\na,note\n1.5,\"x, y\"\n"
        );
        let tsv = render("solve", &cfg, &t, Format::Tsv);
        assert!(tsv.contains("# a\tnote\n1.5\tx, y\n"));
        let json: Value = serde_json::from_str(&render("solve", &cfg, &t, Format::Json)).unwrap();
        assert_eq!(json["result"]["rows"][0]["a"], 1.5);
        assert_eq!(json["config"]["x"], 1);
    }

    #[test]
    fn number_formatting() {
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(1.5e-11), "1.5e-11");
        assert_eq!(format_number(2.5), "2.5");
        assert_eq!(format_number(3e20), "3e20");
        assert_eq!(format_number(f64::INFINITY), "inf");
        for x in [1.0 / 3.0, 1e-300, 123456.789] {
            assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn sweep_parameter_validation() {
        let base = ProblemSpec::power(3, 1.0, 1.0, 0.5, 1.0, 0.0);
        assert!(SweepParameter::Intervals.apply(&base, 64.5).is_err());
        assert!(SweepParameter::Theta.apply(&base, 1.5).is_err());
        let s = SweepParameter::Amplitude.apply(&base, 3.0).unwrap();
        assert_eq!(s.source, Source::Power { amplitude: 3.0, gamma: 0.0 });
    }

    #[test]
    fn pointwise_samples_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let (p, theta, t) = pointwise_sample(&mut rng);
            assert!((1.0 + 1e-6..=10.0).contains(&p));
            assert!(theta > 0.0 && theta <= 1.0);
            assert!((0.0..=1e6).contains(&t));
        }
    }
}
