//! The `halfgasket` command line: parse boundary-data/config files,
//! dispatch to the library modules, and emit CSV/JSON tables.
//!
//! Contracts shared by every subcommand:
//! * output is byte-identical across repeated runs with the same
//!   arguments, environment, and input files;
//! * exact scalars are serialized as `p/q` strings (bare integers when
//!   `q = 1`), floats as the shortest round-tripping decimal;
//! * exit code 0 on success, 2 on domain/validation errors (bad flags,
//!   malformed files, level caps, non-convergent data, I/O), 3 on
//!   computation errors (failed convergence, truncation, internal
//!   consistency), with diagnostics on the error stream;
//! * `HALFGASKET_MAX_LEVEL` overrides the default graph-level cap of 10.
//!
//! CSV column contracts: `graph` → `u,v`; `solve` → `m,point,value`;
//! `energy` → `m,partial`; `flux` → `m,eta`; `dtn apply` → `m,eta`;
//! `dtn invert` → `m,a`; `green` → `x,y,value`; `poisson` →
//! `vertex,value`; `trace` → `m,a,eta`; `extend` →
//! `m,axis,left,right,lap_left,lap_right`; `spectra` →
//! `value,multiplicity,even,odd`; `spectra --census` →
//! `series,birth_level,side,formula_total,formula_half,graph_total,graph_half,weighted,matches`.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::bvp::{energy_report, lambda_star, ContinuousSolution, EnergyVerdict, VerdictMethod};
use crate::error::{Error, Result};
use crate::flux::{
    apex_flux, dtn_apply, dtn_invert, eta_from_data, ApexExistence, ApexFluxReport, APEX_WINDOW,
};
use crate::gasket::{LevelGraph, Side, Vertex};
use crate::green::{green_eval, green_omega, solve_poisson, GreenMode};
use crate::harmonic::CellFn;
use crate::scalar::{parse_rational, scalar_from_json, Rational, Scalar};
use crate::seq::{boundary_from_str, modeseq_from_json, BoundarySeq};
use crate::spectra::{series_census, symmetry_counts, BoundaryCondition, CensusSide};
use crate::trace::{
    extend_half, extend_trace, restrict_bvp, restrict_piecewise, trace_membership, HalfFunction,
    PiecewiseBiharmonic, TracePair,
};

/// Graph-level cap when `HALFGASKET_MAX_LEVEL` is unset.
pub const DEFAULT_MAX_LEVEL: usize = 10;

/// Hard cap on table/truncation windows (guards accidental huge loops).
const MAX_TRUNCATION: usize = 10_000;

/// Hard cap on the Dirichlet-to-Neumann truncation order (dense solves).
const MAX_DTN_TRUNCATION: usize = 500;

/// Numeric backend selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    /// Exact arbitrary-precision rationals.
    #[value(name = "rational")]
    Rational,
    /// IEEE double precision.
    #[value(name = "float64", alias = "float")]
    Float64,
}

/// Output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    /// Pretty-printed JSON with sorted keys.
    #[value(name = "json")]
    Json,
    /// Plain comma-separated table with a header row.
    #[value(name = "csv")]
    Csv,
}

/// Which domain a graph-backed subcommand works on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Region {
    /// The whole gasket.
    #[value(name = "sg")]
    Sg,
    /// The closed left half.
    #[value(name = "omega")]
    Omega,
}

/// What a parsed command line boils down to; [`RunConfig::validate`]
/// holds the cross-field rules every subcommand obeys.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Subcommand name (`"graph"`, `"solve"`, …).
    pub subcommand: &'static str,
    /// Truncation/window size `M` (0 when the subcommand has none).
    pub truncation: usize,
    /// Graph level, for subcommands that build level graphs.
    pub level: Option<usize>,
    /// Numeric backend.
    pub backend: BackendKind,
    /// Comparison tolerance for float-backend report checks.
    pub tolerance: f64,
    /// Input data file, when the subcommand reads one.
    pub input: Option<PathBuf>,
    /// Output encoding.
    pub format: OutputFormat,
}

impl RunConfig {
    /// Cross-field validation: the rational backend cannot run
    /// eigensolves, truncation windows are capped, and levels respect
    /// the (possibly overridden) level cap.
    pub fn validate(&self) -> Result<()> {
        if self.subcommand == "spectra" && self.backend == BackendKind::Rational {
            return Err(Error::Domain(
                "spectra needs a floating-point eigensolve; rerun with --backend float64 \
                 (level-graph eigenvalues are irrational in general)"
                    .into(),
            ));
        }
        let trunc_cap = if self.subcommand == "dtn" { MAX_DTN_TRUNCATION } else { MAX_TRUNCATION };
        if self.truncation > trunc_cap {
            return Err(Error::Domain(format!(
                "truncation window {} exceeds the cap {trunc_cap} for `{}`",
                self.truncation, self.subcommand
            )));
        }
        if let Some(level) = self.level {
            let cap = level_cap()?;
            if level > cap {
                return Err(Error::LevelCap { requested: level, max: cap });
            }
        }
        Ok(())
    }
}

/// Exit code for a library error: validation-type failures exit 2,
/// computation-type failures exit 3.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_)
        | Error::Parse(_)
        | Error::LevelCap { .. }
        | Error::NonConvergent(_)
        | Error::Io(_) => 2,
        Error::Convergence(_) | Error::Truncation(_) | Error::Consistency(_) => 3,
    }
}

#[derive(Parser)]
#[command(
    name = "halfgasket",
    version,
    about = "Harmonic calculus on the Sierpinski gasket and its left half",
    color = clap::ColorChoice::Never,
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Export a level graph: edge list (CSV) or vertices-with-flags (JSON).
    Graph(GraphArgs),
    /// Solve the axis boundary value problem in closed form.
    Solve(SolveArgs),
    /// Energy of the half-domain solution: verdict, exact total, bounds.
    Energy(EnergyArgs),
    /// Axis flux sequence and the apex normal derivative.
    Flux(FluxArgs),
    /// Dirichlet-to-Neumann map: boundary values to fluxes and back.
    Dtn(DtnArgs),
    /// Evaluate the Green's function at a pair of points.
    Green(GreenArgs),
    /// Solve the Poisson problem and print the vertex values.
    Poisson(PoissonArgs),
    /// Boundary trace of the solution: sequences, norms, membership.
    Trace(TraceArgs),
    /// Extension operators: whole-gasket from a trace, or across the axis.
    Extend(ExtendArgs),
    /// Level-graph eigenvalues with symmetry splits; eigenvalue census.
    Spectra(SpectraArgs),
}

#[derive(Args)]
struct GraphArgs {
    /// Graph level m (vertices of V_m).
    #[arg(long)]
    level: usize,
    /// Whole gasket or its closed left half.
    #[arg(long, value_enum, default_value = "sg")]
    domain: Region,
    /// csv: edge list `u,v` (canonical vertex labels).
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Args)]
struct SolveArgs {
    /// Boundary-data JSON file: {"a0": s, "terms": [...]}.
    #[arg(long)]
    data: PathBuf,
    /// Largest axis index m in the emitted table.
    #[arg(long, default_value_t = 8)]
    trunc: usize,
    #[arg(long, value_enum, default_value = "rational")]
    backend: BackendKind,
    /// csv columns: m,point,value.
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Args)]
struct EnergyArgs {
    /// Boundary-data JSON file.
    #[arg(long)]
    data: PathBuf,
    /// Number of partial sums reported.
    #[arg(long, default_value_t = 12)]
    window: usize,
    #[arg(long, value_enum, default_value = "rational")]
    backend: BackendKind,
    /// csv columns: m,partial.
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
}

#[derive(Args)]
struct FluxArgs {
    /// Boundary-data JSON file.
    #[arg(long)]
    data: PathBuf,
    /// Largest flux index m in the table (m = 0 is the closure seed).
    #[arg(long, default_value_t = 12)]
    trunc: usize,
    #[arg(long, value_enum, default_value = "rational")]
    backend: BackendKind,
    /// csv columns: m,eta.
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Args)]
struct DtnArgs {
    #[command(subcommand)]
    action: DtnAction,
}

#[derive(Subcommand)]
enum DtnAction {
    /// Boundary values to fluxes: emit (m, eta_m) for m = 1..=N.
    Apply(DtnApplyArgs),
    /// Fluxes to boundary values: emit (m, a_m) for m = 1..=N.
    Invert(DtnInvertArgs),
}

#[derive(Args)]
struct DtnApplyArgs {
    /// Boundary-data JSON file.
    #[arg(long)]
    data: PathBuf,
    /// Truncation order N.
    #[arg(long, default_value_t = 40)]
    trunc: usize,
    #[arg(long, value_enum, default_value = "rational")]
    backend: BackendKind,
    /// csv columns: m,eta.
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
}

#[derive(Args)]
struct DtnInvertArgs {
    /// Flux JSON file: {"a0": s, "eta": [s, ...]} (eta_1, eta_2, ...).
    #[arg(long)]
    data: PathBuf,
    /// Use only the first N fluxes (defaults to all provided).
    #[arg(long)]
    trunc: Option<usize>,
    #[arg(long, value_enum, default_value = "rational")]
    backend: BackendKind,
    /// csv columns: m,a.
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
}

#[derive(Args)]
struct GreenArgs {
    /// First point: `word:corner` or `x:m` / `y:m` / `z:m` / `q:j`.
    #[arg(long)]
    x: String,
    /// Second point, same syntax.
    #[arg(long)]
    y: String,
    /// Kernel route; closed forms constrain the first point.
    #[arg(long, value_enum, default_value = "series")]
    mode: GreenModeArg,
    /// Series length (defaults to the exactness threshold, the smaller
    /// argument level).
    #[arg(long)]
    terms: Option<usize>,
    /// Whole-gasket kernel or the reflection-antisymmetrized half-domain
    /// kernel (series route only).
    #[arg(long, value_enum, default_value = "sg")]
    domain: Region,
    #[arg(long, value_enum, default_value = "rational")]
    backend: BackendKind,
    /// csv columns: x,y,value.
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GreenModeArg {
    /// Spline-series partial sum; exact once terms reach the smaller
    /// argument level.
    #[value(name = "series")]
    Series,
    /// Closed form; the first point must be an axis midpoint x_m.
    #[value(name = "closed-x")]
    ClosedX,
    /// Closed form; the first point must be a right outer-edge point z_m.
    #[value(name = "closed-z")]
    ClosedZ,
}

#[derive(Args)]
struct PoissonArgs {
    /// Source term; `const:<scalar>` is the supported form.
    #[arg(long, default_value = "const:1")]
    f: String,
    /// Graph level of the solve.
    #[arg(long)]
    level: usize,
    /// Whole gasket (zero on the three corners) or left half (zero on
    /// the axis and corners, via odd reflection).
    #[arg(long, value_enum, default_value = "sg")]
    domain: Region,
    #[arg(long, value_enum, default_value = "rational")]
    backend: BackendKind,
    /// csv columns: vertex,value.
    #[arg(long, alias = "out", value_enum, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Args)]
struct TraceArgs {
    /// Boundary-data JSON file.
    #[arg(long)]
    data: PathBuf,
    /// Largest index m in the emitted value/flux table.
    #[arg(long, default_value_t = 12)]
    trunc: usize,
    #[arg(long, value_enum, default_value = "rational")]
    backend: BackendKind,
    /// csv columns: m,a,eta.
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
}

#[derive(Args)]
struct ExtendArgs {
    /// E: whole-gasket extension of a trace pair. Eomega: extend a
    /// half-domain solution across the axis.
    #[arg(long, value_enum)]
    mode: ExtendMode,
    /// For E: {"a": [terms...], "eta": [terms...]} (index 0 = closure
    /// slot). For Eomega: a boundary-data document.
    #[arg(long)]
    data: PathBuf,
    /// Largest cell index m in the emitted table and residual checks.
    #[arg(long, default_value_t = 12)]
    trunc: usize,
    /// Absolute tolerance for float-backend roundtrip comparison.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, value_enum, default_value = "rational")]
    backend: BackendKind,
    /// csv columns: m,axis,left,right,lap_left,lap_right.
    #[arg(long = "report", value_enum, default_value = "json")]
    report: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExtendMode {
    /// Right inverse of the trace restriction on the whole gasket.
    #[value(name = "E", alias = "e")]
    Whole,
    /// Half-to-whole extension preserving the left-half function.
    #[value(name = "Eomega", alias = "eomega")]
    AcrossAxis,
}

#[derive(Args)]
struct SpectraArgs {
    /// Graph level (spectra: m <= 4; census: birth levels k <= 3).
    #[arg(long)]
    level: usize,
    /// Boundary condition for the eigenvalue table.
    #[arg(long, value_parser = parse_bc, default_value = "neumann")]
    bc: BoundaryCondition,
    /// Emit the eigenvalue-series census (formula vs graph counts, both
    /// boundary conditions) for birth levels 1..=level instead.
    #[arg(long)]
    census: bool,
    #[arg(long, value_enum, default_value = "float64")]
    backend: BackendKind,
    /// csv columns: value,multiplicity,even,odd.
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
}

fn parse_bc(s: &str) -> std::result::Result<BoundaryCondition, String> {
    s.parse::<BoundaryCondition>().map_err(|e| e.to_string())
}

/// Run the CLI on `args` (without the program name), writing results to
/// `out` and diagnostics to `err`; returns the process exit code.
pub fn run_with(args: &[&str], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let argv = std::iter::once("halfgasket").chain(args.iter().copied());
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    2
                }
            };
        }
    };
    let config = config_of(&cli.command);
    match config.validate().and_then(|()| execute(&cli.command)) {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// The [`RunConfig`] a parsed command resolves to.
fn config_of(cmd: &Command) -> RunConfig {
    let mut c = RunConfig {
        subcommand: "",
        truncation: 0,
        level: None,
        backend: BackendKind::Rational,
        tolerance: 1e-10,
        input: None,
        format: OutputFormat::Json,
    };
    match cmd {
        Command::Graph(a) => {
            c.subcommand = "graph";
            c.level = Some(a.level);
            c.format = a.format;
        }
        Command::Solve(a) => {
            c.subcommand = "solve";
            c.truncation = a.trunc;
            c.backend = a.backend;
            c.input = Some(a.data.clone());
            c.format = a.format;
        }
        Command::Energy(a) => {
            c.subcommand = "energy";
            c.truncation = a.window;
            c.backend = a.backend;
            c.input = Some(a.data.clone());
            c.format = a.format;
        }
        Command::Flux(a) => {
            c.subcommand = "flux";
            c.truncation = a.trunc;
            c.backend = a.backend;
            c.input = Some(a.data.clone());
            c.format = a.format;
        }
        Command::Dtn(a) => {
            c.subcommand = "dtn";
            match &a.action {
                DtnAction::Apply(x) => {
                    c.truncation = x.trunc;
                    c.backend = x.backend;
                    c.input = Some(x.data.clone());
                    c.format = x.format;
                }
                DtnAction::Invert(x) => {
                    c.truncation = x.trunc.unwrap_or(0);
                    c.backend = x.backend;
                    c.input = Some(x.data.clone());
                    c.format = x.format;
                }
            }
        }
        Command::Green(a) => {
            c.subcommand = "green";
            c.truncation = a.terms.unwrap_or(0);
            c.backend = a.backend;
            c.format = a.format;
        }
        Command::Poisson(a) => {
            c.subcommand = "poisson";
            c.level = Some(a.level);
            c.backend = a.backend;
            c.format = a.format;
        }
        Command::Trace(a) => {
            c.subcommand = "trace";
            c.truncation = a.trunc;
            c.backend = a.backend;
            c.input = Some(a.data.clone());
            c.format = a.format;
        }
        Command::Extend(a) => {
            c.subcommand = "extend";
            c.truncation = a.trunc;
            c.backend = a.backend;
            c.tolerance = a.tol;
            c.input = Some(a.data.clone());
            c.format = a.report;
        }
        Command::Spectra(a) => {
            c.subcommand = "spectra";
            c.level = Some(a.level);
            c.backend = a.backend;
            c.format = a.format;
        }
    }
    c
}

/// Dispatch a generic handler on the backend a command selected.
macro_rules! on_backend {
    ($backend:expr, $f:ident($($arg:expr),*)) => {
        match $backend {
            BackendKind::Rational => $f::<Rational>($($arg),*),
            BackendKind::Float64 => $f::<f64>($($arg),*),
        }
    };
}

fn execute(cmd: &Command) -> Result<String> {
    match cmd {
        Command::Graph(a) => graph_cmd(a),
        Command::Solve(a) => on_backend!(a.backend, solve_cmd(a)),
        Command::Energy(a) => on_backend!(a.backend, energy_cmd(a)),
        Command::Flux(a) => on_backend!(a.backend, flux_cmd(a)),
        Command::Dtn(a) => match &a.action {
            DtnAction::Apply(x) => on_backend!(x.backend, dtn_apply_cmd(x)),
            DtnAction::Invert(x) => on_backend!(x.backend, dtn_invert_cmd(x)),
        },
        Command::Green(a) => on_backend!(a.backend, green_cmd(a)),
        Command::Poisson(a) => on_backend!(a.backend, poisson_cmd(a)),
        Command::Trace(a) => on_backend!(a.backend, trace_cmd(a)),
        Command::Extend(a) => on_backend!(a.backend, extend_cmd(a)),
        Command::Spectra(a) => spectra_cmd(a),
    }
}

// ---------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------

/// The active graph-level cap: `HALFGASKET_MAX_LEVEL` when set, else
/// [`DEFAULT_MAX_LEVEL`].
fn level_cap() -> Result<usize> {
    match std::env::var("HALFGASKET_MAX_LEVEL") {
        Ok(text) => text.trim().parse::<usize>().map_err(|_| {
            Error::Parse(format!(
                "HALFGASKET_MAX_LEVEL must be a nonnegative integer, not `{text}`"
            ))
        }),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_MAX_LEVEL),
        Err(std::env::VarError::NotUnicode(_)) => {
            Err(Error::Parse("HALFGASKET_MAX_LEVEL is not valid unicode".into()))
        }
    }
}

fn read_input(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

/// Parse JSON text, reporting the line and column on failure.
fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| {
        Error::Parse(format!(
            "malformed JSON at line {}, column {}: {e}",
            e.line(),
            e.column()
        ))
    })
}

fn load_boundary<S: Scalar>(path: &Path) -> Result<BoundarySeq<S>> {
    boundary_from_str(&read_input(path)?)
}

fn build_region(region: Region, level: usize) -> Result<LevelGraph> {
    match region {
        Region::Sg => LevelGraph::build(level),
        Region::Omega => LevelGraph::build_left_half(level),
    }
}

fn region_name(region: Region) -> &'static str {
    match region {
        Region::Sg => "sg",
        Region::Omega => "omega",
    }
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Left => "left",
        Side::Axis => "axis",
        Side::Right => "right",
    }
}

/// Assemble a CSV document: header line plus one line per row.
fn csv_table(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut text = String::from(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row);
        text.push('\n');
    }
    text
}

/// Pretty-print a JSON value (keys sorted by the map type) plus newline.
fn pretty(v: &Value) -> String {
    let mut text = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    text.push('\n');
    text
}

fn opt_scalar<S: Scalar>(v: Option<S>) -> Value {
    match v {
        Some(x) => Value::String(x.render()),
        None => Value::Null,
    }
}

/// Equality up to `tol` on inexact backends, literal equality on exact.
fn close<S: Scalar>(x: &S, y: &S, tol: f64) -> bool {
    if S::EXACT {
        x == y
    } else {
        (x.clone() - y.clone()).to_f64().abs() <= tol
    }
}

// ---------------------------------------------------------------------
// Subcommand handlers
// ---------------------------------------------------------------------

fn graph_cmd(a: &GraphArgs) -> Result<String> {
    let graph = build_region(a.domain, a.level)?;
    Ok(match a.format {
        OutputFormat::Csv => csv_table(
            "u,v",
            graph
                .edges()
                .iter()
                .map(|&(i, j)| format!("{},{}", graph.vertex(i), graph.vertex(j))),
        ),
        OutputFormat::Json => {
            let vertices: Vec<Value> = graph
                .vertices()
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    json!({
                        "index": i,
                        "label": v.to_string(),
                        "level": v.level(),
                        "boundary": v.is_boundary(),
                        "side": side_name(v.side()),
                        "degree": graph.degree(i),
                    })
                })
                .collect();
            let edges: Vec<Value> =
                graph.edges().iter().map(|&(i, j)| json!([i, j])).collect();
            pretty(&json!({
                "level": a.level,
                "domain": region_name(a.domain),
                "vertices": vertices,
                "edges": edges,
            }))
        }
    })
}

fn solve_cmd<S: Scalar>(a: &SolveArgs) -> Result<String> {
    let data = load_boundary::<S>(&a.data)?;
    let sol = ContinuousSolution::solve(&data)?;
    let mut rows: Vec<(usize, String, S)> = vec![(0, "y:0".into(), data.a0.clone())];
    for m in 1..=a.trunc {
        rows.push((m, format!("x:{m}"), data.a(m)));
        rows.push((m, format!("y:{m}"), sol.u_y().eval(m)));
    }
    Ok(match a.format {
        OutputFormat::Csv => csv_table(
            "m,point,value",
            rows.iter().map(|(m, p, v)| format!("{m},{p},{}", v.render())),
        ),
        OutputFormat::Json => {
            let list: Vec<Value> = rows
                .iter()
                .map(|(m, p, v)| json!({"m": m, "point": p, "value": v.render()}))
                .collect();
            pretty(&json!({
                "a0": data.a0.render(),
                "lambda_star": lambda_star(&data)?.render(),
                "apex": opt_scalar(sol.apex_value().ok()),
                "rows": list,
            }))
        }
    })
}

fn energy_cmd<S: Scalar>(a: &EnergyArgs) -> Result<String> {
    let data = load_boundary::<S>(&a.data)?;
    let report = energy_report(&data, a.window)?;
    Ok(match a.format {
        OutputFormat::Csv => csv_table(
            "m,partial",
            report
                .partials
                .iter()
                .enumerate()
                .map(|(i, v)| format!("{},{}", i + 1, v.render())),
        ),
        OutputFormat::Json => {
            let verdict = match report.verdict {
                EnergyVerdict::Finite => "finite",
                EnergyVerdict::Infinite => "infinite",
                EnergyVerdict::Unclear => "unclear",
            };
            let method = match report.method {
                VerdictMethod::Structural => "structural",
                VerdictMethod::WindowTrend => "window-trend",
            };
            let sandwich = match &report.sandwich {
                Some((lo, hi)) => json!({"lower": lo.render(), "upper": hi.render()}),
                None => Value::Null,
            };
            pretty(&json!({
                "verdict": verdict,
                "method": method,
                "total": opt_scalar(report.total.clone()),
                "sandwich": sandwich,
                "partials": report
                    .partials
                    .iter()
                    .map(|v| Value::String(v.render()))
                    .collect::<Vec<_>>(),
            }))
        }
    })
}

fn apex_json<S: Scalar>(report: &ApexFluxReport<S>) -> Value {
    match &report.existence {
        ApexExistence::Exists { a1, a2, value } => json!({
            "exists": true,
            "A1": a1.render(),
            "A2": a2.render(),
            "value": value.render(),
        }),
        ApexExistence::Absent { reason } => json!({"exists": false, "reason": reason}),
    }
}

fn flux_cmd<S: Scalar>(a: &FluxArgs) -> Result<String> {
    let data = load_boundary::<S>(&a.data)?;
    let eta = eta_from_data(&data)?;
    let apex = apex_flux(&data, APEX_WINDOW.max(a.trunc))?;
    Ok(match a.format {
        OutputFormat::Csv => csv_table(
            "m,eta",
            (0..=a.trunc).map(|m| format!("{m},{}", eta.eval(m).render())),
        ),
        OutputFormat::Json => {
            let rows: Vec<Value> = (0..=a.trunc)
                .map(|m| json!({"m": m, "eta": eta.eval(m).render()}))
                .collect();
            pretty(&json!({"apex": apex_json(&apex), "rows": rows}))
        }
    })
}

/// Emit `(m, value)` pairs, the shared shape of both map directions.
fn pairs_out<S: Scalar>(values: &[S], column: &str, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => csv_table(
            &format!("m,{column}"),
            values
                .iter()
                .enumerate()
                .map(|(k, v)| format!("{},{}", k + 1, v.render())),
        ),
        OutputFormat::Json => pretty(&Value::Array(
            values
                .iter()
                .enumerate()
                .map(|(k, v)| json!([k + 1, v.render()]))
                .collect(),
        )),
    }
}

fn dtn_apply_cmd<S: Scalar>(a: &DtnApplyArgs) -> Result<String> {
    let data = load_boundary::<S>(&a.data)?;
    let eta = dtn_apply(&data, a.trunc)?;
    Ok(pairs_out(&eta, "eta", a.format))
}

/// Parse a flux document `{"a0": s, "eta": [s, ...]}`.
fn load_flux_doc<S: Scalar>(path: &Path) -> Result<(S, Vec<S>)> {
    let v = parse_json(&read_input(path)?)?;
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Parse("flux data must be a JSON object".into()))?;
    for key in obj.keys() {
        if key != "a0" && key != "eta" {
            return Err(Error::Parse(format!("unknown flux-data field `{key}`")));
        }
    }
    let a0 = match obj.get("a0") {
        Some(x) => scalar_from_json::<S>(x)?,
        None => S::zero(),
    };
    let eta = obj
        .get("eta")
        .ok_or_else(|| Error::Parse("flux data is missing the `eta` array".into()))?
        .as_array()
        .ok_or_else(|| Error::Parse("`eta` must be an array of scalars".into()))?
        .iter()
        .map(scalar_from_json::<S>)
        .collect::<Result<Vec<S>>>()?;
    Ok((a0, eta))
}

fn dtn_invert_cmd<S: Scalar>(a: &DtnInvertArgs) -> Result<String> {
    let (a0, mut eta) = load_flux_doc::<S>(&a.data)?;
    if let Some(n) = a.trunc {
        if n > eta.len() {
            return Err(Error::Domain(format!(
                "--trunc {n} asks for more fluxes than the {} provided",
                eta.len()
            )));
        }
        eta.truncate(n);
    }
    if eta.len() > MAX_DTN_TRUNCATION {
        return Err(Error::Domain(format!(
            "{} fluxes exceed the inversion cap {MAX_DTN_TRUNCATION}",
            eta.len()
        )));
    }
    let a_values = dtn_invert(&eta, &a0)?;
    Ok(pairs_out(&a_values, "a", a.format))
}

fn green_cmd<S: Scalar>(a: &GreenArgs) -> Result<String> {
    let x: Vertex = a.x.parse()?;
    let y: Vertex = a.y.parse()?;
    let terms = a.terms.unwrap_or_else(|| x.level().min(y.level()));
    if terms > MAX_TRUNCATION {
        return Err(Error::Domain(format!(
            "--terms {terms} exceeds the cap {MAX_TRUNCATION}"
        )));
    }
    let (mode_name, value) = match a.domain {
        Region::Sg => match a.mode {
            GreenModeArg::Series => ("series", green_eval(&x, &y, GreenMode::Series(terms))?),
            GreenModeArg::ClosedX => ("closed-x", green_eval(&x, &y, GreenMode::ClosedX)?),
            GreenModeArg::ClosedZ => ("closed-z", green_eval(&x, &y, GreenMode::ClosedZ)?),
        },
        Region::Omega => {
            if a.mode != GreenModeArg::Series {
                return Err(Error::Domain(
                    "closed forms cover the whole-gasket kernel; --domain omega uses --mode series"
                        .into(),
                ));
            }
            ("series", green_omega::<S>(&x, &y, terms)?)
        }
    };
    Ok(match a.format {
        OutputFormat::Csv => {
            csv_table("x,y,value", [format!("{x},{y},{}", value.render())])
        }
        OutputFormat::Json => pretty(&json!({
            "x": x.to_string(),
            "y": y.to_string(),
            "domain": region_name(a.domain),
            "mode": mode_name,
            "terms": terms,
            "value": value.render(),
        })),
    })
}

/// Parse a Poisson source spec `const:<scalar>`.
fn parse_source<S: Scalar>(spec: &str) -> Result<S> {
    let body = spec.strip_prefix("const:").ok_or_else(|| {
        Error::Domain(format!(
            "unsupported source `{spec}` (expected `const:<scalar>`, e.g. `const:1`)"
        ))
    })?;
    Ok(S::from_rational(&parse_rational(body)?))
}

fn poisson_cmd<S: Scalar>(a: &PoissonArgs) -> Result<String> {
    let c: S = parse_source(&a.f)?;
    let graph = build_region(a.domain, a.level)?;
    let f = CellFn::constant(&graph, c);
    let u = solve_poisson(&f, &graph)?;
    Ok(match a.format {
        OutputFormat::Csv => csv_table(
            "vertex,value",
            graph
                .vertices()
                .iter()
                .zip(u.values())
                .map(|(v, val)| format!("{v},{}", val.render())),
        ),
        OutputFormat::Json => {
            let values: Vec<Value> = graph
                .vertices()
                .iter()
                .zip(u.values())
                .map(|(v, val)| json!({"vertex": v.to_string(), "value": val.render()}))
                .collect();
            pretty(&json!({
                "level": a.level,
                "domain": region_name(a.domain),
                "f": a.f,
                "values": values,
            }))
        }
    })
}

fn trace_cmd<S: Scalar>(a: &TraceArgs) -> Result<String> {
    let data = load_boundary::<S>(&a.data)?;
    let t = restrict_bvp(&data)?;
    let rows: Vec<(usize, S, S)> =
        (0..=a.trunc).map(|m| (m, t.a.eval(m), t.eta.eval(m))).collect();
    Ok(match a.format {
        OutputFormat::Csv => csv_table(
            "m,a,eta",
            rows.iter()
                .map(|(m, av, ev)| format!("{m},{},{}", av.render(), ev.render())),
        ),
        OutputFormat::Json => {
            let norms = trace_membership(&t);
            let list: Vec<Value> = rows
                .iter()
                .map(|(m, av, ev)| json!({"m": m, "a": av.render(), "eta": ev.render()}))
                .collect();
            pretty(&json!({
                "rows": list,
                "in_sup_space": norms.in_sup_space,
                "in_l2_space": norms.in_l2_space,
                "affine": {
                    "A1": opt_scalar(norms.affine.constant.clone()),
                    "A2": opt_scalar(norms.affine.geometric.clone()),
                },
                "lip": norms.lip.render(),
                "eta_l2_sq": norms.eta_l2_sq.render(),
                "sup_space_norm": norms.sup_space_norm.render(),
                "l2_space_norm_sq": norms.l2_space_norm_sq.render(),
            }))
        }
    })
}

/// Parse a trace document `{"a": [terms...], "eta": [terms...]}`.
fn load_trace_doc<S: Scalar>(path: &Path) -> Result<TracePair<S>> {
    let v = parse_json(&read_input(path)?)?;
    let obj = v.as_object().ok_or_else(|| {
        Error::Parse("trace data must be a JSON object with `a` and `eta` term arrays".into())
    })?;
    for key in obj.keys() {
        if key != "a" && key != "eta" {
            return Err(Error::Parse(format!("unknown trace-data field `{key}`")));
        }
    }
    let a = modeseq_from_json::<S>(
        obj.get("a")
            .ok_or_else(|| Error::Parse("trace data is missing `a`".into()))?,
    )?;
    let eta = modeseq_from_json::<S>(
        obj.get("eta")
            .ok_or_else(|| Error::Parse("trace data is missing `eta`".into()))?,
    )?;
    Ok(TracePair::new(a, eta))
}

/// Shared table/report emission for both extension operators.
fn extend_report<S: Scalar>(
    mode: &str,
    u: &PiecewiseBiharmonic<S>,
    trunc: usize,
    extras: Value,
    format: OutputFormat,
) -> String {
    match format {
        OutputFormat::Csv => csv_table(
            "m,axis,left,right,lap_left,lap_right",
            (0..=trunc).map(|m| {
                format!(
                    "{m},{},{},{},{},{}",
                    u.axis().eval(m).render(),
                    u.left().eval(m).render(),
                    u.right().eval(m).render(),
                    u.lap_left().eval(m).render(),
                    u.lap_right().eval(m).render(),
                )
            }),
        ),
        OutputFormat::Json => {
            let glue = crate::trace::verify_gluing(u, trunc.max(1));
            let rows: Vec<Value> = (0..=trunc)
                .map(|m| {
                    json!({
                        "m": m,
                        "axis": u.axis().eval(m).render(),
                        "left": u.left().eval(m).render(),
                        "right": u.right().eval(m).render(),
                        "lap_left": u.lap_left().eval(m).render(),
                        "lap_right": u.lap_right().eval(m).render(),
                    })
                })
                .collect();
            let mut doc = json!({
                "mode": mode,
                "rows": rows,
                "gluing": {"all_zero": glue.all_zero, "max_abs": glue.max_abs.render()},
                "apex": opt_scalar(u.apex_value().ok()),
                "laplacian_sup": u.laplacian_sup().render(),
                "laplacian_l2_sq": u.laplacian_l2_sq().render(),
            });
            if let (Value::Object(doc), Value::Object(extra)) = (&mut doc, extras) {
                for (k, v) in extra {
                    doc.insert(k, v);
                }
            }
            pretty(&doc)
        }
    }
}

fn extend_cmd<S: Scalar>(a: &ExtendArgs) -> Result<String> {
    Ok(match a.mode {
        ExtendMode::Whole => {
            let t = load_trace_doc::<S>(&a.data)?;
            let u = extend_trace(&t);
            let back = restrict_piecewise(&u);
            let roundtrip = (0..=a.trunc + 1).all(|m| {
                close(&back.a.eval(m), &t.a.eval(m), a.tol)
                    && close(&back.eta.eval(m), &t.eta.eval(m), a.tol)
            });
            extend_report(
                "E",
                &u,
                a.trunc,
                json!({"roundtrip_matches_input": roundtrip}),
                a.report,
            )
        }
        ExtendMode::AcrossAxis => {
            let data = load_boundary::<S>(&a.data)?;
            let half = HalfFunction::from_bvp(&data)?;
            let ext = extend_half(&half);
            extend_report(
                "Eomega",
                &ext.function,
                a.trunc,
                json!({
                    "in_sup_domain": ext.in_sup_domain,
                    "in_l2_domain": ext.in_l2_domain,
                }),
                a.report,
            )
        }
    })
}

/// Eigenvalue label: the exact integer when the group is tagged (the tag
/// is rationally verified), otherwise the float representative.
fn eigenvalue_label(value: f64, integer: Option<i64>) -> String {
    match integer {
        Some(n) => n.to_string(),
        None => format!("{value}"),
    }
}

fn census_side_json(side: &CensusSide) -> Value {
    json!({
        "formula_total": side.formula_total,
        "formula_half": side.formula_half,
        "graph_total": side.graph_total,
        "graph_half": side.graph_half,
        "cell_weighted": side.cell_weighted,
        "matches": side.matches,
    })
}

fn census_side_csv(series: i64, k: usize, name: &str, side: &CensusSide) -> String {
    format!(
        "{series},{k},{name},{},{},{},{},{},{}",
        side.formula_total.map(|t| t.to_string()).unwrap_or_default(),
        side.formula_half,
        side.graph_total,
        side.graph_half,
        side.cell_weighted,
        side.matches,
    )
}

fn spectra_cmd(a: &SpectraArgs) -> Result<String> {
    if a.census {
        let rows = series_census(a.level)?;
        return Ok(match a.format {
            OutputFormat::Csv => csv_table(
                "series,birth_level,side,formula_total,formula_half,graph_total,graph_half,weighted,matches",
                rows.iter().flat_map(|r| {
                    [
                        census_side_csv(r.series, r.birth_level, "neumann", &r.neumann),
                        census_side_csv(r.series, r.birth_level, "dirichlet", &r.dirichlet),
                    ]
                }),
            ),
            OutputFormat::Json => pretty(&Value::Array(
                rows.iter()
                    .map(|r| {
                        json!({
                            "series": r.series,
                            "birth_level": r.birth_level,
                            "neumann": census_side_json(&r.neumann),
                            "dirichlet": census_side_json(&r.dirichlet),
                        })
                    })
                    .collect(),
            )),
        });
    }
    let report = symmetry_counts(a.level, a.bc)?;
    Ok(match a.format {
        OutputFormat::Csv => csv_table(
            "value,multiplicity,even,odd",
            report.splits.iter().map(|s| {
                format!(
                    "{},{},{},{}",
                    eigenvalue_label(s.value, s.integer),
                    s.multiplicity,
                    s.even,
                    s.odd
                )
            }),
        ),
        OutputFormat::Json => {
            let eigenvalues: Vec<Value> = report
                .splits
                .iter()
                .flat_map(|s| {
                    std::iter::repeat(Value::String(eigenvalue_label(s.value, s.integer)))
                        .take(s.multiplicity)
                })
                .collect();
            let groups: Vec<Value> = report
                .splits
                .iter()
                .map(|s| {
                    json!({
                        "value": eigenvalue_label(s.value, s.integer),
                        "multiplicity": s.multiplicity,
                        "even": s.even,
                        "odd": s.odd,
                        "integer": s.integer,
                    })
                })
                .collect();
            let series: Vec<Value> = report
                .series
                .iter()
                .map(|r| {
                    json!({
                        "series": r.series,
                        "birth_level": r.birth_level,
                        "side": census_side_json(&r.side),
                    })
                })
                .collect();
            pretty(&json!({
                "level": report.level,
                "bc": report.bc.to_string(),
                "dim": report.dim,
                "eigenvalues": eigenvalues,
                "groups": groups,
                "even_total": report.even_total,
                "odd_total": report.odd_total,
                "expected_half_total": report.expected_half_total,
                "half_total_matches": report.half_total_matches,
                "series": series,
            }))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gasket::x_point;
    use std::sync::Mutex;

    /// Serializes tests that read or mutate `HALFGASKET_MAX_LEVEL` (every
    /// level-bearing subcommand reads it during validation).
    static ENV_LOCK: Mutex<()> = Mutex::new(());

    fn env_guard() -> std::sync::MutexGuard<'static, ()> {
        ENV_LOCK.lock().unwrap_or_else(|e| e.into_inner())
    }

    struct TempFile(PathBuf);

    impl TempFile {
        fn new(name: &str, text: &str) -> Self {
            let path = std::env::temp_dir()
                .join(format!("halfgasket-cli-{}-{name}", std::process::id()));
            std::fs::write(&path, text).unwrap();
            TempFile(path)
        }

        fn path(&self) -> &str {
            self.0.to_str().unwrap()
        }
    }

    impl Drop for TempFile {
        fn drop(&mut self) {
            let _ = std::fs::remove_file(&self.0);
        }
    }

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_with(args, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    /// Boundary data of the skew harmonic restricted to the left half:
    /// value 1 at the outer corner, 0 along the axis.
    const SKEW: &str = r#"{"a0": "1", "terms": []}"#;

    #[test]
    fn solve_emits_skew_closed_form_table() {
        let f = TempFile::new("solve-skew.json", SKEW);
        let (code, out, err) = run(&["solve", "--data", f.path(), "--trunc", "8"]);
        assert_eq!(code, 0, "stderr: {err}");
        assert!(out.starts_with("m,point,value\n"));
        assert!(out.contains("\n0,y:0,1\n"));
        assert!(out.contains("\n1,y:1,1/5\n"));
        assert!(out.contains("\n3,y:3,1/125\n"));
        assert!(out.contains("\n3,x:3,0\n"));
    }

    #[test]
    fn solve_json_reports_apex_and_multiplier() {
        let f = TempFile::new("solve-skew-json.json", SKEW);
        let (code, out, _) = run(&["solve", "--data", f.path(), "--format", "json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["apex"], json!("0"));
        assert_eq!(v["a0"], json!("1"));
        assert!(v["lambda_star"].is_string());
        assert_eq!(v["rows"][0], json!({"m": 0, "point": "y:0", "value": "1"}));
    }

    #[test]
    fn solve_float_backend_runs() {
        let f = TempFile::new("solve-skew-float.json", SKEW);
        let (code, out, _) =
            run(&["solve", "--data", f.path(), "--backend", "float", "--trunc", "2"]);
        assert_eq!(code, 0);
        assert!(out.contains("\n0,y:0,1\n"));
        assert!(out.contains("\n1,x:1,0\n"));
    }

    #[test]
    fn energy_reports_exact_total() {
        let f = TempFile::new("energy-skew.json", SKEW);
        let (code, out, _) = run(&["energy", "--data", f.path()]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["total"], json!("3"));
        assert_eq!(v["verdict"], json!("finite"));
        assert_eq!(v["method"], json!("structural"));

        let (code, out, _) = run(&["energy", "--data", f.path(), "--format", "csv"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("m,partial\n1,14/5\n"));
    }

    #[test]
    fn flux_table_has_exact_skew_values() {
        let f = TempFile::new("flux-skew.json", SKEW);
        let (code, out, _) = run(&["flux", "--data", f.path(), "--trunc", "4"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("m,eta\n0,-6\n1,-2\n2,-2/3\n"));

        let (code, out, _) = run(&["flux", "--data", f.path(), "--format", "json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["apex"]["exists"], json!(true));
        assert_eq!(v["apex"]["value"], json!("0"));
    }

    #[test]
    fn flux_reports_nonexistent_apex_without_failing() {
        let f = TempFile::new(
            "flux-slow.json",
            r#"{"a0": "0", "terms": [{"type": "geometric", "A1": "0", "A2": "1", "r": "4/5"}]}"#,
        );
        let (code, out, _) = run(&["flux", "--data", f.path(), "--format", "json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["apex"]["exists"], json!(false));
        assert!(v["apex"]["reason"].is_string());
    }

    #[test]
    fn dtn_apply_then_invert_roundtrips_exactly() {
        let f = TempFile::new(
            "dtn-data.json",
            r#"{"a0": "1", "terms": [{"type": "explicit", "values": ["0", "1/2", "1/4"]}]}"#,
        );
        let (code, out, _) = run(&["dtn", "apply", "--data", f.path(), "--trunc", "4"]);
        assert_eq!(code, 0);
        let pairs: Vec<(usize, String)> = serde_json::from_str(&out).unwrap();
        assert_eq!(pairs.len(), 4);
        assert_eq!(pairs[0].0, 1);

        let eta_list: Vec<Value> =
            pairs.iter().map(|(_, s)| Value::String(s.clone())).collect();
        let doc = serde_json::to_string(&json!({"a0": "1", "eta": eta_list})).unwrap();
        let g = TempFile::new("dtn-eta.json", &doc);
        let (code, out, _) = run(&["dtn", "invert", "--data", g.path()]);
        assert_eq!(code, 0);
        let back: Vec<(usize, String)> = serde_json::from_str(&out).unwrap();
        let values: Vec<&str> = back.iter().map(|(_, s)| s.as_str()).collect();
        assert_eq!(values, ["1/2", "1/4", "0", "0"]);

        let (code, out, _) =
            run(&["dtn", "apply", "--data", f.path(), "--trunc", "3", "--format", "csv"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("m,eta\n"));
    }

    #[test]
    fn green_diagonal_value_is_exact() {
        let (code, out, _) = run(&["green", "--x", "x:1", "--y", "x:1"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["value"], json!("9/50"));
        assert_eq!(v["terms"], json!(1));

        let (code, out, _) =
            run(&["green", "--x", "x:1", "--y", "x:1", "--mode", "closed-x"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["value"], json!("9/50"));

        let label = x_point(1).to_string();
        let (code, out, _) =
            run(&["green", "--x", "x:1", "--y", "x:1", "--format", "csv"]);
        assert_eq!(code, 0);
        assert_eq!(out, format!("x,y,value\n{label},{label},9/50\n"));
    }

    #[test]
    fn green_half_domain_matches_library() {
        let expect = green_omega::<Rational>(
            &crate::gasket::y_point(1),
            &crate::gasket::y_point(1),
            3,
        )
        .unwrap()
        .render();
        let (code, out, _) = run(&[
            "green", "--domain", "omega", "--x", "y:1", "--y", "y:1", "--terms", "3",
        ]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["value"], json!(expect));
    }

    #[test]
    fn green_on_the_boundary_vanishes() {
        let (code, out, _) = run(&["green", "--x", "q:0", "--y", "x:1"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["value"], json!("0"));
    }

    #[test]
    fn poisson_unit_source_hits_known_axis_value() {
        let _g = env_guard();
        let (code, out, _) = run(&["poisson", "--f", "const:1", "--level", "2"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("vertex,value\n"));
        assert!(out.contains(&format!("\n{},1/15\n", x_point(1))));
    }

    #[test]
    fn poisson_half_domain_vanishes_on_the_axis() {
        let _g = env_guard();
        let (code, out, _) = run(&[
            "poisson", "--f", "const:1", "--level", "2", "--domain", "omega", "--format",
            "json",
        ]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        let axis_label = x_point(1).to_string();
        let entry = v["values"]
            .as_array()
            .unwrap()
            .iter()
            .find(|e| e["vertex"] == json!(axis_label))
            .expect("x_1 in the table");
        assert_eq!(entry["value"], json!("0"));
    }

    #[test]
    fn trace_table_is_the_skew_trace() {
        let f = TempFile::new("trace-skew.json", SKEW);
        let (code, out, _) =
            run(&["trace", "--data", f.path(), "--format", "csv", "--trunc", "3"]);
        assert_eq!(code, 0);
        assert_eq!(out, "m,a,eta\n0,0,-6\n1,0,-2\n2,0,-2/3\n3,0,-2/9\n");

        let (code, out, _) = run(&["trace", "--data", f.path()]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["in_sup_space"], json!(true));
        assert_eq!(v["in_l2_space"], json!(true));
    }

    #[test]
    fn extend_whole_gasket_harmonic_data_glues_exactly() {
        let f = TempFile::new(
            "extend-harmonic.json",
            r#"{"a": [{"type": "geometric", "A1": "0", "A2": "4/3", "r": "3/5"}], "eta": []}"#,
        );
        let (code, out, _) = run(&["extend", "--mode", "E", "--data", f.path(), "--trunc", "4"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["gluing"]["all_zero"], json!(true));
        assert_eq!(v["roundtrip_matches_input"], json!(true));
        assert_eq!(v["laplacian_sup"], json!("0"));
        assert_eq!(v["apex"], json!("0"));

        let (code, out, _) = run(&[
            "extend", "--mode", "E", "--data", f.path(), "--trunc", "2", "--report", "csv",
        ]);
        assert_eq!(code, 0);
        assert!(out.starts_with("m,axis,left,right,lap_left,lap_right\n0,4/3,1,1,0,0\n"));
        assert!(out.contains("\n1,4/5,3/5,3/5,0,0\n"));
    }

    #[test]
    fn extend_across_axis_mirrors_the_skew_solution_oddly() {
        let f = TempFile::new("extend-skew.json", SKEW);
        let (code, out, _) = run(&["extend", "--mode", "Eomega", "--data", f.path()]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["mode"], json!("Eomega"));
        assert_eq!(v["gluing"]["all_zero"], json!(true));
        assert_eq!(v["in_sup_domain"], json!(true));
        assert_eq!(v["in_l2_domain"], json!(true));
        assert_eq!(
            v["rows"][1],
            json!({
                "m": 1, "axis": "0", "left": "1/5", "right": "-1/5",
                "lap_left": "0", "lap_right": "0",
            })
        );
    }

    #[test]
    fn spectra_level_one_dirichlet_eigenvalues() {
        let _g = env_guard();
        let (code, out, _) = run(&["spectra", "--level", "1", "--bc", "dirichlet"]);
        assert_eq!(code, 0);
        assert_eq!(out, "value,multiplicity,even,odd\n2,1,1,0\n5,2,1,1\n");

        let (code, out, _) =
            run(&["spectra", "--level", "1", "--bc", "dirichlet", "--format", "json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["eigenvalues"], json!(["2", "5", "5"]));
        assert_eq!(v["even_total"], json!(2));
        assert_eq!(v["odd_total"], json!(1));
        assert_eq!(v["half_total_matches"], json!(true));
    }

    #[test]
    fn spectra_census_rows_match_formulas() {
        let _g = env_guard();
        let (code, out, _) = run(&["spectra", "--level", "3", "--census"]);
        assert_eq!(code, 0);
        assert!(out.contains("\n6,3,neumann,15,9,15,9,true,true\n"));
        assert!(out.contains("\n2,1,dirichlet,,0,1,0,false,true\n"));

        let (code, out, _) =
            run(&["spectra", "--level", "2", "--census", "--format", "json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        let rows = v.as_array().unwrap();
        assert!(rows.iter().all(|r| {
            r["neumann"]["matches"] == json!(true) && r["dirichlet"]["matches"] == json!(true)
        }));
    }

    #[test]
    fn spectra_rejects_the_rational_backend() {
        let (code, _, err) = run(&["spectra", "--level", "1", "--backend", "rational"]);
        assert_eq!(code, 2);
        assert!(err.contains("float64"), "stderr: {err}");
    }

    #[test]
    fn spectra_level_caps_surface_as_validation_errors() {
        let _g = env_guard();
        let (code, _, err) = run(&["spectra", "--level", "5"]);
        assert_eq!(code, 2);
        assert!(err.contains("level"), "stderr: {err}");

        let (code, _, _) = run(&["spectra", "--level", "4", "--census"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn graph_export_matches_library_counts() {
        let _g = env_guard();
        let (code, out, _) = run(&["graph", "--level", "1"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("u,v\n"));
        assert_eq!(out.lines().count(), 1 + 9);

        let half = LevelGraph::build_left_half(1).unwrap();
        let (code, out, _) =
            run(&["graph", "--level", "1", "--domain", "omega", "--format", "json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["vertices"].as_array().unwrap().len(), half.vertices().len());
        assert_eq!(v["edges"].as_array().unwrap().len(), half.edges().len());
        assert_eq!(v["domain"], json!("omega"));
    }

    #[test]
    fn malformed_json_reports_location_and_exits_two() {
        let f = TempFile::new("bad.json", "{\n  \"a0\": \"1\",\n  oops\n}");
        let (code, _, err) = run(&["solve", "--data", f.path()]);
        assert_eq!(code, 2);
        assert!(err.contains("line 3"), "stderr: {err}");
        assert!(err.contains("column"), "stderr: {err}");
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let (code, _, err) = run(&["solve", "--data", "/nonexistent/halfgasket.json"]);
        assert_eq!(code, 2);
        assert!(err.contains("i/o error"), "stderr: {err}");
    }

    #[test]
    fn divergent_data_is_a_validation_error() {
        let f = TempFile::new(
            "divergent.json",
            r#"{"a0": "0", "terms": [{"type": "geometric", "A1": "0", "A2": "1", "r": "4"}]}"#,
        );
        let (code, _, err) = run(&["solve", "--data", f.path()]);
        assert_eq!(code, 2);
        assert!(err.contains("non-convergent"), "stderr: {err}");
    }

    #[test]
    fn truncation_caps_are_enforced() {
        let f = TempFile::new("trunc-cap.json", SKEW);
        let (code, _, err) = run(&["solve", "--data", f.path(), "--trunc", "10001"]);
        assert_eq!(code, 2);
        assert!(err.contains("cap"), "stderr: {err}");

        let (code, _, _) = run(&["dtn", "apply", "--data", f.path(), "--trunc", "501"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn level_cap_env_var_overrides_default() {
        let _g = env_guard();
        std::env::remove_var("HALFGASKET_MAX_LEVEL");
        let (code, _, err) = run(&["graph", "--level", "11", "--domain", "omega"]);
        assert_eq!(code, 2);
        assert!(err.contains("HALFGASKET_MAX_LEVEL"), "stderr: {err}");

        std::env::set_var("HALFGASKET_MAX_LEVEL", "12");
        let (code, _, err) = run(&["graph", "--level", "11", "--domain", "omega"]);
        assert_eq!(code, 0, "stderr: {err}");

        std::env::set_var("HALFGASKET_MAX_LEVEL", "abc");
        let (code, _, err) = run(&["graph", "--level", "2"]);
        assert_eq!(code, 2);
        assert!(err.contains("HALFGASKET_MAX_LEVEL"), "stderr: {err}");

        std::env::remove_var("HALFGASKET_MAX_LEVEL");
    }

    #[test]
    fn parse_failures_and_help_use_standard_codes() {
        let (code, _, err) = run(&["bogus"]);
        assert_eq!(code, 2);
        assert!(!err.is_empty());

        let (code, _, err) = run(&["solve"]);
        assert_eq!(code, 2);
        assert!(err.contains("--data"));

        let (code, _, _) = run(&[]);
        assert_eq!(code, 2);

        let (code, out, _) = run(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("spectra"));

        let (code, out, _) = run(&["--version"]);
        assert_eq!(code, 0);
        assert!(out.contains("halfgasket"));
    }

    #[test]
    fn point_syntax_errors_exit_two() {
        let (code, _, err) = run(&["green", "--x", "x:0", "--y", "x:1"]);
        assert_eq!(code, 2);
        assert!(!err.is_empty());

        let (code, _, _) = run(&["green", "--x", "wat", "--y", "x:1"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn poisson_rejects_unknown_sources() {
        let _g = env_guard();
        let (code, _, err) = run(&["poisson", "--f", "bump:1", "--level", "2"]);
        assert_eq!(code, 2);
        assert!(err.contains("const:"), "stderr: {err}");
    }

    #[test]
    fn config_validation_rules() {
        let base = RunConfig {
            subcommand: "solve",
            truncation: 8,
            level: None,
            backend: BackendKind::Rational,
            tolerance: 1e-10,
            input: None,
            format: OutputFormat::Csv,
        };
        assert!(base.validate().is_ok());

        let spectral = RunConfig { subcommand: "spectra", ..base.clone() };
        assert!(matches!(spectral.validate(), Err(Error::Domain(_))));

        let wide = RunConfig { truncation: MAX_TRUNCATION + 1, ..base.clone() };
        assert!(matches!(wide.validate(), Err(Error::Domain(_))));

        let dtn = RunConfig { subcommand: "dtn", truncation: 501, ..base };
        assert!(matches!(dtn.validate(), Err(Error::Domain(_))));
    }

    #[test]
    fn reruns_are_byte_identical() {
        let _g = env_guard();
        let skew = TempFile::new("det-skew.json", SKEW);
        let harmonic = TempFile::new(
            "det-harmonic.json",
            r#"{"a": [{"type": "geometric", "A1": "0", "A2": "4/3", "r": "3/5"}], "eta": []}"#,
        );
        let cases: Vec<Vec<&str>> = vec![
            vec!["solve", "--data", skew.path(), "--trunc", "6"],
            vec!["solve", "--data", skew.path(), "--format", "json"],
            vec!["energy", "--data", skew.path()],
            vec!["flux", "--data", skew.path(), "--format", "json"],
            vec!["dtn", "apply", "--data", skew.path(), "--trunc", "6"],
            vec!["green", "--x", "x:2", "--y", "x:3"],
            vec!["poisson", "--f", "const:1", "--level", "2"],
            vec!["trace", "--data", skew.path()],
            vec!["extend", "--mode", "E", "--data", harmonic.path()],
            vec!["extend", "--mode", "Eomega", "--data", skew.path()],
            vec!["graph", "--level", "2", "--format", "json"],
            vec!["spectra", "--level", "2", "--bc", "neumann"],
            vec!["spectra", "--level", "2", "--census", "--format", "json"],
        ];
        for args in cases {
            let first = run(&args);
            let second = run(&args);
            assert_eq!(first, second, "nondeterminism in {args:?}");
            assert_eq!(first.0, 0, "case {args:?} failed: {}", first.2);
        }
    }
}
