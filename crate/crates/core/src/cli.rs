//! The `welch` command-line tool.
//!
//! Exit codes: 0 when every asserted bound holds, 2 when a bound whose
//! hypotheses were verified is violated, 3 for input or validation errors,
//! 4 when a search did not converge.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::asf::{DualPair, Exponent, Field, LpSpace};
use crate::bounds::{classical_bounds, full_report, BoundConfig, BoundReport, ReportRequest, DEFAULT_TRACE_POWERS};
use crate::continuous::{cont_metrics, continuous_report, ContinuousAsf};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::io;
use crate::numkernel::{eigen, DenseMatrix, ToleranceConfig};
use crate::optimize::search::{self, Objective, SearchConfig, SearchResult};
use crate::optimize::{equiangularity, frame_correlation, pseudo_frame_potential, rms_cross};
use crate::symlift::{explicit_lift, lifted_frame_spectrum, lifted_gram, sym_dim};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "WELCH_THREADS";

#[derive(Parser, Debug)]
#[command(name = "welch", version, about = "Welch-type bounds for approximate Schauder frames")]
struct Cli {
    #[command(flatten)]
    tol: TolArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct TolArgs {
    /// Allowed |Im λ| relative to the spectral radius
    #[arg(long, global = true)]
    tol_eig_imag: Option<f64>,
    /// Allowed negative real part relative to the spectral radius
    #[arg(long, global = true)]
    tol_nonneg: Option<f64>,
    /// Relative singular value cutoff for numerical rank
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    /// Eigenvector condition number above which a matrix counts as defective
    #[arg(long, global = true)]
    tol_diag_cond: Option<f64>,
    /// Relative tolerance for equality flags
    #[arg(long, global = true)]
    tol_equality: Option<f64>,
}

impl TolArgs {
    fn config(&self) -> Result<BoundConfig> {
        let d = ToleranceConfig::default();
        let tolerances = ToleranceConfig {
            eig_imag_tol: self.tol_eig_imag.unwrap_or(d.eig_imag_tol),
            nonneg_tol: self.tol_nonneg.unwrap_or(d.nonneg_tol),
            rank_tol: self.tol_rank.unwrap_or(d.rank_tol),
            diag_cond_max: self.tol_diag_cond.unwrap_or(d.diag_cond_max),
        };
        tolerances.validate()?;
        let equality_tol = self.tol_equality.unwrap_or(BoundConfig::default().equality_tol);
        if !(equality_tol > 0.0 && equality_tol.is_finite()) {
            return Err(Error::InvalidArgument("tol-equality must be positive".into()));
        }
        Ok(BoundConfig { tolerances, equality_tol })
    }
}

#[derive(Args, Debug, Clone)]
struct PairInput {
    /// Dual pair JSON file
    #[arg(long, conflicts_with = "fixture")]
    input: Option<PathBuf>,
    /// Built-in pair: mercedes-benz, sic2, hesse, duplicated-basis, jordan,
    /// rotating, or dual-basis:<d>
    #[arg(long)]
    fixture: Option<String>,
}

impl PairInput {
    fn load(&self) -> Result<DualPair> {
        match (&self.input, &self.fixture) {
            (Some(path), _) => io::read_pair(path),
            (None, Some(name)) => fixture(name),
            (None, None) => Err(Error::InvalidArgument("one of --input or --fixture is required".into())),
        }
    }
}

fn fixture(name: &str) -> Result<DualPair> {
    if let Some(d) = name.strip_prefix("dual-basis:") {
        let d: usize = d.parse().map_err(|_| Error::Parse(format!("bad dimension in {name:?}")))?;
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        return Ok(fixtures::dual_basis(d, Exponent::Finite(2.0), Field::Real));
    }
    fixtures::by_name(name).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "unknown fixture {name:?} (known: {}, dual-basis:<d>)",
            fixtures::FIXTURE_NAMES.join(", ")
        ))
    })
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print or save the Gram matrix
    Gram {
        #[command(flatten)]
        pair: PairInput,
        /// Write the matrix as CSV here instead of printing it
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate every applicable bound
    Report {
        #[command(flatten)]
        pair: PairInput,
        /// Tensor orders m
        #[arg(long, value_delimiter = ',', default_value = "1")]
        orders: Vec<usize>,
        /// Exponents for the p-sum bound (each in (2, inf))
        #[arg(long = "p", value_delimiter = ',')]
        p_list: Vec<f64>,
        /// Exponents r for the trace-power bound
        #[arg(long, value_delimiter = ',')]
        trace_powers: Option<Vec<f64>>,
        /// Also write the full report as JSON
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Lifted Gram matrix of order m
    Lift {
        #[command(flatten)]
        pair: PairInput,
        #[arg(long)]
        m: usize,
        /// Cross-check against the explicit symmetric-tensor lift
        #[arg(long)]
        explicit: bool,
        /// Write the lifted Gram matrix as CSV here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bounds for a frame over an atomic measure
    Continuous {
        /// Continuous frame JSON: {"pair": {...}, "measure": {"atoms": [...], "weights": [...]}}
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        orders: Vec<usize>,
        #[arg(long = "p", value_delimiter = ',')]
        p_list: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        trace_powers: Option<Vec<f64>>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Numerical search for extremal frames
    Search(SearchArgs),
    /// Correlation, RMS cross pairing, pseudo frame potential, equiangularity
    Metrics {
        #[command(flatten)]
        pair: PairInput,
        /// Tolerance for the equiangularity flag
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Grassmannian,
    Etf,
    Potential,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum FieldArg {
    Real,
    Complex,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long)]
    dim: usize,
    /// Number of vectors (ignored for etf, which uses dim²)
    #[arg(long)]
    count: Option<usize>,
    /// ℓp exponent, a number >= 1 or "inf"
    #[arg(long, default_value = "2")]
    p: String,
    #[arg(long, value_enum, default_value = "complex")]
    field: FieldArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    #[arg(long, default_value_t = 5000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Save the best pair with a "search" metadata block
    #[arg(long)]
    out: Option<PathBuf>,
    /// Save the correlation of every iterate as CSV
    #[arg(long)]
    trace: Option<PathBuf>,
}

/// Runs the tool on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    EXIT_OK
                }
                _ => {
                    let msg = e.to_string();
                    let first = msg.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
                    eprintln!("{first}");
                    EXIT_INPUT
                }
            };
        }
    };
    configure_threads();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error: {msg}");
            EXIT_INPUT
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            // a global pool may already exist when called from a test harness
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    let cfg = cli.tol.config()?;
    match cli.command {
        Command::Gram { pair, out: path } => {
            let g = pair.load()?.gram();
            emit_matrix(out, &g, path.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::Report { pair, orders, p_list, trace_powers, json } => {
            let pair = pair.load()?;
            let req = ReportRequest {
                orders,
                p_list,
                trace_powers: trace_powers.unwrap_or_else(|| DEFAULT_TRACE_POWERS.to_vec()),
            };
            let report = full_report(&pair, &req, &cfg)?;
            let metrics = metrics_value(&pair, 1e-9);
            let classical = if pair.n() >= 2 {
                serde_json::to_value(classical_bounds(pair.n(), pair.dim(), pair.space().field)?)?
            } else {
                Value::Array(Vec::new())
            };
            write_report_text(out, &report)?;
            writeln!(out, "metrics: {}", compact_metrics(&metrics))?;
            if let Some(path) = json {
                let doc = json!({
                    "metadata": metadata("report"),
                    "report": report,
                    "classical": classical,
                    "metrics": metrics,
                });
                io::write_text(&path, &io::to_canonical_string(&doc))?;
            }
            Ok(exit_for(&report))
        }
        Command::Lift { pair, m, explicit, out: path } => {
            let pair = pair.load()?;
            let order = u32::try_from(m).map_err(|_| Error::Overflow(format!("order {m}")))?;
            let gm = lifted_gram(&pair.gram(), order)?;
            let spec = lifted_frame_spectrum(&pair, m)?;
            writeln!(out, "order {m}: lifted dimension {}, zero padding {}", spec.lifted_dim, spec.padding)?;
            emit_matrix(out, &gm, path.as_deref())?;
            let ev: Vec<String> = spec.spectrum.eigenvalues.iter().map(|z| io::sig6_complex(*z)).collect();
            writeln!(out, "lifted Gram eigenvalues: {}", ev.join(" "))?;
            if explicit {
                let lifted = explicit_lift(&pair, m)?;
                let dev = lifted.gram().sub(&gm)?.max_abs();
                let op = eigen(&lifted.frame_operator())?;
                let spec_dev = nonzero_spectrum_gap(&spec.spectrum.eigenvalues, &op.eigenvalues);
                writeln!(out, "explicit lift: dimension {}", sym_dim(pair.dim(), m)?)?;
                writeln!(out, "max |gram(explicit) - hadamard power| = {:e}", dev)?;
                writeln!(out, "max nonzero spectrum gap = {:e}", spec_dev)?;
            }
            Ok(EXIT_OK)
        }
        Command::Continuous { input, orders, p_list, trace_powers, json } => {
            let casf = io::read_casf(&input)?;
            let req = ReportRequest {
                orders,
                p_list,
                trace_powers: trace_powers.unwrap_or_else(|| DEFAULT_TRACE_POWERS.to_vec()),
            };
            let report = continuous_report(&casf, &req, &cfg)?;
            write_report_text(out, &report)?;
            let metrics = cont_metrics_value(&casf);
            writeln!(
                out,
                "measure: total {}, diagonal {}, off-diagonal {}",
                io::sig6(casf.measure().total_mass()),
                io::sig6(casf.measure().diag_mass()),
                io::sig6(casf.measure().offdiag_mass())
            )?;
            writeln!(out, "metrics: {}", compact_metrics(&metrics))?;
            if let Some(path) = json {
                let doc = json!({
                    "metadata": metadata("continuous"),
                    "report": report,
                    "metrics": metrics,
                });
                io::write_text(&path, &io::to_canonical_string(&doc))?;
            }
            Ok(exit_for(&report))
        }
        Command::Search(args) => run_search(args, out),
        Command::Metrics { pair, tol } => {
            let pair = pair.load()?;
            let m = metrics_value(&pair, tol);
            let rows: Vec<Vec<String>> = m
                .as_object()
                .expect("metrics object")
                .iter()
                .map(|(k, v)| vec![k.clone(), value_text(v)])
                .collect();
            write!(out, "{}", io::table(&["metric", "value"], &rows))?;
            Ok(EXIT_OK)
        }
    }
}

fn metadata(verb: &str) -> Value {
    json!({ "tool": "welch", "version": env!("CARGO_PKG_VERSION"), "command": verb })
}

fn exit_for(report: &BoundReport) -> i32 {
    if report.alarms().next().is_some() {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    }
}

fn emit_matrix(out: &mut dyn Write, m: &DenseMatrix, path: Option<&Path>) -> Result<()> {
    let csv = io::matrix_to_csv(m);
    match path {
        Some(p) => io::write_text(p, &csv)?,
        None => {
            for r in 0..m.rows() {
                let cells: Vec<String> = m.row(r).iter().map(|z| io::sig6_complex(*z)).collect();
                writeln!(out, "{}", cells.join("  "))?;
            }
        }
    }
    Ok(())
}

/// Largest distance between the non-zero parts of two eigenvalue lists,
/// both sorted the same way; zero means "at most 1e-9 times the radius".
fn nonzero_spectrum_gap(a: &[num_complex::Complex64], b: &[num_complex::Complex64]) -> f64 {
    let rho = a.iter().chain(b).map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let keep = |v: &[num_complex::Complex64]| -> Vec<num_complex::Complex64> {
        v.iter().cloned().filter(|z| z.norm() > 1e-9 * rho).collect()
    };
    let (a, b) = (keep(a), keep(b));
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn write_report_text(out: &mut dyn Write, report: &BoundReport) -> Result<()> {
    let s = &report.summary;
    writeln!(
        out,
        "pair: n={} d={} p={} field={} normalized={} hilbert={}",
        s.n, s.d, s.p, s.field, s.normalized, s.hilbert
    )?;
    let rows: Vec<Vec<String>> = report
        .records
        .iter()
        .map(|r| {
            vec![
                r.name.clone(),
                io::sig6(r.lhs),
                io::sig6(r.rhs),
                io::sig6(r.slack),
                yes_no(r.holds),
                yes_no(r.equality),
                yes_no(r.hypothesis_ok),
                r.notes.clone(),
            ]
        })
        .collect();
    write!(
        out,
        "{}",
        io::table(&["bound", "lhs", "rhs", "slack", "holds", "equality", "hypothesis", "notes"], &rows)
    )?;
    for d in &report.diagnostics {
        writeln!(
            out,
            "order {}: lifted dim {}, diagonalizable {}, nonneg {}, eigvec cond {}, rank {}",
            d.order,
            d.lifted_dim,
            yes_no(d.verdict.diagonalizable),
            yes_no(d.verdict.nonneg),
            io::sig6(d.eigvec_condition),
            d.gram_rank
        )?;
    }
    for s in &report.skipped {
        writeln!(out, "skipped: {s}")?;
    }
    let alarms: Vec<&str> = report.alarms().map(|r| r.name.as_str()).collect();
    if !alarms.is_empty() {
        writeln!(out, "VIOLATED with hypotheses verified: {}", alarms.join(", "))?;
    }
    Ok(())
}

fn yes_no(b: bool) -> String {
    if b { "yes" } else { "no" }.to_string()
}

fn value_text(v: &Value) -> String {
    match v {
        Value::Number(n) => io::sig6(n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) => s.clone(),
        Value::Object(o) => o.iter().map(|(k, v)| format!("{k}={}", value_text(v))).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}

fn compact_metrics(v: &Value) -> String {
    value_text(v)
}

fn metric<T: serde::Serialize>(r: Result<T>) -> Value {
    match r {
        Ok(v) => serde_json::to_value(v).unwrap_or(Value::Null),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn metrics_value(pair: &DualPair, tol: f64) -> Value {
    json!({
        "correlation": metric(frame_correlation(pair)),
        "rms_cross": metric(rms_cross(pair)),
        "pseudo_frame_potential": pseudo_frame_potential(pair),
        "potential_floor": (pair.n() * pair.n()) as f64 / pair.dim() as f64,
        "equiangularity": metric(equiangularity(pair, tol)),
    })
}

fn cont_metrics_value(casf: &ContinuousAsf) -> Value {
    metric(cont_metrics(casf, 1e-9))
}

fn run_search(args: SearchArgs, out: &mut dyn Write) -> Result<i32> {
    let p = io::parse_exponent_str(&args.p)?;
    let field = match args.field {
        FieldArg::Real => Field::Real,
        FieldArg::Complex => Field::Complex,
    };
    let space = LpSpace::new(args.dim, p, field)?;
    let cfg = SearchConfig {
        seed: args.seed,
        restarts: args.restarts,
        max_iters: args.max_iters,
        tol: args.tol,
        record_trace: args.trace.is_some(),
        ..SearchConfig::default()
    };
    let need_count = || args.count.ok_or_else(|| Error::InvalidArgument("--count is required for this mode".into()));
    let result: SearchResult = match args.mode {
        Mode::Grassmannian => search::grassmannian_search(space, need_count()?, &cfg)?,
        Mode::Potential => search::potential_minimize(space, need_count()?, &cfg)?,
        Mode::Etf => search::etf_search_in(space, &cfg)?,
    };
    writeln!(
        out,
        "mode {:?}: n={} d={} p={} field={}",
        args.mode,
        result.pair.n(),
        result.pair.dim(),
        space.p,
        field
    )?;
    writeln!(out, "objective {} = {}", result.objective.name(), io::sig6(result.objective_value))?;
    if let Some(gap) = result.welch_gap {
        writeln!(out, "gap to Welch floor = {}", io::sig6(gap))?;
    }
    if let Objective::Equiangular { target } = result.objective {
        writeln!(out, "target |G|^2 = {}, residual = {:e}", io::sig6(target), result.etf_residual())?;
    }
    writeln!(
        out,
        "tightness residual = {:e}, potential gap = {:e}, feasibility = {:e}",
        result.residuals.tightness,
        result.residuals.potential_gap,
        result.feasibility.max_dev()
    )?;
    writeln!(
        out,
        "seed {} restart {} iterations {} converged {}",
        result.seed,
        result.restart,
        result.iters_used,
        yes_no(result.converged)
    )?;
    if let Some(path) = &args.out {
        io::write_text(path, &io::to_canonical_string(&io::search_result_to_value(&result)))?;
    }
    if let Some(path) = &args.trace {
        let mut csv = String::from("restart,iter,correlation,hypothesis_ok\n");
        for t in &result.trace {
            csv.push_str(&format!("{},{},{},{}\n", t.restart, t.iter, t.correlation, t.hypothesis_ok));
        }
        io::write_text(path, &csv)?;
    }
    Ok(if result.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}
