//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 property violation
//! (`verify` only).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{
    contour_grid, depth_values, near_boundary_comparison, rank, verify_properties, GridSpec,
    Method,
};
use crate::depth::product_depth;
use crate::error::{DepthError, IoError};
use crate::estimation::{fit_mahalanobis, fit_params};
use crate::io::{self, DepthRow, DepthTable, Emit, Format};
use crate::simulate::{simulate, ProcessKind, SimConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

/// Relative output paths are resolved against this directory when set.
pub const OUT_DIR_ENV: &str = "TPP_DEPTH_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "tpp-depth", version, about = "Product depth for first-k event sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate first-k event sequences and write them as CSV.
    Simulate(SimulateArgs),
    /// Fit depth parameters from a dataset.
    Fit(FitArgs),
    /// Depth of every realization in a dataset.
    Depth(ScoreArgs),
    /// Rank realizations from deepest to shallowest.
    Rank(ScoreArgs),
    /// Evaluate a depth on a (s1, s2) grid.
    Contour(ContourArgs),
    /// Compare product and Mahalanobis ranks of near-boundary realizations.
    CompareBoundary(BoundaryArgs),
    /// Run the randomized property checks against fitted parameters.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// JSON configuration file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// hpp | state-dependent
    #[arg(long, value_parser = parse_kind)]
    kind: Option<ProcessKind>,
    /// Comma-separated positive rates.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    rates: Option<Vec<f64>>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    t0: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    t0: f64,
    #[arg(long)]
    params_out: Option<PathBuf>,
    /// Override the horizon hyperparameter M.
    #[arg(long, allow_negative_numbers = true)]
    big_m: Option<f64>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    params: PathBuf,
    /// product | marginal | conditional | hpp-conditional | mahalanobis
    #[arg(long, default_value = "product")]
    method: Method,
    /// Start time of the dataset; defaults to the one stored in the parameters.
    #[arg(long, allow_negative_numbers = true)]
    t0: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | json; inferred from the output extension when omitted.
    #[arg(long)]
    format: Option<Format>,
}

#[derive(Debug, Args)]
struct ContourArgs {
    #[arg(long)]
    params: PathBuf,
    #[arg(long, default_value = "product")]
    method: Method,
    #[arg(long, allow_negative_numbers = true)]
    xmin: f64,
    #[arg(long, allow_negative_numbers = true)]
    xmax: f64,
    #[arg(long, allow_negative_numbers = true)]
    ymin: f64,
    #[arg(long, allow_negative_numbers = true)]
    ymax: f64,
    #[arg(long, default_value_t = 101)]
    resolution: usize,
    /// Dataset the Mahalanobis baseline is fitted on.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<Format>,
}

#[derive(Debug, Args)]
struct BoundaryArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    threshold: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    t0: f64,
    /// Parameters to score with; fitted on the input when omitted.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    params: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Reference sample; invariance checks then refit on transformed copies.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_kind(s: &str) -> Result<ProcessKind, String> {
    match s {
        "hpp" => Ok(ProcessKind::Hpp),
        "state-dependent" => Ok(ProcessKind::StateDependent),
        _ => Err(format!("unknown kind {s:?}; expected hpp or state-dependent")),
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
    Violation,
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<DepthError> for Failure {
    fn from(e: DepthError) -> Self {
        Failure::Data(e.to_string())
    }
}

fn resolve_out(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn write_result<T: Emit>(item: &T, out: Option<&Path>, format: Option<Format>) -> Result<(), Failure> {
    match out {
        Some(path) => {
            let path = resolve_out(path);
            let format = format.unwrap_or_else(|| Format::from_path(&path));
            io::emit_results(item, format, &path)?;
        }
        None => {
            let stdout = std::io::stdout();
            item.write_to(stdout.lock(), format.unwrap_or(Format::Csv))?;
        }
    }
    Ok(())
}

fn run_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<SimConfig>(&text)
                .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?
        }
        None => {
            let kind = args
                .kind
                .ok_or_else(|| Failure::Usage("--kind is required without --config".into()))?;
            let rates = args
                .rates
                .clone()
                .ok_or_else(|| Failure::Usage("--rates is required without --config".into()))?;
            SimConfig {
                kind,
                k: args.k.unwrap_or(rates.len()),
                rates,
                n: args.n.unwrap_or(100),
                start: 0.0,
                seed: 0,
            }
        }
    };
    if let Some(kind) = args.kind {
        config.kind = kind;
    }
    if let Some(rates) = args.rates {
        config.rates = rates;
    }
    if let Some(k) = args.k {
        config.k = k;
    }
    if let Some(n) = args.n {
        config.n = n;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(t0) = args.t0 {
        config.start = t0;
    }
    config
        .validate()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let sample = simulate(&config)?;
    write_result(&sample, args.out.as_deref(), Some(Format::Csv))
}

fn run_fit(args: FitArgs) -> Result<(), Failure> {
    let sample = io::load_csv(&args.input, args.t0)?;
    let mut params = fit_params(&sample)?;
    if let Some(m) = args.big_m {
        params = params.with_big_m(m)?;
    }
    match args.params_out {
        Some(path) => io::write_params(&params, resolve_out(&path))?,
        None => println!("{}", io::params_to_json(&params)),
    }
    Ok(())
}

fn depth_table(args: &ScoreArgs) -> Result<DepthTable, Failure> {
    let params = io::read_params(&args.params)?;
    let sample = io::load_csv(&args.input, args.t0.unwrap_or(params.start))?;
    let baseline = match args.method {
        Method::Mahalanobis => Some(fit_mahalanobis(&sample)?.model()?),
        _ => None,
    };
    let values = depth_values(&sample, &params, args.method, baseline.as_ref())?;
    let rows = sample
        .iter()
        .zip(values)
        .enumerate()
        .map(|(index, (seq, depth))| {
            let mut breakdown = product_depth(seq, &params)?;
            if baseline.is_some() {
                breakdown.baseline_mahalanobis = Some(depth);
            }
            Ok(DepthRow {
                index,
                depth,
                breakdown,
            })
        })
        .collect::<Result<Vec<_>, DepthError>>()?;
    Ok(DepthTable {
        method: args.method,
        rows,
    })
}

fn run_depth(args: ScoreArgs) -> Result<(), Failure> {
    let table = depth_table(&args)?;
    write_result(&table, args.out.as_deref(), args.format)
}

fn run_rank(args: ScoreArgs) -> Result<(), Failure> {
    let params = io::read_params(&args.params)?;
    let sample = io::load_csv(&args.input, args.t0.unwrap_or(params.start))?;
    let table = rank(&sample, &params, args.method)?;
    write_result(&table, args.out.as_deref(), args.format)
}

fn run_contour(args: ContourArgs) -> Result<(), Failure> {
    let params = io::read_params(&args.params)?;
    let baseline = match (&args.input, args.method) {
        (Some(path), Method::Mahalanobis) => {
            let sample = io::load_csv(path, params.start)?;
            Some(fit_mahalanobis(&sample)?.model()?)
        }
        (None, Method::Mahalanobis) => {
            return Err(Failure::Usage(
                "--in is required for the mahalanobis method".into(),
            ))
        }
        _ => None,
    };
    let grid = GridSpec {
        xmin: args.xmin,
        xmax: args.xmax,
        ymin: args.ymin,
        ymax: args.ymax,
        resolution: args.resolution,
    };
    grid.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let contour = contour_grid(&params, args.method, &grid, baseline.as_ref())?;
    write_result(&contour, args.out.as_deref(), args.format)
}

fn run_compare_boundary(args: BoundaryArgs) -> Result<(), Failure> {
    if !(args.threshold > 0.0 && args.threshold <= 1.0) {
        return Err(Failure::Usage(format!(
            "--threshold must lie in (0, 1], got {}",
            args.threshold
        )));
    }
    let sample = io::load_csv(&args.input, args.t0)?;
    let params = match &args.params {
        Some(path) => io::read_params(path)?,
        None => fit_params(&sample)?,
    };
    let summary = near_boundary_comparison(&sample, &params, args.threshold)?;
    if summary.is_empty() {
        eprintln!("warning: no realization falls below the threshold");
    }
    write_result(&summary, args.out.as_deref(), Some(Format::Json))
}

fn run_verify(args: VerifyArgs) -> Result<(), Failure> {
    if args.trials == 0 {
        return Err(Failure::Usage("--trials must be at least 1".into()));
    }
    let params = io::read_params(&args.params)?;
    let reference = match &args.input {
        Some(path) => Some(io::load_csv(path, params.start)?),
        None => None,
    };
    let report = verify_properties(&params, args.trials, args.seed, reference.as_ref())?;
    {
        let mut err = std::io::stderr().lock();
        for c in &report.checks {
            let _ = writeln!(
                err,
                "{:<32} {:>4} trials={:<8} violations={:<6} worst={:.3e} tol={:.1e}",
                c.name,
                if c.passed() { "ok" } else { "FAIL" },
                c.trials,
                c.violations,
                c.worst_margin,
                c.tolerance
            );
        }
    }
    write_result(&report, args.out.as_deref(), Some(Format::Json))?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Violation)
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Simulate(a) => run_simulate(a),
        Command::Fit(a) => run_fit(a),
        Command::Depth(a) => run_depth(a),
        Command::Rank(a) => run_rank(a),
        Command::Contour(a) => run_contour(a),
        Command::CompareBoundary(a) => run_compare_boundary(a),
        Command::Verify(a) => run_verify(a),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n");
            let mut cmd = <Cli as clap::CommandFactory>::command();
            let _ = writeln!(std::io::stderr(), "{}", cmd.render_usage());
            EXIT_USAGE
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            EXIT_DATA
        }
        Err(Failure::Violation) => EXIT_VIOLATION,
    }
}
