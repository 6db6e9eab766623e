//! `hmodlab`: runs the verification suites and exports curves.
//!
//! Exit status is 0 when every check passes, 1 when a check fails, and 2 on
//! parameter, I/O or resource errors.

mod config;
mod curves;
mod report;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{Overrides, RunConfig};
use crate::curves::CurveObject;
use crate::report::Report;
use crate::suites::Suite;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parameter(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] hmodlab_core::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(hmodlab_core::Error::CertificateViolation { .. })
            | CliError::Core(hmodlab_core::Error::ConstructionBug { .. }) => 1,
            _ => 2,
        }
    }
}

#[derive(Parser)]
#[command(name = "hmodlab", version, about = "Exact verification suites for Hilbert modules over C[0,1]")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Telescoping identities of the ψ family.
    Identity(RunArgs),
    /// Exact kernel membership of the ζ generators.
    Kernel(RunArgs),
    /// Norm certificates of Ψ_q and Φ on finite subsets.
    Bound(RunArgs),
    /// Orthogonality, non-membership witnesses and the truncated probe.
    Complement(RunArgs),
    /// The sequence-space warm-up example.
    Prehilbert(RunArgs),
    /// Every suite in turn.
    All(RunArgs),
    /// Export samples of a curve as CSV.
    Curves(CurveArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Enclosure width target, e.g. 2^-30 or 1/1024.
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<String>,
    /// Maximum subinterval evaluations per enclosure.
    #[arg(long, allow_hyphen_values = true)]
    budget: Option<String>,
    /// Rows searched for a witness window.
    #[arg(long, allow_hyphen_values = true)]
    depth: Option<String>,
    /// Truncation as N,M.
    #[arg(long, allow_hyphen_values = true)]
    trunc: Option<String>,
    /// File with one q value per line, replacing the dyadic enumeration.
    #[arg(long)]
    qseq: Option<PathBuf>,
    /// Output directory; HMODLAB_OUT takes precedence.
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value configuration file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CurveArgs {
    #[arg(value_enum)]
    object: CurveObject,
    /// key=value pairs, comma separated or repeated.
    #[arg(long, num_args = 1..)]
    params: Vec<String>,
    #[arg(long, default_value_t = 101, allow_hyphen_values = true)]
    samples: i64,
    /// CSV file; with HMODLAB_OUT set it is placed in that directory.
    #[arg(long)]
    out: PathBuf,
}

fn run_suites(suite: Suite, args: RunArgs) -> Result<u8, CliError> {
    let file = match &args.config {
        Some(p) => Overrides::from_file(p)?,
        None => Overrides::default(),
    };
    let flags = Overrides {
        tol: args.tol,
        budget: args.budget,
        depth: args.depth,
        trunc: args.trunc,
        qseq: args.qseq,
        out: args.out,
    };
    let config = RunConfig::resolve(file.merge(flags), config::env_out())?;
    // Fail on a bad sequence file before any suite runs.
    config.sequence()?;

    let mut code = 0;
    for s in suite.expand() {
        let checks = s.run(&config)?;
        let report = Report {
            suite: s.name(),
            timestamp: report::timestamp(),
            config: &config,
            checks: &checks,
        };
        let path = report.write(&config.out)?;
        let failed: Vec<_> = checks.iter().filter(|c| !c.passed).collect();
        println!(
            "{}: {} checks, {} failed -> {}",
            s.name(),
            checks.len(),
            failed.len(),
            path.display()
        );
        for c in &failed {
            eprintln!("  FAIL {} {}", c.check, serde_json::to_string(&c.parameters).unwrap_or_default());
        }
        if !report.passed() {
            code = 1;
        }
    }
    Ok(code)
}

fn run_curves(args: CurveArgs) -> Result<u8, CliError> {
    let samples = usize::try_from(args.samples)
        .map_err(|_| CliError::Parameter("samples must be >= 2".into()))?;
    let params = curves::parse_params(&args.params)?;
    let text = curves::render(args.object, params, samples)?;
    let path = match config::env_out() {
        Some(dir) => dir.join(
            args.out
                .file_name()
                .ok_or_else(|| CliError::Parameter("--out must name a file".into()))?,
        ),
        None => args.out,
    };
    curves::write(&path, &text)?;
    println!("{} rows -> {}", samples, path.display());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Identity(a) => run_suites(Suite::Identity, a),
        Command::Kernel(a) => run_suites(Suite::Kernel, a),
        Command::Bound(a) => run_suites(Suite::Bound, a),
        Command::Complement(a) => run_suites(Suite::Complement, a),
        Command::Prehilbert(a) => run_suites(Suite::Prehilbert, a),
        Command::All(a) => run_suites(Suite::All, a),
        Command::Curves(a) => run_curves(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("hmodlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
