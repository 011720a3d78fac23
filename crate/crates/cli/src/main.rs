use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

mod artifact;
mod commands;

use artifact::{Format, Manifest};

/// Environment variable holding the number of worker threads.
const WORKERS_ENV: &str = "CAYLEY_WORKERS";

#[derive(Parser, Debug)]
#[command(name = "cayley", version, about = "Ising models with competing interactions on the order-2 Cayley tree")]
struct Cli {
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write the artifact to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Compare the artifact with a stored golden file (timestamp ignored).
    #[arg(long, global = true)]
    golden: Option<PathBuf>,

    /// With --golden, overwrite the golden file instead of comparing.
    #[arg(long, global = true, requires = "golden")]
    bless: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Phase regions, ground classes and Peierls constants for (J1, J2).
    Phase(CouplingArgs),
    /// Periodic ground states, their minimality on V_n and layered states.
    Ground(GroundArgs),
    /// Randomized Peierls-condition checks around every ground state.
    Peierls(PeierlsArgs),
    /// Contour decomposition of a configuration file.
    Contours(ContoursArgs),
    /// Exact partition function and single-site marginals.
    Exact(ExactArgs),
    /// Exact contour probabilities against the erasure bound.
    Bounds(BoundsArgs),
    /// Window-mismatch probabilities over a grid of inverse temperatures.
    Deviation(DeviationArgs),
    /// Metropolis chain trace of one observable.
    Sample(SampleArgs),
    /// Plus and minus boundary chains compared with the exact recursion.
    Twophase(TwophaseArgs),
    /// Regenerates the acceptance tables.
    Report(ReportArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct CouplingArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub j1: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub j2: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct GroundArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub coupling: CouplingArgs,
    /// Radius on which minimality and layered states are checked.
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    /// Largest layer thickness t for degenerate couplings.
    #[arg(long, default_value_t = 4)]
    pub layers: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct PeierlsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub coupling: CouplingArgs,
    /// Perturbations are supported in V_support.
    #[arg(long, default_value_t = 4)]
    pub support: usize,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct ContoursArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub input: PathBuf,
    /// Nearest-neighbor coupling used for the energy identity.
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub j1: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryArg {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Enum,
    Dp,
}

#[derive(Args, Debug, Serialize)]
pub struct ModelArgs {
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub j1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub j2: f64,
    /// General two-state model λ11,λ12,λ21,λ22 (replaces J1, J2).
    #[arg(long, value_delimiter = ',', num_args = 4, allow_hyphen_values = true)]
    pub lambda: Option<Vec<f64>>,
}

#[derive(Args, Debug, Serialize)]
pub struct ExactArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub beta: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Plus)]
    pub boundary: BoundaryArg,
    #[arg(long, value_enum, default_value_t = MethodArg::Dp)]
    pub method: MethodArg,
}

#[derive(Args, Debug, Serialize)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub beta: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Plus)]
    pub boundary: BoundaryArg,
}

#[derive(Args, Debug, Serialize)]
pub struct DeviationArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub beta_grid: Vec<f64>,
    #[arg(long)]
    pub window: usize,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Center of the window.
    #[arg(long, default_value = "e")]
    pub vertex: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Plus)]
    pub boundary: BoundaryArg,
}

#[derive(Args, Debug, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub beta: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Plus)]
    pub boundary: BoundaryArg,
    #[arg(long)]
    pub sweeps: u64,
    #[arg(long, default_value_t = 0)]
    pub burnin: u64,
    #[arg(long, default_value_t = 1)]
    pub thinning: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// root_spin, magnetization, boundary_size, contour_count or window_mismatch:m.
    #[arg(long, default_value = "root_spin")]
    pub observable: String,
}

#[derive(Args, Debug, Serialize)]
pub struct TwophaseArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub sweeps: u64,
    /// Defaults to one percent of the sweeps.
    #[arg(long)]
    pub burnin: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct ReportArgs {
    /// Criterion ids to run; all when omitted.
    #[arg(long, value_delimiter = ',')]
    pub criteria: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0x5EED_2024)]
    pub seed: u64,
}

/// Failures mapped to exit codes 1 (validation) and 2 (capacity).
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Capacity(String),
}

impl From<cayley::error::Error> for Failure {
    fn from(e: cayley::error::Error) -> Self {
        if e.is_capacity() {
            Failure::Capacity(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

fn configure_workers() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Validation(format!("{WORKERS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Validation(e.to_string()))
}

fn params<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).expect("argument records serialize")
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_workers()?;
    let (name, record, seeds, output) = match &cli.command {
        Command::Phase(a) => ("phase", params(a), vec![], commands::phase(a)?),
        Command::Ground(a) => ("ground", params(a), vec![], commands::ground(a)?),
        Command::Peierls(a) => ("peierls", params(a), vec![a.seed], commands::peierls(a)?),
        Command::Contours(a) => ("contours", params(a), vec![], commands::contours(a)?),
        Command::Exact(a) => ("exact", params(a), vec![], commands::exact(a)?),
        Command::Bounds(a) => ("bounds", params(a), vec![], commands::bounds(a)?),
        Command::Deviation(a) => ("deviation", params(a), vec![], commands::deviation(a)?),
        Command::Sample(a) => ("sample", params(a), vec![a.seed], commands::sample(a)?),
        Command::Twophase(a) => (
            "twophase",
            params(a),
            vec![a.seed, a.seed.wrapping_add(1)],
            commands::twophase(a)?,
        ),
        Command::Report(a) => ("report", params(a), vec![a.seed], commands::report(a)?),
    };
    let manifest = Manifest {
        command: name.into(),
        params: record,
        seeds,
    };
    let format = cli.format.unwrap_or(output.default_format);
    let text = artifact::render(&output, format, &manifest).map_err(Failure::Validation)?;

    if let Some(path) = &cli.golden {
        if cli.bless {
            std::fs::write(path, &text)?;
        } else {
            let stored = std::fs::read_to_string(path)?;
            if artifact::without_timestamp(&stored) != artifact::without_timestamp(&text) {
                return Err(Failure::Validation(format!(
                    "output differs from golden file {}",
                    path.display()
                )));
            }
            eprintln!("golden file {} matches", path.display());
        }
    }
    match &cli.out {
        Some(path) => std::fs::write(path, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Capacity(msg)) => {
            eprintln!("capacity error: {msg}");
            ExitCode::from(2)
        }
    }
}
