//! `gplandmark` — greedy Gaussian-process landmarking from the command line.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gplandmark::Error;

mod analyze;
mod manifest;
mod run;

#[derive(Parser)]
#[command(name = "gplandmark", version, about = "Gaussian-process landmarking on surfaces and point clouds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select landmarks on a mesh or point cloud.
    Run(RunArgs),
    /// Compare a landmark trace against baseline designs.
    Analyze(AnalyzeArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum KernelArg {
    Euclidean,
    Reweighted,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TieArg {
    Lowest,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Trace,
    #[value(name = "mspe_field")]
    MspeField,
    Plot,
    Report,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum WeightsArg {
    Curvature,
    Uniform,
    File,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Mesh (off, ply, obj) or point cloud (xyz, csv).
    #[arg(long)]
    pub input: PathBuf,
    /// Input format; guessed from the extension when omitted.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long, value_enum, default_value = "reweighted")]
    pub kernel: KernelArg,
    /// Bandwidth ε in K(x, y) = exp(-|x - y|² / ε), or "auto" for (0.1 · bbox diagonal)².
    #[arg(long, default_value = "auto")]
    pub epsilon: String,
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[arg(long = "num-landmarks", short = 'L')]
    pub num_landmarks: usize,
    /// Stop early once max MSPE ≤ tolerance · max prior variance.
    #[arg(long, default_value_t = 0.0)]
    pub tolerance: f64,
    #[arg(long, value_enum, default_value = "lowest")]
    pub tie: TieArg,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Source of the reweighting function.
    #[arg(long, value_enum, default_value = "curvature")]
    pub weights: WeightsArg,
    /// Weight file for `--weights file`: one value per line.
    #[arg(long)]
    pub weights_file: Option<PathBuf>,
    /// Neighbors for point-cloud importance.
    #[arg(long, default_value_t = gplandmark::pipeline::DEFAULT_KNN)]
    pub knn: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "trace")]
    pub emit: Vec<Emit>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// landmarks.json written by `run`; run_manifest.json must sit next to it.
    #[arg(long)]
    pub trace: PathBuf,
    /// Random baseline designs per comparison.
    #[arg(long, default_value_t = 200)]
    pub baselines: usize,
    /// Comma-separated m values for the oracle bound check.
    #[arg(long, value_delimiter = ',')]
    pub bound_check: Vec<usize>,
    /// Fit range `n_min:n_max`.
    #[arg(long)]
    pub fit: Option<String>,
    #[arg(long, value_enum, default_value = "loglog")]
    pub fit_scale: FitScaleArg,
    /// Seed for the random baselines; defaults to the run's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; defaults to the trace's directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FitScaleArg {
    Loglog,
    Semilog,
}

/// Exit status per error category.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidBandwidth(_) => 2,
        Error::Parse { .. } | Error::Validation(_) | Error::DimensionMismatch { .. } | Error::Json(_) => 3,
        Error::DegenerateGeometry(_) | Error::DegenerateNeighborhood(_) | Error::AllZeroCurvature(_) => 4,
        Error::SingularSubmatrix(_)
        | Error::NumericalBreakdown { .. }
        | Error::EmptyDesign
        | Error::NonpositiveSigma(_) => 5,
        Error::Io { .. } => 6,
    }
}

fn init_threads() -> gplandmark::Result<()> {
    let Ok(v) = std::env::var("GPLANDMARK_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("GPLANDMARK_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot configure thread pool: {e}")))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = init_threads().and_then(|_| match cli.command {
        Command::Run(args) => run::run(&args),
        Command::Analyze(args) => analyze::analyze(&args),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(exit_code(&e))
        }
    }
}
