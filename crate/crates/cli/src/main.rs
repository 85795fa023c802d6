mod commands;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use frame_extract::FrameError;

#[derive(Parser, Debug)]
#[command(name = "frame-extract", version, about = "Frame analysis and well-conditioned subsequence extraction")]
pub struct Cli {
    /// Write the JSON report here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Tolerance for tightness and re-certification checks.
    #[arg(long, global = true, env = "FRAME_EXTRACT_TOL", default_value_t = 1e-8)]
    pub tol: f64,

    /// Record wall-clock time in reports (makes output run-dependent).
    #[arg(long, global = true)]
    pub timing: bool,

    /// Accepted for compatibility; runs are sequential and outputs are the
    /// same either way.
    #[arg(long, global = true)]
    pub parallel: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Frame bounds, tightness and the dimension identity of a frame.
    Analyze(AnalyzeArgs),
    /// Extract a subsystem equivalent to an orthonormal basis.
    Extract(ExtractArgs),
    /// Greedy almost-orthonormal subsequence of a frame stream.
    Greedy(GreedyArgs),
    /// Build the counterexample frames and their diagnostics.
    Counterexample(CounterexampleArgs),
    /// Compare greedy selections with exhaustive oracles on random instances.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Frame file (JSON or CSV).
    pub file: Option<PathBuf>,

    /// Use a random tight frame of M vectors in R^N instead of a file.
    #[arg(long, num_args = 2, value_names = ["N", "M"], conflicts_with = "file")]
    pub random: Option<Vec<usize>>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: InputArgs,
}

#[derive(Args, Debug)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[arg(long, default_value_t = 0.25)]
    pub epsilon: f64,

    #[arg(long, default_value_t = 0.05)]
    pub nu: f64,

    #[arg(long, default_value_t = 2.0)]
    pub c1: f64,

    #[arg(long, default_value_t = 0.1)]
    pub c2: f64,

    #[arg(long, default_value_t = 2.0)]
    pub c5: f64,

    /// Step budget; defaults to floor(4 c1² / (c2 ε²)) + 2.
    #[arg(long)]
    pub max_steps: Option<usize>,

    #[arg(long, default_value_t = 2_000_000)]
    pub exhaustive_limit: u64,

    /// Also run the near-isometric refinement with this epsilon.
    #[arg(long)]
    pub refine: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    File,
    ProjectedBasis,
}

#[derive(Args, Debug)]
pub struct GreedyArgs {
    #[arg(long, value_enum)]
    pub generator: GeneratorKind,

    /// Frame file for `--generator file`.
    #[arg(long)]
    pub file: Option<PathBuf>,

    /// Repeat the file's vectors forever.
    #[arg(long)]
    pub cyclic: bool,

    #[arg(long)]
    pub terms: usize,

    #[arg(long, default_value_t = 10_000)]
    pub scan_limit: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 200)]
    pub ambient: usize,

    #[arg(long, default_value_t = 40)]
    pub rank: usize,

    /// Report the tail index for this epsilon.
    #[arg(long, default_value_t = 0.1)]
    pub tail_epsilon: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CounterexampleKind {
    Bracketless,
    Cc,
}

#[derive(Args, Debug)]
pub struct CounterexampleArgs {
    #[arg(long, value_enum)]
    pub kind: CounterexampleKind,

    /// Number of blocks for `bracketless`.
    #[arg(long, default_value_t = 4)]
    pub blocks: usize,

    /// Dimension for `cc`.
    #[arg(long, default_value_t = 8)]
    pub n: usize,

    /// Run midpoint bracket diagnostics (`bracketless`).
    #[arg(long)]
    pub diagnose: bool,

    /// Epsilons for the partial-sum check (`cc`).
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 0.25, 0.1])]
    pub epsilon: Vec<f64>,

    /// Write the frame file here (format from the extension).
    #[arg(long)]
    pub frame_out: Option<PathBuf>,

    /// Write diagnostics as CSV here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 100)]
    pub instances: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Process exit status.
#[derive(Debug)]
pub enum Failure {
    Frame(FrameError),
    BudgetExhausted,
    SelftestFailed,
}

impl From<FrameError> for Failure {
    fn from(e: FrameError) -> Self {
        Failure::Frame(e)
    }
}

pub fn exit_code(e: &FrameError) -> u8 {
    match e {
        FrameError::Parse { .. }
        | FrameError::InvalidParameter(_)
        | FrameError::EnumerationTooLarge { .. }
        | FrameError::Io(_) => 2,
        FrameError::Empty(_)
        | FrameError::DimensionMismatch { .. }
        | FrameError::NotAFrame { .. }
        | FrameError::NotTight { .. }
        | FrameError::NotProjection(_)
        | FrameError::Precondition(_) => 3,
        FrameError::Internal(_) => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::BudgetExhausted) => ExitCode::from(4),
        Err(Failure::SelftestFailed) => {
            eprintln!("error: selftest failed");
            ExitCode::from(1)
        }
        Err(Failure::Frame(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
