mod commands;
mod mosaic;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Attribute disentangling with DNA-like latent codes.
#[derive(Debug, Parser)]
#[command(name = "dnagan", version)]
pub struct Cli {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file or directory, depending on the command.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset (graymaps plus attribute list).
    Generate,
    /// Train on synthetic data or an external attribute list.
    Train(TrainArgs),
    /// Emit the strip A, B, A2, B2, A1, B1 for one pair.
    Swap(SwapArgs),
    /// Decode a sweep of attribute pieces from A towards B.
    Interpolate(InterpolateArgs),
    /// Report balancedness, the scheduling criterion and expected draw counts.
    Analyze(AnalyzeArgs),
    /// Monte Carlo estimate of draws needed to see every useful pair.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub steps: Option<usize>,
    /// Keep and swap the recessive piece instead of zeroing it.
    #[arg(long)]
    pub no_annihilate: bool,
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyArg>,
    /// Continue from a checkpoint written by an earlier run.
    #[arg(long)]
    pub resume: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SwapArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long = "a")]
    pub image_a: PathBuf,
    #[arg(long = "b")]
    pub image_b: PathBuf,
    /// 1-based attribute index.
    #[arg(long)]
    pub attribute: usize,
    /// Treat A as carrying the attribute without consulting the oracle.
    #[arg(long)]
    pub a_dominant: bool,
    /// Proceed even if the images agree at the attribute.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct InterpolateArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long = "a")]
    pub image_a: PathBuf,
    #[arg(long = "b")]
    pub image_b: PathBuf,
    /// One or two 1-based attribute indices, comma-separated.
    #[arg(long, value_delimiter = ',', num_args = 1..=2, required = true)]
    pub attrs: Vec<usize>,
    /// Samples per axis.
    #[arg(long, default_value_t = 5)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Attribute list whose labels define the census.
    #[arg(long, conflicts_with = "census")]
    pub attr_file: Option<PathBuf>,
    /// Image counts per label pattern, attribute 1 most significant.
    #[arg(long, value_delimiter = ',')]
    pub census: Option<Vec<u64>>,
    /// Attribute names to keep from the attribute list.
    #[arg(long, value_delimiter = ',')]
    pub select: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub census: Vec<u64>,
    #[arg(long, value_enum, default_value_t = StrategyChoice::Both)]
    pub strategy: StrategyChoice,
    #[arg(long, default_value_t = 10_000)]
    pub runs: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum StrategyArg {
    Iterative,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyChoice {
    Iterative,
    Random,
    Both,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
