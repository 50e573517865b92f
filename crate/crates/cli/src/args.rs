use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "mdrepair", version, about = "Rate regions and repair simulation for multiple-description storage")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal two-node repair scheme in closed form.
    TwoNode(TwoNodeArgs),
    /// Three-node distributed repair, optimized over the noise correlation.
    ThreeNode(ThreeNodeArgs),
    /// Baseline and repair curves over a range of d2, as CSV.
    Sweep(SweepArgs),
    /// Brute-force grid search over the test-channel parameters.
    Oracle(OracleArgs),
    /// Store, fail and repair nodes; report distortions and storage.
    Simulate(SimulateArgs),
    /// Evaluate a rate expression for test-channel parameters read from JSON.
    Entropy(EntropyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Expr {
    Thm3,
    Thm4,
    Prop1,
    Prp,
}

#[derive(Debug, Args)]
pub struct Distortions {
    /// Target mean-squared error from any one node.
    #[arg(long, value_parser = unit_interval)]
    pub d1: f64,
    /// Target mean-squared error from any two nodes.
    #[arg(long, value_parser = unit_interval)]
    pub d2: f64,
}

#[derive(Debug, Args)]
pub struct TwoNodeArgs {
    #[command(flatten)]
    pub d: Distortions,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ThreeNodeArgs {
    #[command(flatten)]
    pub d: Distortions,
    /// Coarse grid points of the correlation search.
    #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u32).range(8..))]
    pub grid: u32,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_parser = unit_interval)]
    pub d1: f64,
    #[arg(long, value_parser = unit_interval)]
    pub d2_min: f64,
    #[arg(long, value_parser = unit_interval)]
    pub d2_max: f64,
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u32).range(1..))]
    pub steps: u32,
    #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u32).range(8..))]
    pub grid: u32,
    /// Output file; standard output if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(2..=3))]
    pub nodes: u32,
    #[command(flatten)]
    pub d: Distortions,
    #[arg(long, default_value_t = 100)]
    pub rho_points: usize,
    #[arg(long, default_value_t = 800)]
    pub sigma_u_points: usize,
    #[arg(long, default_value_t = 10)]
    pub top_points: usize,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    pub nodes: u32,
    #[command(flatten)]
    pub d: Distortions,
    /// Source samples per block; each trial codes one block.
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Extra bits per sample granted to the scalar quantizers.
    #[arg(long, default_value_t = mdrepair::sim::DEFAULT_OVERHEAD_BITS)]
    pub overhead: f64,
    /// Report file; standard output if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    /// JSON file with the test-channel parameters.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub expr: Expr,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not in (0, 1)"))
    }
}
