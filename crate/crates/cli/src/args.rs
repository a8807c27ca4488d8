use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use liftcode::design::Trials;

#[derive(Debug, Parser)]
#[command(
    name = "liftcode",
    version,
    about = "Build, analyze and simulate LDPC codes from iterated 2-lifts"
)]
pub struct Cli {
    /// TOML file with defaults; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads. Results do not depend on this.
    #[arg(long, global = true, env = "LIFTCODE_WORKERS")]
    pub workers: Option<usize>,

    /// Report failures as a JSON object on stderr.
    #[arg(long, global = true)]
    pub json_errors: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a code by guided 2-lifts of a protograph.
    Construct(ConstructArgs),
    /// Girth, stopping sets, expansion and floor estimates of a code.
    Analyze(AnalyzeArgs),
    /// Monte Carlo erasure-channel simulation.
    Simulate(SimulateArgs),
    /// Side-by-side metrics and error curves of two codes.
    Compare(CompareArgs),
    /// Convert a code to another format.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    /// Protograph: graph JSON, multiplicity matrix JSON or alist.
    #[arg(long, value_name = "FILE")]
    pub proto: PathBuf,
    #[arg(long)]
    pub stages: Option<usize>,
    /// Candidates per stage, or "all" for every sign vector.
    #[arg(long)]
    pub trials: Option<Trials>,
    /// Criteria file, JSON or TOML.
    #[arg(long, value_name = "FILE")]
    pub criteria: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fail when the protograph does not meet the criteria.
    #[arg(long)]
    pub require_proto: bool,
    /// Evaluate the criteria on every lifted stage.
    #[arg(long)]
    pub recheck_stages: bool,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Also write the final parity-check matrix as alist.
    #[arg(long, value_name = "FILE")]
    pub alist: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Code artifact, lift spec, graph JSON, matrix JSON or alist.
    #[arg(long, value_name = "FILE")]
    pub code: PathBuf,
    #[arg(long)]
    pub max_weight: Option<usize>,
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Search-node limit for the stopping-set enumeration.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Criteria file; adds a verdict to the report.
    #[arg(long, value_name = "FILE")]
    pub criteria: Option<PathBuf>,
    /// Erasure probabilities for floor estimates.
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_name = "FILE")]
    pub code: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    #[arg(long)]
    pub frames: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Stop a point after this many frame errors.
    #[arg(long)]
    pub stop_after: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<TableFormat>,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, value_name = "FILE")]
    pub a: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub b: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    #[arg(long)]
    pub frames: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_weight: Option<usize>,
    #[arg(long)]
    pub stop_after: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<TableFormat>,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    Alist,
    Json,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub format: ExportFormat,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}
