use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ctpkit_core::{SweepAxis, DEFAULT_SEED};

#[derive(Parser, Debug)]
#[command(name = "ctpkit", version, about = "Complementarity evaluation for human-AI prediction teams")]
pub struct Cli {
    /// Output style for stdout.
    #[arg(long, value_enum, global = true, default_value_t = Format::Human)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Machine,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate one episode log, or every log listed in a directory's manifest.
    Evaluate(EvaluateArgs),
    /// Generate episode logs from a scenario file.
    Simulate(SimulateArgs),
    /// Run a scenario across values of one parameter.
    Sweep(SweepArgs),
    /// Build the assurance checklist report for a directory of logs.
    Report(ReportArgs),
    /// Check an episode log or an assurance report.
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
pub struct BootstrapArgs {
    /// Attach a percentile bootstrap interval for the gross gain.
    #[arg(long)]
    pub bootstrap: bool,
    #[arg(long, default_value_t = 1000)]
    pub resamples: usize,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Log file, or directory containing manifest.txt.
    pub path: PathBuf,
    /// Conversion rate from cost units to loss units (> 0).
    #[arg(long, value_parser = positive_lambda)]
    pub lambda: f64,
    /// Also report CTP stability over consecutive windows of this many records.
    #[arg(long)]
    pub window: Option<usize>,
    #[command(flatten)]
    pub bootstrap: BootstrapArgs,
    /// Write the output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    pub config: PathBuf,
    /// Directory for the episode logs and manifest.
    #[arg(long)]
    pub out: PathBuf,
    /// Override the scenario's seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    pub config: PathBuf,
    /// Parameter to vary, e.g. lambda, human.noise_sd, protocol.rounds.
    #[arg(long, value_parser = parse_axis)]
    pub axis: SweepAxis,
    /// Comma-separated values.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub values: Vec<f64>,
    /// Sweep table output file.
    #[arg(long)]
    pub out: PathBuf,
    /// Override the scenario's base seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Directory containing manifest.txt.
    pub log_dir: PathBuf,
    #[arg(long, value_parser = positive_lambda)]
    pub lambda: f64,
    /// TOML file with narrative checklist entries.
    #[arg(long)]
    pub narrative: Option<PathBuf>,
    /// How the value of lambda was chosen (overrides the narrative file).
    #[arg(long)]
    pub lambda_justification: Option<String>,
    #[arg(long)]
    pub report_id: Option<String>,
    /// Timestamp recorded in the report; omitted when not given.
    #[arg(long)]
    pub created_at: Option<String>,
    #[command(flatten)]
    pub bootstrap: BootstrapArgs,
    /// Machine-readable report output file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Episode log or assurance report (JSON).
    pub path: PathBuf,
}

fn positive_lambda(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("lambda must be finite and > 0, got {s}"))
    }
}

fn parse_axis(s: &str) -> Result<SweepAxis, String> {
    s.parse().map_err(|e: ctpkit_core::Error| e.to_string())
}
