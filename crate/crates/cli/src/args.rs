use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "juicespec", version, about = "UV-Vis spectral modelling of grape juice")]
pub struct Cli {
    /// Worker threads for fold- and tree-level parallelism (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset as CSV.
    Synth(SynthArgs),
    /// Parse a dataset and print a summary.
    Validate(ValidateArgs),
    /// Cross-validate models and store metrics, predictions and a manifest.
    Evaluate(EvaluateArgs),
    /// Rank wavelengths by random-forest and linear-SVM importance.
    Rank(RankArgs),
    /// Render stored evaluation results as a table.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 31)]
    pub juices: usize,
    #[arg(long, default_value_t = 3)]
    pub replicates: usize,
    #[arg(long, default_value_t = 2)]
    pub regions: usize,
    #[arg(long, default_value_t = 4)]
    pub vineyards: usize,
    /// Instrument noise standard deviation (AU).
    #[arg(long, default_value_t = 0.005)]
    pub noise: f64,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Comma-separated list of astringency, bitterness, herbaceous, region, vineyard, or `all`.
    #[arg(long)]
    pub task: String,
    /// Comma-separated list of svm, rf, dnn1, dnn2, dnn3, cnn1d, lstm, bilstm, or `all`.
    #[arg(long, default_value = "svm")]
    pub model: String,
    /// loso, lojo, or `all`.
    #[arg(long, default_value = "loso")]
    pub cv: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Inclusive wavelength window in nm, e.g. 250:420.
    #[arg(long, value_name = "LO:HI")]
    pub window: Option<String>,
    /// key=value file overriding model hyperparameters.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Comma-separated task names, or `all`.
    #[arg(long, default_value = "all")]
    pub task: String,
    #[arg(long, default_value_t = 5)]
    pub top: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "LO:HI")]
    pub window: Option<String>,
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory searched recursively for stored results.
    #[arg(long, value_name = "DIR")]
    pub data: PathBuf,
    /// md or csv.
    #[arg(long, default_value = "md")]
    pub format: String,
    /// Write the report here instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}
