use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cmpgarma", version, about = "COM-Poisson GARMA models for count time series")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model by MCMC; writes samples.csv and summary.json.
    Fit(FitArgs),
    /// One-step-ahead predictive pmf and fitted mu_t path from fitted samples.
    Predict(PredictArgs),
    /// Generate a synthetic series from given coefficients.
    Simulate(SimulateArgs),
    /// Print the truncated COM-Poisson pmf for one (mu, nu).
    Pmf(PmfArgs),
    /// Autocorrelation and trace tables for a samples file.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelChoice {
    Exchange,
    Direct,
}

/// Flags that override fields of the JSON config.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (config: output_dir).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(short, long)]
    pub p: Option<usize>,
    #[arg(short, long)]
    pub q: Option<usize>,
    /// Zero-replacement constant.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
    #[arg(long, value_enum)]
    pub kernel: Option<KernelChoice>,
    #[arg(long)]
    pub chains: Option<usize>,
    /// Predictive draws per posterior sample (config: prediction.draws_per_sample).
    #[arg(long)]
    pub draws: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Counts CSV.
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Samples files to pool; defaults to those `fit` wrote in the output directory.
    #[arg(long)]
    pub samples: Vec<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Comma-separated phi_1..phi_p.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub phi: Vec<f64>,
    /// Comma-separated theta_1..theta_q.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub theta: Vec<f64>,
    /// Comma-separated delta_1..delta_p.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub delta: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub c: f64,
    /// Series length, presample included.
    #[arg(long)]
    pub n: usize,
    /// Values for the first r positions; the last r are used. Defaults to all ones.
    #[arg(long, value_delimiter = ',')]
    pub presample: Vec<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PmfArgs {
    #[arg(long)]
    pub mu: f64,
    #[arg(long)]
    pub nu: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_terms: usize,
}

#[derive(Debug, Clone, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub samples: PathBuf,
    /// Defaults to the directory holding the samples file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = compois_garma::diagnostics::DEFAULT_MAX_LAG)]
    pub max_lag: usize,
}
