use clap::{Args, Parser, Subcommand};

/// MARMA time-series toolkit: models on the open unit interval with a
/// Matsuoka conditional law and an ARMA-like systematic component.
#[derive(Debug, Parser)]
#[command(name = "marma", version, about)]
pub struct Cli {
    /// Worker threads for Monte Carlo and bootstrap work
    /// (default: all cores; MARMA_THREADS overrides when the flag is absent).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model to a CSV dataset by partial maximum likelihood.
    Fit(FitArgs),
    /// Point forecasts and bootstrap prediction intervals from a saved model.
    Forecast(ForecastArgs),
    /// Generate a dataset from a scenario configuration.
    Simulate(SimulateArgs),
    /// Run a Monte Carlo study (point estimation, goodness-of-fit or
    /// interval coverage) from a scenario configuration.
    Mc(McArgs),
    /// Residual diagnostics for a saved model on a dataset.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Input dataset (CSV with header).
    #[arg(long)]
    pub data: std::path::PathBuf,

    /// Column holding the observations.
    #[arg(long, default_value = "y")]
    pub y_col: String,

    /// Comma-separated covariate column names.
    #[arg(long, value_delimiter = ',')]
    pub x_cols: Vec<String>,

    /// Harmonic covariates generated from the row index, e.g. "sin:12,cos:12".
    #[arg(long, value_delimiter = ',')]
    pub harmonics: Vec<String>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Model order as "p,q".
    #[arg(long, default_value = "0,0")]
    pub order: String,

    /// Link function: logit, cloglog or loglog.
    #[arg(long, default_value = "cloglog")]
    pub link: String,

    /// Write the fit report (JSON) here.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,

    /// Save the fitted model (JSON) for later forecast/diagnose runs.
    #[arg(long)]
    pub save_model: Option<std::path::PathBuf>,

    /// Evaluation budget for the optimizer.
    #[arg(long, default_value_t = 10_000)]
    pub max_evals: usize,

    /// Score sup-norm required for convergence.
    #[arg(long, default_value_t = 1e-4)]
    pub grad_tol: f64,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    /// Fitted model file produced by `fit --save-model`.
    #[arg(long)]
    pub model: std::path::PathBuf,

    #[command(flatten)]
    pub data: DataArgs,

    /// Forecast horizon h.
    #[arg(long)]
    pub horizon: usize,

    /// Bootstrap path count m (0 disables intervals).
    #[arg(long, default_value_t = 0)]
    pub boot: usize,

    /// Two-sided interval level δ (intervals at 1 − δ coverage).
    #[arg(long, default_value_t = 0.05)]
    pub level: f64,

    /// Seed for the bootstrap streams.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Future covariate rows (CSV with the model's covariate columns).
    #[arg(long)]
    pub new_x: Option<std::path::PathBuf>,

    /// Output base path; writes <out>.csv and <out>.json.
    #[arg(long)]
    pub out: std::path::PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario configuration (JSON).
    #[arg(long)]
    pub config: std::path::PathBuf,

    /// Seed override (defaults to the scenario's seed).
    #[arg(long)]
    pub seed: Option<u64>,

    /// Output dataset CSV.
    #[arg(long)]
    pub out: std::path::PathBuf,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// Study configuration (JSON): scenario plus study kind.
    #[arg(long)]
    pub config: std::path::PathBuf,

    /// Seed override (defaults to the scenario's seed).
    #[arg(long)]
    pub seed: Option<u64>,

    /// Output report base path; writes <out>.json (and <out>.csv for
    /// point-estimation studies).
    #[arg(long)]
    pub out: std::path::PathBuf,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// Fitted model file produced by `fit --save-model`.
    #[arg(long)]
    pub model: std::path::PathBuf,

    #[command(flatten)]
    pub data: DataArgs,

    /// Largest autocorrelation lag to report.
    #[arg(long)]
    pub max_lag: Option<usize>,

    /// Diagnostics report (JSON).
    #[arg(long)]
    pub out: std::path::PathBuf,
}
