use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use imcc::dataset::NormMethod;
use imcc::metrics::MetricKind;
use imcc::pipeline::KernelKind;

/// Multi-label learning with cluster-center augmentation.
#[derive(Debug, Parser)]
#[command(name = "imcc", version, args_override_self = true)]
pub struct Cli {
    /// Seed for every random choice (splits, folds, k-means, synthetic data).
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// `key = value` file whose entries override command-line flags.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model and write it to a file.
    #[command(args_override_self = true)]
    Train(TrainArgs),
    /// Score a dataset with a saved model and write predictions as CSV.
    #[command(args_override_self = true)]
    Predict(PredictArgs),
    /// Compare a predictions CSV with ground truth and print metrics as JSON.
    #[command(args_override_self = true)]
    Evaluate(EvaluateArgs),
    /// Repeated random splits with cross-validated grid search.
    #[command(args_override_self = true)]
    Benchmark(BenchmarkArgs),
    /// Friedman test and Nemenyi critical difference over a table of results.
    #[command(args_override_self = true)]
    Stats(StatsArgs),
    /// Write the synthetic blob dataset as CSV.
    #[command(name = "gen-synthetic", args_override_self = true)]
    GenSynthetic(SyntheticArgs),
    /// Print dataset statistics as JSON.
    #[command(args_override_self = true)]
    Describe(DataArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Dataset file: `.arff`, anything else is read as CSV.
    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,

    /// Number of trailing label columns.
    #[arg(long, value_name = "N", conflicts_with = "xml")]
    pub labels: Option<usize>,

    /// MULAN label XML naming the label attributes of an ARFF file.
    #[arg(long, value_name = "PATH")]
    pub xml: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,

    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,

    #[arg(long, default_value_t = 0.1)]
    pub gamma: f64,

    /// Number of k-means clusters.
    #[arg(long, default_value_t = 8)]
    pub clusters: usize,

    /// `gaussian` (kernel model) or `linear`.
    #[arg(long, default_value_t = KernelKind::Gaussian)]
    pub kernel: KernelKind,

    /// Feature normalization: `none`, `zscore` or `minmax`.
    #[arg(long, default_value = "zscore")]
    pub normalize: NormMethod,

    /// Independent k-means++ starts.
    #[arg(long, default_value_t = 1)]
    pub kmeans_restarts: usize,

    #[arg(long, value_name = "PATH")]
    pub model_out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,

    /// Dataset file: `.arff`, anything else is read as CSV.
    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,

    /// Number of trailing label columns; defaults to the model's label count.
    #[arg(long, value_name = "N", conflicts_with = "xml")]
    pub labels: Option<usize>,

    #[arg(long, value_name = "PATH")]
    pub xml: Option<PathBuf>,

    /// Output CSV; standard output when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Predictions CSV as written by `predict`.
    #[arg(long, value_name = "PATH")]
    pub predictions: PathBuf,

    /// Ground-truth dataset file.
    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,

    /// Number of trailing label columns; defaults to the predictions' label count.
    #[arg(long, value_name = "N", conflicts_with = "xml")]
    pub labels: Option<usize>,

    #[arg(long, value_name = "PATH")]
    pub xml: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[arg(long, default_value_t = 10)]
    pub repeats: usize,

    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,

    #[arg(long, default_value_t = 5)]
    pub folds: usize,

    /// Metric that picks the grid point.
    #[arg(long, default_value = "average_precision")]
    pub select_metric: MetricKind,

    /// Start from the full grid instead of the reduced one.
    #[arg(long)]
    pub full_grid: bool,

    /// Grid file (`alpha`, `beta`, `gamma`, `clusters`, `kernel` keys).
    #[arg(long, value_name = "PATH")]
    pub grid: Option<PathBuf>,

    /// Comma-separated alpha values.
    #[arg(long, value_name = "LIST")]
    pub alpha: Option<String>,

    /// Comma-separated beta values.
    #[arg(long, value_name = "LIST")]
    pub beta: Option<String>,

    /// Comma-separated gamma values.
    #[arg(long, value_name = "LIST")]
    pub gamma: Option<String>,

    /// Comma-separated cluster counts.
    #[arg(long, value_name = "LIST")]
    pub clusters: Option<String>,

    #[arg(long)]
    pub kernel: Option<KernelKind>,

    #[arg(long, default_value = "zscore")]
    pub normalize: NormMethod,

    #[arg(long, default_value_t = 1)]
    pub kmeans_restarts: usize,

    /// Run report JSON.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,

    /// Grid-search surface, one row per point per fold per trial.
    #[arg(long, value_name = "PATH")]
    pub surface_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// CSV of metric values: header of algorithm names, one row per dataset.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,

    /// Larger values are better (e.g. average precision).
    #[arg(long)]
    pub higher_is_better: bool,

    /// Nemenyi critical value q_alpha (2.949 for 7 algorithms at alpha = 0.05).
    #[arg(long)]
    pub q_alpha: f64,
}

#[derive(Debug, Args)]
pub struct SyntheticArgs {
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,

    #[arg(long, default_value_t = 400)]
    pub n: usize,

    #[arg(long, default_value_t = 10)]
    pub d: usize,

    #[arg(long, default_value_t = 6)]
    pub q: usize,

    #[arg(long, default_value_t = 8)]
    pub blobs: usize,

    #[arg(long, default_value_t = 0.05)]
    pub flip_prob: f64,

    #[arg(long, default_value_t = 1.5)]
    pub center_spread: f64,

    #[arg(long, default_value_t = 1.0)]
    pub blob_std: f64,

    #[arg(long, default_value_t = 0.4)]
    pub label_density: f64,
}
