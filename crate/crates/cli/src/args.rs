use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "tubepulse",
    version,
    about = "Predict video views and rank drafts against trending topics"
)]
pub struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check CSV files against the dataset schema.
    Validate(ValidateArgs),
    /// Correlation matrix, threshold pairs and outlier reports.
    Eda(EdaArgs),
    /// Filter outliers, split, fit a model and save it.
    Train(TrainArgs),
    /// Score saved models on a dataset.
    Evaluate(EvaluateArgs),
    /// Predict views for one video.
    Predict(PredictArgs),
    /// Predict and rank candidate drafts against trending topics.
    Rank(RankArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Tree,
    Forest,
    Gbt,
}

impl Algo {
    pub const NAMES: &'static str = "tree, forest, gbt";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileArg {
    Pre,
    Post,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformArg {
    Log1p,
    Identity,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// CSV files; defaults to the config's datasets.
    pub csv: Vec<PathBuf>,
    /// Print the reports as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct EdaArgs {
    pub csv: Vec<PathBuf>,
    /// Minimum |r| for a reported pair, in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Tukey fence multiplier.
    #[arg(long)]
    pub k: Option<f64>,
    /// Output directory for the artifacts.
    #[arg(long, default_value = "eda")]
    pub out: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV files; defaults to the config's datasets.
    pub csv: Vec<PathBuf>,
    /// Columns screened for outliers (view_count, likes, dislikes, comment_count).
    #[arg(long, value_delimiter = ',')]
    pub outlier_columns: Option<Vec<String>>,
    #[arg(long)]
    pub outlier_k: Option<f64>,
    /// Skip outlier removal.
    #[arg(long)]
    pub no_outliers: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum)]
    pub algo: Option<Algo>,
    #[arg(long, value_enum)]
    pub profile: Option<ProfileArg>,
    /// Drives the split and, for forests, the trees.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Training share of the rows.
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long, value_enum)]
    pub transform: Option<TransformArg>,
    /// Add the channel video-count column.
    #[arg(long)]
    pub channel_frequency: bool,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub min_samples_leaf: Option<usize>,
    #[arg(long)]
    pub min_gain: Option<f64>,
    #[arg(long)]
    pub n_trees: Option<usize>,
    #[arg(long)]
    pub feature_fraction: Option<f64>,
    #[arg(long)]
    pub no_bootstrap: bool,
    #[arg(long)]
    pub n_rounds: Option<usize>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Where to write the model file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    pub csv: Vec<PathBuf>,
    /// Model files; several render one comparison table.
    #[arg(long = "model", required = false)]
    pub models: Vec<PathBuf>,
    /// Split seed for models saved without pipeline metadata.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Also write the reports as JSON to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Print JSON instead of the table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long = "model")]
    pub models: Vec<PathBuf>,
    /// Request JSON file, `-` for stdin. Read from stdin when no
    /// video flags are given.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub title: Option<String>,
    #[arg(long)]
    pub description: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub tags: Option<Vec<String>>,
    #[arg(long)]
    pub category_id: Option<u32>,
    #[arg(long)]
    pub channel_title: Option<String>,
    #[arg(long)]
    pub published_at: Option<String>,
    #[arg(long)]
    pub as_of: Option<String>,
    #[arg(long)]
    pub comments_disabled: bool,
    #[arg(long)]
    pub ratings_disabled: bool,
    #[arg(long)]
    pub likes: Option<u64>,
    #[arg(long)]
    pub dislikes: Option<u64>,
    #[arg(long)]
    pub comment_count: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TrendArgs {
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long)]
    pub topics: Option<PathBuf>,
    /// Weight of the trend match in the rank score.
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long = "model")]
    pub models: Vec<PathBuf>,
    #[command(flatten)]
    pub trend: TrendArgs,
    /// JSON array of drafts, `-` for stdin.
    #[arg(long)]
    pub drafts: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long = "model")]
    pub models: Vec<PathBuf>,
    #[command(flatten)]
    pub trend: TrendArgs,
    #[arg(long)]
    pub host: Option<String>,
    #[arg(long)]
    pub port: Option<u16>,
    /// Concurrent requests served before shedding with 429.
    #[arg(long)]
    pub max_concurrency: Option<usize>,
}
