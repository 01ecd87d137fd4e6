use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fca_outlier::LossOrientation;

#[derive(Debug, Parser)]
#[command(
    name = "fca-outlier",
    version,
    about = "Explainable outlier detection with formal concept analysis"
)]
pub struct Cli {
    /// Worker threads for closure counting (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Only log warnings and errors.
    #[arg(short, long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the unsupervised detector and save it.
    FitUnsup(FitUnsupArgs),
    /// Learn agenda weights from labels and save the model.
    FitSup(FitSupArgs),
    /// Score the rows of a CSV file with a saved model.
    Score(ScoreArgs),
    /// Split, fit, score the held-out rows and report metrics.
    Eval(EvalArgs),
    /// Explain one object's score, or the model as a whole with --global.
    Explain(ExplainArgs),
    /// Closure-size histogram of one agenda.
    ExportHist(ExportHistArgs),
    /// Closure-size heat map of an attribute pair.
    ExportHeatmap(ExportHeatmapArgs),
    /// Summarize a saved model.
    Info(InfoArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Headed CSV file of numeric attributes.
    #[arg(long)]
    pub input: PathBuf,
    /// Column holding 0/1 labels (1 = outlier).
    #[arg(long)]
    pub label_column: Option<String>,
    /// Column holding record ids (default: 0-based row index).
    #[arg(long)]
    pub id_column: Option<String>,
}

#[derive(Debug, Args)]
pub struct DetectorArgs {
    /// Equal-width bins per attribute.
    #[arg(long)]
    pub bins: usize,
    /// Largest agenda size.
    #[arg(long, default_value_t = 2)]
    pub alpha: usize,
    /// Add the agenda of all attributes (the default).
    #[arg(long, overrides_with = "no_full")]
    pub include_full: bool,
    /// Leave out the agenda of all attributes.
    #[arg(long)]
    pub no_full: bool,
    /// Degree parameter; drawn from (0, 1] with --seed when absent.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// File of agendas, one per line: comma-separated attribute names, or `full`.
    #[arg(long)]
    pub agendas: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    /// Fit the scaler on every row instead of the training rows.
    #[arg(long)]
    pub scale_on_all: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, default_value_t = 500)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
    /// Initial weights are uniform in [-s, s].
    #[arg(long, default_value_t = 1.0)]
    pub init_scale: f64,
    /// Guard for the weight-sum denominator.
    #[arg(long, default_value_t = 1e-8)]
    pub eps: f64,
    #[arg(long, default_value_t = LossOrientation::Literal)]
    pub loss_orientation: LossOrientation,
    /// Grow the agenda space adaptively with this alpha schedule, e.g. 2,3,4.
    #[arg(long, value_delimiter = ',')]
    pub adaptive: Option<Vec<usize>>,
    /// Drop agendas below this share of absolute weight (default 1/(4|T|)).
    #[arg(long, requires = "adaptive")]
    pub drop_threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FitUnsupArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub detector: DetectorArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    /// Fit on every row even when labels are given.
    #[arg(long)]
    pub all_rows: bool,
    /// Model file to write.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitSupArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub detector: DetectorArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub train: TrainArgs,
    /// Train on every row instead of the training split.
    #[arg(long)]
    pub all_rows: bool,
    /// Write the per-epoch loss as CSV.
    #[arg(long)]
    pub loss_trace: Option<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub detector: DetectorArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    /// Learn agenda weights instead of averaging.
    #[arg(long)]
    pub supervised: bool,
    #[command(flatten)]
    pub train: TrainArgs,
    /// Score at or above which a record is flagged.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Write per-object test scores as CSV.
    #[arg(long)]
    pub scores_output: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Record id to explain.
    #[arg(long, required_unless_present = "global")]
    pub object: Option<String>,
    /// Look the object up in this CSV instead of the training data.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, requires = "input")]
    pub label_column: Option<String>,
    #[arg(long, requires = "input")]
    pub id_column: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
    /// Agendas with degree at or below this are left out.
    #[arg(long, default_value_t = fca_outlier::DEFAULT_DEGREE_FLOOR)]
    pub degree_floor: f64,
    /// Rank agendas for the whole model.
    #[arg(long, conflicts_with_all = ["object", "input"])]
    pub global: bool,
    /// Degree counted as high in --global output.
    #[arg(long, default_value_t = 0.5)]
    pub degree_threshold: f64,
    /// Print a sentence instead of JSON.
    #[arg(long, conflicts_with = "global")]
    pub text: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportHistArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Agenda name, e.g. `x0-x1` or `full`.
    #[arg(long)]
    pub agenda: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportHeatmapArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Row attribute, by name or index.
    #[arg(long)]
    pub x: String,
    /// Column attribute, by name or index.
    #[arg(long)]
    pub y: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}
