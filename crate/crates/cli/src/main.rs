//! emoflow: chat emotion analytics from the command line.
//!
//! Subcommands: `lexicon`, `train`, `classify`, `analyze`, `evaluate`.
//! Exit codes: 0 success, 1 runtime/data failure, 2 usage error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use emoflow_core::text::ModelKind;

/// Error carrying its exit code: 2 for usage problems (bad flags, missing
/// files), 1 for runtime/data failures.
#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub exit_code: u8,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { message: message.into(), exit_code: 2 }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self { message: message.into(), exit_code: 1 }
    }
}

impl From<emoflow_core::Error> for CliError {
    fn from(e: emoflow_core::Error) -> Self {
        use emoflow_core::Error as E;
        match e {
            E::MissingFile(_) | E::InvalidParameter(_) => CliError::usage(e.to_string()),
            other => CliError::runtime(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "emoflow",
    version,
    about = "Detect emotions in chat messages by fusing a text classifier with emoji sentiment intensity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML config file (lowest-precedence source after defaults)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed for every stochastic step
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for the parallel paths (0 = auto)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Print the effective configuration and extra progress detail
    #[arg(long, global = true)]
    verbose: bool,

    /// Fail on invalid lexicon rows (the default)
    #[arg(long, global = true, conflicts_with = "lenient")]
    strict: bool,

    /// Skip invalid lexicon rows with a diagnostic instead of failing
    #[arg(long, global = true)]
    lenient: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    #[value(name = "svm")]
    Svm,
    #[value(name = "gaussian_nb")]
    GaussianNb,
    #[value(name = "adaboost")]
    AdaBoost,
    #[value(name = "decision_tree")]
    DecisionTree,
    #[value(name = "knn")]
    Knn,
    #[value(name = "random_forest")]
    RandomForest,
}

impl From<KindArg> for ModelKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Svm => ModelKind::Svm,
            KindArg::GaussianNb => ModelKind::GaussianNb,
            KindArg::AdaBoost => ModelKind::AdaBoost,
            KindArg::DecisionTree => ModelKind::DecisionTree,
            KindArg::Knn => ModelKind::Knn,
            KindArg::RandomForest => ModelKind::RandomForest,
        }
    }
}

/// Hyperparameter knobs shared by `train` and `evaluate`.
#[derive(Debug, Args, Clone)]
struct HyperArgs {
    /// KNN neighbor count
    #[arg(long, default_value_t = 15)]
    k: usize,

    /// Minkowski distance order (1 = Manhattan, 2 = Euclidean)
    #[arg(long, default_value_t = 2.0)]
    p: f64,

    /// Tree splitting criterion (gini | info_gain)
    #[arg(long, default_value = "gini")]
    criterion: String,

    /// Maximum tree depth (unlimited when omitted)
    #[arg(long)]
    max_depth: Option<usize>,

    /// Minimum samples per leaf
    #[arg(long, default_value_t = 1)]
    min_leaf: usize,

    /// Trees in the random forest
    #[arg(long, default_value_t = 50)]
    n_trees: usize,

    /// Disable bootstrap resampling and feature subsampling in the forest
    #[arg(long)]
    no_bootstrap: bool,

    /// Boosting rounds
    #[arg(long, default_value_t = 50)]
    n_rounds: usize,

    /// SVM regularization parameter C
    #[arg(long, default_value_t = 1.0)]
    c: f64,

    /// SVM training epochs
    #[arg(long, default_value_t = 5)]
    epochs: usize,
}

#[derive(Debug, Args)]
struct RemoteArgs {
    /// Request timeout in seconds
    #[arg(long, default_value_t = 10)]
    timeout_secs: u64,

    /// Extra attempts after the first on transport failure
    #[arg(long, default_value_t = 2)]
    retries: u32,
}

#[derive(Debug, Args)]
struct LexiconArgs {
    /// Lexicon CSV (falls back to EMOFLOW_LEXICON, then the config file)
    #[arg(long)]
    lexicon: Option<PathBuf>,

    /// Emoji to look up: a literal character or a 0xHEX codepoint
    #[arg(long)]
    query: Option<String>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Corpus CSV with text,label columns
    #[arg(long)]
    corpus: PathBuf,

    /// Classifier kind
    #[arg(long)]
    model: KindArg,

    /// Output path for the model artifact
    #[arg(long)]
    out: PathBuf,

    /// Vocabulary pruning threshold
    #[arg(long, default_value_t = 2)]
    min_count: usize,

    #[command(flatten)]
    hyper: HyperArgs,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    /// Trained model artifact
    #[arg(long, conflicts_with = "endpoint")]
    model: Option<PathBuf>,

    /// Remote classifier endpoint (falls back to EMOFLOW_ENDPOINT/config)
    #[arg(long)]
    endpoint: Option<String>,

    /// Comma-separated label set for the remote endpoint
    #[arg(long)]
    labels: Option<String>,

    /// Single message text
    #[arg(long, conflicts_with = "input")]
    text: Option<String>,

    /// Batch input: chat file (JSON Lines or CSV)
    #[arg(long)]
    input: Option<PathBuf>,

    /// Lexicon CSV enabling the fused score (text-only otherwise)
    #[arg(long)]
    lexicon: Option<PathBuf>,

    /// Write records here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,

    #[command(flatten)]
    remote: RemoteArgs,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Chat log (JSON Lines or CSV with sender, timestamp, text)
    #[arg(long)]
    chat: PathBuf,

    /// Trained model artifact
    #[arg(long, conflicts_with = "endpoint")]
    model: Option<PathBuf>,

    /// Remote classifier endpoint
    #[arg(long)]
    endpoint: Option<String>,

    /// Comma-separated label set for the remote endpoint
    #[arg(long)]
    labels: Option<String>,

    /// Lexicon CSV (falls back to EMOFLOW_LEXICON/config)
    #[arg(long)]
    lexicon: Option<PathBuf>,

    /// Output directory for the report and plot-data tables
    #[arg(long, default_value = "analysis_out")]
    out_dir: PathBuf,

    /// Bucket width in minutes (must divide a day)
    #[arg(long, default_value_t = 60)]
    bucket_minutes: i64,

    #[command(flatten)]
    remote: RemoteArgs,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Corpus CSV with text,label columns
    #[arg(long)]
    corpus: PathBuf,

    /// Comma-separated model kinds (default: all six)
    #[arg(long)]
    models: Option<String>,

    /// Output directory for comparison.csv / comparison.txt
    #[arg(long, default_value = "eval_out")]
    out_dir: PathBuf,

    /// Held-out test fraction
    #[arg(long, default_value_t = 0.2)]
    test_fraction: f64,

    /// Vocabulary pruning threshold
    #[arg(long, default_value_t = 2)]
    min_count: usize,

    #[command(flatten)]
    hyper: HyperArgs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load a lexicon, print its statistics, optionally query one emoji
    Lexicon(LexiconArgs),
    /// Train a text classifier and write the model artifact
    Train(TrainArgs),
    /// Score messages with the hybrid text+emoji pipeline
    Classify(ClassifyArgs),
    /// Run the full chat analysis: load, score, bucket, report, export
    Analyze(AnalyzeArgs),
    /// Train and compare classifier kinds on one shared split
    Evaluate(EvaluateArgs),
}

#[cfg(feature = "parallel")]
fn configure_jobs(jobs: usize) {
    if jobs > 0 {
        // ignore the error if a pool already exists (tests call run twice)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
}

#[cfg(not(feature = "parallel"))]
fn configure_jobs(_jobs: usize) {}

fn run(cli: Cli) -> Result<(), CliError> {
    let settings = commands::build_settings(&cli.global, &cli.command)?;
    configure_jobs(settings.jobs.value);
    if settings.verbose {
        eprint!("{}", settings.describe());
    }
    match &cli.command {
        Command::Lexicon(args) => commands::cmd_lexicon(args, &settings),
        Command::Train(args) => commands::cmd_train(args, &settings),
        Command::Classify(args) => commands::cmd_classify(args, &settings),
        Command::Analyze(args) => commands::cmd_analyze(args, &settings),
        Command::Evaluate(args) => commands::cmd_evaluate(args, &settings),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.exit_code)
        }
    }
}
