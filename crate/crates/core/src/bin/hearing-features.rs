use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hearing_features::pipeline::{run, Command, RunConfig};
use hearing_features::Error;

/// Feature extraction from committee-hearing transcripts.
///
/// Settings are resolved in order: built-in defaults, then the --config
/// file (key=value lines using the long flag names), then flags.
#[derive(Parser, Debug)]
#[command(name = "hearing-features", version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Sub,

    #[command(flatten)]
    options: Options,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Sub {
    /// Extract affiliated organizations from public comments.
    ExtractAffiliations,
    /// Train or load a stance tree, evaluate it, and classify public comments.
    ClassifyStance,
    /// Score legislator engagement with its per-component breakdown.
    ScoreEngagement,
    /// Mark roster members present, absent or not assessed.
    DetectAbsences,
    /// Rank organizations by hearings attended and legislators by engagement.
    Rank,
    /// Generate sequence-labeling corpora by organization substitution.
    GenTrainingData,
    /// Score the affiliation extractors against labeled comments.
    Evaluate,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::ExtractAffiliations => Command::ExtractAffiliations,
            Sub::ClassifyStance => Command::ClassifyStance,
            Sub::ScoreEngagement => Command::ScoreEngagement,
            Sub::DetectAbsences => Command::DetectAbsences,
            Sub::Rank => Command::Rank,
            Sub::GenTrainingData => Command::GenTrainingData,
            Sub::Evaluate => Command::Evaluate,
        }
    }
}

#[derive(Args, Debug, Default)]
struct Options {
    /// key=value configuration file
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Hearings, one JSON object per line
    #[arg(long, global = true, value_name = "FILE")]
    hearings: Option<PathBuf>,
    /// Organization registry, one name per line
    #[arg(long, global = true, value_name = "FILE")]
    registry: Option<PathBuf>,
    /// City and county names never accepted as organizations
    #[arg(long, global = true, value_name = "FILE")]
    places: Option<PathBuf>,
    /// Engagement weights file (alpha/beta/gamma/delta as key=value)
    #[arg(long, global = true, value_name = "FILE")]
    weights: Option<PathBuf>,
    /// Organization names dropped from rankings, one per line
    #[arg(long, global = true, value_name = "FILE")]
    exclusions: Option<PathBuf>,
    /// Labeled data: affiliation JSONL for evaluate, comment<TAB>label for classify-stance
    #[arg(long, global = true, value_name = "FILE")]
    labeled: Option<PathBuf>,
    /// Tagged comments (JSONL) for gen-training-data
    #[arg(long, global = true, value_name = "FILE")]
    comments: Option<PathBuf>,
    /// Affiliation cue phrases replacing the built-in list
    #[arg(long, global = true, value_name = "FILE")]
    cue_phrases: Option<PathBuf>,
    /// Stop verbs replacing the built-in list
    #[arg(long, global = true, value_name = "FILE")]
    stop_verbs: Option<PathBuf>,
    /// Load a stance tree instead of training one
    #[arg(long, global = true, value_name = "FILE")]
    tree: Option<PathBuf>,
    /// Save the stance tree used
    #[arg(long, global = true, value_name = "FILE")]
    save_tree: Option<PathBuf>,
    /// Report directory [default: reports]
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Vote weight [default: 0.5]
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Speaking-instance weight [default: 0.0005]
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Back-and-forth word weight [default: 0.00005]
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// Question weight [default: 0.01]
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Introduction window in countable words [default: 12]
    #[arg(long, global = true)]
    window_words: Option<usize>,
    /// Maximum tokens between a cue and the organization it introduces [default: 3]
    #[arg(long, global = true)]
    cue_distance: Option<usize>,
    /// Absent fraction above which a hearing is a special meeting [default: 0.6]
    #[arg(long, global = true)]
    special_meeting_fraction: Option<f64>,
    /// Back-and-forth chains need more words than this [default: 12]
    #[arg(long, global = true)]
    back_and_forth_words: Option<usize>,
    /// Utterances need more words than this to count as speaking [default: 6]
    #[arg(long, global = true)]
    speaking_words: Option<usize>,
    /// Seconds per speaking instance [default: 30]
    #[arg(long, global = true)]
    block_seconds: Option<f64>,
    /// Words per speaking instance when timing is missing [default: 75]
    #[arg(long, global = true)]
    block_words: Option<usize>,
    /// Back-and-forth word count: whole-exchange or legislator-only [default: whole-exchange]
    #[arg(long, global = true)]
    exchange_words: Option<String>,
    /// Stance training samples [default: 474]
    #[arg(long, global = true)]
    train_size: Option<usize>,
    /// Stance test samples [default: 167]
    #[arg(long, global = true)]
    test_size: Option<usize>,
    /// Stance tree depth limit [default: 5]
    #[arg(long, global = true)]
    max_depth: Option<usize>,
    /// Minimum samples per tree leaf [default: 2]
    #[arg(long, global = true)]
    min_leaf: Option<usize>,
    /// Recall-corpus copies per comment [default: 100]
    #[arg(long, global = true)]
    per_comment: Option<usize>,
    /// Precision-corpus sentences per organization [default: 4]
    #[arg(long, global = true)]
    per_org: Option<usize>,
    /// Random seed [default: 42]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads [default: available parallelism]
    #[arg(long, short = 'j', global = true)]
    jobs: Option<usize>,
    /// Only log warnings and errors
    #[arg(long, short = 'q', global = true)]
    quiet: bool,
}

impl Options {
    /// Flag values as config settings, weights file first.
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        let entries: Vec<(&'static str, Option<String>)> = vec![
            ("weights", path(&self.weights)),
            ("hearings", path(&self.hearings)),
            ("registry", path(&self.registry)),
            ("places", path(&self.places)),
            ("exclusions", path(&self.exclusions)),
            ("labeled", path(&self.labeled)),
            ("comments", path(&self.comments)),
            ("cue-phrases", path(&self.cue_phrases)),
            ("stop-verbs", path(&self.stop_verbs)),
            ("tree", path(&self.tree)),
            ("save-tree", path(&self.save_tree)),
            ("out-dir", path(&self.out_dir)),
            ("alpha", self.alpha.map(|v| v.to_string())),
            ("beta", self.beta.map(|v| v.to_string())),
            ("gamma", self.gamma.map(|v| v.to_string())),
            ("delta", self.delta.map(|v| v.to_string())),
            ("window-words", self.window_words.map(|v| v.to_string())),
            ("cue-distance", self.cue_distance.map(|v| v.to_string())),
            (
                "special-meeting-fraction",
                self.special_meeting_fraction.map(|v| v.to_string()),
            ),
            (
                "back-and-forth-words",
                self.back_and_forth_words.map(|v| v.to_string()),
            ),
            ("speaking-words", self.speaking_words.map(|v| v.to_string())),
            ("block-seconds", self.block_seconds.map(|v| v.to_string())),
            ("block-words", self.block_words.map(|v| v.to_string())),
            ("exchange-words", self.exchange_words.clone()),
            ("train-size", self.train_size.map(|v| v.to_string())),
            ("test-size", self.test_size.map(|v| v.to_string())),
            ("max-depth", self.max_depth.map(|v| v.to_string())),
            ("min-leaf", self.min_leaf.map(|v| v.to_string())),
            ("per-comment", self.per_comment.map(|v| v.to_string())),
            ("per-org", self.per_org.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("jobs", self.jobs.map(|v| v.to_string())),
        ];
        entries
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k, v)))
            .collect()
    }
}

fn build_config(options: &Options) -> Result<RunConfig, Error> {
    let mut config = RunConfig::default();
    if let Some(path) = &options.config {
        config.apply_config_file(path)?;
    }
    for (key, value) in options.overrides() {
        config
            .set(key, &value)
            .map_err(|e| Error::InvalidArgument(format!("--{key}: {e}")))?;
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = if cli.options.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let result = build_config(&cli.options).and_then(|config| run(cli.command.into(), &config));
    match result {
        Ok(report) => {
            print!("{}", report.summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
