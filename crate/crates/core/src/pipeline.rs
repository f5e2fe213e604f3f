//! Run configuration and the end-to-end subcommands behind the
//! `hearing-features` executable. Every report is written to the output
//! directory; the returned [`RunReport`] lists the files and carries a
//! human-readable summary.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::{info, warn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::absentee::{apply_special_meeting_rule, detect_absences, write_attendance_csv};
use crate::affiliation::{AffiliationConfig, AffiliationExtractor, ExtractorVariant};
use crate::analytics::{
    exclusion_set, filter_for_affiliation, filter_for_engagement, format_engagement_table,
    format_org_table, org_frequency, public_comments, write_filter_stats_csv,
    write_org_rankings_csv, FilterStats,
};
use crate::augment::{
    emit_sequence_labels, generate_precision_corpus, generate_recall_corpus, parse_tagged_comments,
    DEFAULT_PER_COMMENT, DEFAULT_PER_ORG,
};
use crate::engagement::{
    accumulate_all, compute_scores, detect_roll_call, EngagementBreakdown, EngagementCounters,
    EngagementParams, EngagementWeights, ExchangeWords,
};
use crate::error::{Error, Result};
use crate::evaluation::{
    evaluate_extractor, parse_labeled_corpus, write_metrics_csv, write_unresolved_csv,
    LabeledComment,
};
use crate::gazetteer::{read_name_list, OrgRegistry};
use crate::stance::{
    count_phrases, parse_labeled_samples, rule_fallback, train_tree, DecisionTree,
    PhraseCountVector, StanceLabel, StanceMetrics, TreeParams,
};
use crate::transcript::{parse_hearing_file, Hearing, Role, Speaker};

pub const DEFAULT_TRAIN_SIZE: usize = 474;
pub const DEFAULT_TEST_SIZE: usize = 167;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    ExtractAffiliations,
    ClassifyStance,
    ScoreEngagement,
    DetectAbsences,
    Rank,
    GenTrainingData,
    Evaluate,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::ExtractAffiliations,
        Command::ClassifyStance,
        Command::ScoreEngagement,
        Command::DetectAbsences,
        Command::Rank,
        Command::GenTrainingData,
        Command::Evaluate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::ExtractAffiliations => "extract-affiliations",
            Command::ClassifyStance => "classify-stance",
            Command::ScoreEngagement => "score-engagement",
            Command::DetectAbsences => "detect-absences",
            Command::Rank => "rank",
            Command::GenTrainingData => "gen-training-data",
            Command::Evaluate => "evaluate",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown subcommand `{s}`")))
    }
}

/// Rule constants, all overridable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub window_words: usize,
    pub cue_distance: usize,
    pub special_meeting_fraction: f64,
    pub back_and_forth_words: usize,
    pub speaking_words: usize,
    pub block_seconds: f64,
    pub block_words: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        let engagement = EngagementParams::default();
        Thresholds {
            window_words: crate::affiliation::DEFAULT_WINDOW_WORDS,
            cue_distance: crate::affiliation::DEFAULT_CUE_DISTANCE,
            special_meeting_fraction: crate::absentee::DEFAULT_SPECIAL_MEETING_FRACTION,
            back_and_forth_words: engagement.back_and_forth_min_words,
            speaking_words: engagement.speaking_min_words,
            block_seconds: engagement.block_seconds,
            block_words: engagement.block_words,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("window-words", self.window_words),
            ("cue-distance", self.cue_distance),
            ("back-and-forth-words", self.back_and_forth_words),
            ("speaking-words", self.speaking_words),
            ("block-words", self.block_words),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(Error::InvalidArgument(format!("{name} must be positive")));
            }
        }
        if !(self.block_seconds.is_finite() && self.block_seconds > 0.0) {
            return Err(Error::InvalidArgument(
                "block-seconds must be positive".into(),
            ));
        }
        let f = self.special_meeting_fraction;
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::InvalidArgument(
                "special-meeting-fraction must be in (0, 1]".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub hearings: Option<PathBuf>,
    pub registry: Option<PathBuf>,
    pub places: Option<PathBuf>,
    pub weights_file: Option<PathBuf>,
    pub exclusions: Option<PathBuf>,
    /// Labeled affiliations (evaluate) or labeled stance samples
    /// (classify-stance).
    pub labeled: Option<PathBuf>,
    /// Tagged comments for gen-training-data.
    pub comments: Option<PathBuf>,
    pub cue_phrases: Option<PathBuf>,
    pub stop_verbs: Option<PathBuf>,
    pub tree: Option<PathBuf>,
    pub save_tree: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub weights: EngagementWeights,
    pub thresholds: Thresholds,
    pub exchange_words: ExchangeWords,
    pub train_size: usize,
    pub test_size: usize,
    pub tree_params: TreeParams,
    pub per_comment: usize,
    pub per_org: usize,
    pub seed: u64,
    /// Worker threads; `None` uses the available parallelism.
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            hearings: None,
            registry: None,
            places: None,
            weights_file: None,
            exclusions: None,
            labeled: None,
            comments: None,
            cue_phrases: None,
            stop_verbs: None,
            tree: None,
            save_tree: None,
            out_dir: PathBuf::from("reports"),
            weights: EngagementWeights::default(),
            thresholds: Thresholds::default(),
            exchange_words: ExchangeWords::WholeExchange,
            train_size: DEFAULT_TRAIN_SIZE,
            test_size: DEFAULT_TEST_SIZE,
            tree_params: TreeParams::default(),
            per_comment: DEFAULT_PER_COMMENT,
            per_org: DEFAULT_PER_ORG,
            seed: DEFAULT_SEED,
            jobs: None,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("{key}: cannot parse `{value}`")))
}

impl RunConfig {
    /// Keys accepted by [`RunConfig::set`]; the same names as the long flags.
    pub const KEYS: &'static [&'static str] = &[
        "hearings",
        "registry",
        "places",
        "weights",
        "exclusions",
        "labeled",
        "comments",
        "cue-phrases",
        "stop-verbs",
        "tree",
        "save-tree",
        "out-dir",
        "alpha",
        "beta",
        "gamma",
        "delta",
        "window-words",
        "cue-distance",
        "special-meeting-fraction",
        "back-and-forth-words",
        "speaking-words",
        "block-seconds",
        "block-words",
        "exchange-words",
        "train-size",
        "test-size",
        "max-depth",
        "min-leaf",
        "per-comment",
        "per-org",
        "seed",
        "jobs",
    ];

    /// Applies one setting. A `weights` file replaces all four weights at
    /// once, so individual weight keys should come after it.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let path = || Some(PathBuf::from(value));
        match key {
            "hearings" => self.hearings = path(),
            "registry" => self.registry = path(),
            "places" => self.places = path(),
            "weights" => {
                self.weights = EngagementWeights::load(Path::new(value))?;
                self.weights_file = path();
            }
            "exclusions" => self.exclusions = path(),
            "labeled" => self.labeled = path(),
            "comments" => self.comments = path(),
            "cue-phrases" => self.cue_phrases = path(),
            "stop-verbs" => self.stop_verbs = path(),
            "tree" => self.tree = path(),
            "save-tree" => self.save_tree = path(),
            "out-dir" => self.out_dir = PathBuf::from(value),
            "alpha" => self.weights.alpha = parse_value(key, value)?,
            "beta" => self.weights.beta = parse_value(key, value)?,
            "gamma" => self.weights.gamma = parse_value(key, value)?,
            "delta" => self.weights.delta = parse_value(key, value)?,
            "window-words" => self.thresholds.window_words = parse_value(key, value)?,
            "cue-distance" => self.thresholds.cue_distance = parse_value(key, value)?,
            "special-meeting-fraction" => {
                self.thresholds.special_meeting_fraction = parse_value(key, value)?
            }
            "back-and-forth-words" => {
                self.thresholds.back_and_forth_words = parse_value(key, value)?
            }
            "speaking-words" => self.thresholds.speaking_words = parse_value(key, value)?,
            "block-seconds" => self.thresholds.block_seconds = parse_value(key, value)?,
            "block-words" => self.thresholds.block_words = parse_value(key, value)?,
            "exchange-words" => {
                self.exchange_words = match value {
                    "whole-exchange" => ExchangeWords::WholeExchange,
                    "legislator-only" => ExchangeWords::LegislatorOnly,
                    other => return Err(Error::InvalidArgument(format!(
                        "exchange-words: expected whole-exchange or legislator-only, got `{other}`"
                    ))),
                }
            }
            "train-size" => self.train_size = parse_value(key, value)?,
            "test-size" => self.test_size = parse_value(key, value)?,
            "max-depth" => self.tree_params.max_depth = parse_value(key, value)?,
            "min-leaf" => self.tree_params.min_leaf = parse_value(key, value)?,
            "per-comment" => self.per_comment = parse_value(key, value)?,
            "per-org" => self.per_org = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "jobs" => self.jobs = Some(parse_value(key, value)?),
            other => return Err(Error::InvalidArgument(format!("unknown setting `{other}`"))),
        }
        Ok(())
    }

    /// Applies `key=value` lines; `#` starts a comment line.
    pub fn apply_config_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, "expected key=value"))?;
            self.set(key.trim(), value)
                .map_err(|e| Error::parse(i + 1, e.to_string()))?;
        }
        Ok(())
    }

    pub fn apply_config_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_config_text(&text).map_err(|e| match e {
            Error::Parse { line, message } => {
                Error::InvalidArgument(format!("{}:{line}: {message}", path.display()))
            }
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.thresholds.validate()?;
        self.weights.validate()?;
        if self.tree_params.min_leaf == 0 || self.tree_params.max_depth == 0 {
            return Err(Error::InvalidArgument(
                "max-depth and min-leaf must be positive".into(),
            ));
        }
        if self.test_size == 0 || self.train_size == 0 {
            return Err(Error::InvalidArgument(
                "train-size and test-size must be positive".into(),
            ));
        }
        if self.per_comment == 0 || self.per_org == 0 {
            return Err(Error::InvalidArgument(
                "per-comment and per-org must be positive".into(),
            ));
        }
        if self.jobs == Some(0) {
            return Err(Error::InvalidArgument("jobs must be positive".into()));
        }
        Ok(())
    }

    pub fn engagement_params(&self) -> EngagementParams {
        EngagementParams {
            speaking_min_words: self.thresholds.speaking_words,
            block_seconds: self.thresholds.block_seconds,
            block_words: self.thresholds.block_words,
            back_and_forth_min_words: self.thresholds.back_and_forth_words,
            exchange_words: self.exchange_words,
        }
    }

    fn affiliation_config(&self) -> Result<AffiliationConfig> {
        let mut config = AffiliationConfig::default()
            .with_files(self.cue_phrases.as_deref(), self.stop_verbs.as_deref())?;
        config.window_words = self.thresholds.window_words;
        config.cue_distance = self.thresholds.cue_distance;
        Ok(config)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    /// Text for standard output.
    pub summary: String,
}

/// Runs one subcommand on a worker pool of the configured size.
pub fn run(command: Command, config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = config.jobs {
        builder = builder.num_threads(jobs);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Invariant(format!("cannot start worker pool: {e}")))?;
    info!("{command}: writing reports to {}", config.out_dir.display());
    pool.install(|| match command {
        Command::ExtractAffiliations => extract_affiliations(config),
        Command::ClassifyStance => classify_stance(config),
        Command::ScoreEngagement => score_engagement(config),
        Command::DetectAbsences => detect_absences_cmd(config),
        Command::Rank => rank(config),
        Command::GenTrainingData => gen_training_data(config),
        Command::Evaluate => evaluate(config),
    })
}

fn require<'a>(value: &'a Option<PathBuf>, flag: &str, command: &str) -> Result<&'a Path> {
    value
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument(format!("{command} requires --{flag}")))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

/// Errors carrying only a line number get the file name attached.
fn in_file(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { line, message } => {
            Error::InvalidArgument(format!("{}:{line}: {message}", path.display()))
        }
        Error::Invalid {
            line,
            hearing,
            field,
            message,
        } => Error::InvalidArgument(format!(
            "{}:{line}: hearing {hearing}: field `{field}`: {message}",
            path.display()
        )),
        other => other,
    }
}

fn load_hearings(config: &RunConfig, command: &str) -> Result<Vec<Hearing>> {
    let path = require(&config.hearings, "hearings", command)?;
    let hearings = parse_hearing_file(open(path)?).map_err(|e| in_file(path, e))?;
    info!("loaded {} hearings from {}", hearings.len(), path.display());
    Ok(hearings)
}

fn load_registry(config: &RunConfig, command: &str) -> Result<OrgRegistry> {
    let orgs = read_name_list(require(&config.registry, "registry", command)?)?;
    let places = match &config.places {
        Some(path) => read_name_list(path)?,
        None => Vec::new(),
    };
    let load = OrgRegistry::from_names(orgs, places);
    for rejected in &load.rejected {
        warn!("registry entry rejected: {rejected}");
    }
    info!("registry holds {} organizations", load.registry.len());
    Ok(load.registry)
}

struct Report<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl<'a> Report<'a> {
    fn new(config: &'a RunConfig) -> Self {
        Report {
            dir: &config.out_dir,
            files: Vec::new(),
        }
    }

    fn write(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> Result<()>,
    ) -> Result<()> {
        fs::create_dir_all(self.dir).map_err(|e| Error::io(self.dir, e))?;
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut sink = BufWriter::new(file);
        body(&mut sink)?;
        sink.flush().map_err(|e| Error::io(&path, e))?;
        info!("wrote {}", path.display());
        self.files.push(path);
        Ok(())
    }

    fn finish(self, summary: String) -> RunReport {
        RunReport {
            files: self.files,
            summary,
        }
    }
}

fn log_filter(name: &str, stats: &FilterStats) {
    info!(
        "{name} filter: {} hearings in, {} without votes, {} without public comment, \
         {} with fewer than 3 speaking legislators, {} floor sessions, {} kept",
        stats.input,
        stats.removed_no_votes,
        stats.removed_no_public_comment,
        stats.removed_few_speakers,
        stats.removed_floor_session,
        stats.kept
    );
}

/// Accepted organizations of every public comment, per hearing, in input
/// order.
fn hearing_affiliations(
    hearings: &[&Hearing],
    extractor: &AffiliationExtractor<'_>,
) -> Vec<Vec<(usize, String, Vec<String>)>> {
    hearings
        .par_iter()
        .map(|h| {
            public_comments(h)
                .filter_map(|u| {
                    let speaker = h.speaker_of(u)?;
                    let accepted = extractor.extract(&u.text, speaker).accepted;
                    Some((u.index, u.speaker.clone(), accepted))
                })
                .collect()
        })
        .collect()
}

fn extract_affiliations(config: &RunConfig) -> Result<RunReport> {
    let hearings = load_hearings(config, "extract-affiliations")?;
    let registry = load_registry(config, "extract-affiliations")?;
    let affiliation = config.affiliation_config()?;
    let extractor = AffiliationExtractor::new(&registry, &affiliation);
    let (kept, stats) = filter_for_affiliation(&hearings);
    log_filter("affiliation", &stats);

    let results: Vec<Vec<_>> = kept
        .par_iter()
        .map(|h| {
            public_comments(h)
                .filter_map(|u| {
                    let speaker = h.speaker_of(u)?;
                    Some((
                        u.index,
                        u.speaker.clone(),
                        extractor.extract(&u.text, speaker),
                    ))
                })
                .collect()
        })
        .collect();

    let mut report = Report::new(config);
    let mut comments = 0usize;
    let mut accepted = 0usize;
    report.write("affiliations.csv", |sink| {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record([
            "hearing_id",
            "utterance_index",
            "speaker_id",
            "organization",
        ])?;
        for (h, rows) in kept.iter().zip(&results) {
            for (index, speaker, result) in rows {
                comments += 1;
                for org in &result.accepted {
                    accepted += 1;
                    w.write_record([&h.id, &index.to_string(), speaker, org])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    })?;
    report.write("rejected_candidates.csv", |sink| {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["hearing_id", "utterance_index", "candidate", "reason"])?;
        for (h, rows) in kept.iter().zip(&results) {
            for (index, _, result) in rows {
                for (candidate, reason) in &result.rejected {
                    w.write_record([
                        &h.id,
                        &index.to_string(),
                        candidate.name(),
                        &reason.to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    })?;
    report.write("filter_stats.csv", |sink| {
        write_filter_stats_csv(&[("affiliation", stats)], sink)
    })?;
    let summary = format!(
        "{} hearings kept of {}; {comments} public comments; {accepted} affiliations accepted\n",
        stats.kept, stats.input
    );
    Ok(report.finish(summary))
}

enum StanceModel {
    Tree(DecisionTree),
    Rules,
}

impl StanceModel {
    fn classify(&self, vector: PhraseCountVector) -> StanceLabel {
        match self {
            StanceModel::Tree(tree) => tree.classify(&vector),
            StanceModel::Rules => rule_fallback(vector),
        }
    }
}

/// Shuffles with the run seed and splits into (train, test). When there are
/// fewer samples than requested, the configured train:test ratio is kept.
fn split_samples<T: Clone>(samples: &[T], config: &RunConfig) -> (Vec<T>, Vec<T>) {
    let mut shuffled = samples.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));
    let requested = config.train_size + config.test_size;
    let (train, test) = if shuffled.len() >= requested {
        (config.train_size, config.test_size)
    } else {
        let test = ((shuffled.len() * config.test_size) as f64 / requested as f64).round() as usize;
        let test = test.clamp(
            1.min(shuffled.len()),
            shuffled.len().saturating_sub(1).max(1),
        );
        warn!(
            "only {} labeled samples; using {} for training and {} for testing",
            shuffled.len(),
            shuffled.len() - test,
            test
        );
        (shuffled.len() - test, test)
    };
    let test_set = shuffled[train..train + test].to_vec();
    shuffled.truncate(train);
    (shuffled, test_set)
}

fn write_stance_metrics<W: Write>(metrics: &StanceMetrics, samples: usize, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record([
        "class",
        "true_positives",
        "false_negatives",
        "false_positives",
        "f1",
    ])?;
    for (label, &(tp, fn_, fp)) in StanceLabel::ALL.iter().zip(&metrics.per_class) {
        w.write_record([
            label.as_str().to_string(),
            tp.to_string(),
            fn_.to_string(),
            fp.to_string(),
            format!("{:.4}", crate::evaluation::f1(tp, fn_, fp).value),
        ])?;
    }
    w.write_record([
        "macro".into(),
        String::new(),
        String::new(),
        String::new(),
        format!("{:.4}", metrics.macro_f1),
    ])?;
    w.write_record([
        "accuracy".into(),
        samples.to_string(),
        String::new(),
        String::new(),
        format!("{:.4}", metrics.accuracy),
    ])?;
    w.flush()?;
    Ok(())
}

fn classify_stance(config: &RunConfig) -> Result<RunReport> {
    if config.labeled.is_none() && config.hearings.is_none() {
        return Err(Error::InvalidArgument(
            "classify-stance requires --labeled, --hearings, or both".into(),
        ));
    }
    let mut report = Report::new(config);
    let mut summary = String::new();

    let labeled: Option<Vec<(PhraseCountVector, StanceLabel)>> = match &config.labeled {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let samples = parse_labeled_samples(&text).map_err(|e| in_file(path, e))?;
            info!("loaded {} labeled stance samples", samples.len());
            Some(
                samples
                    .iter()
                    .map(|(c, l)| (count_phrases(c), *l))
                    .collect(),
            )
        }
        None => None,
    };

    let (model, test_set) = match (&config.tree, &labeled) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let tree = DecisionTree::from_text(&text).map_err(|e| in_file(path, e))?;
            info!(
                "loaded tree of depth {} from {}",
                tree.depth(),
                path.display()
            );
            (StanceModel::Tree(tree), labeled.clone())
        }
        (None, Some(samples)) => {
            let (train, test) = split_samples(samples, config);
            let tree = train_tree(&train, config.tree_params)?;
            tree.validate()?;
            info!(
                "trained tree of depth {} on {} samples",
                tree.depth(),
                train.len()
            );
            summary.push_str(&format!(
                "trained on {} samples, tested on {}\n",
                train.len(),
                test.len()
            ));
            (StanceModel::Tree(tree), Some(test))
        }
        (None, None) => {
            info!("no tree supplied; using the rule fallback");
            (StanceModel::Rules, None)
        }
    };

    if let (Some(path), StanceModel::Tree(tree)) = (&config.save_tree, &model) {
        fs::write(path, tree.to_text()).map_err(|e| Error::io(path, e))?;
        info!("saved tree to {}", path.display());
    }

    if let Some(test) = test_set {
        let pairs: Vec<_> = test
            .iter()
            .map(|(v, truth)| (*truth, model.classify(*v)))
            .collect();
        let metrics = StanceMetrics::from_pairs(&pairs);
        summary.push_str(&format!(
            "stance macro F1 {:.4}, accuracy {:.4} on {} samples\n",
            metrics.macro_f1,
            metrics.accuracy,
            pairs.len()
        ));
        report.write("stance_metrics.csv", |sink| {
            write_stance_metrics(&metrics, pairs.len(), sink)
        })?;
    }

    if config.hearings.is_some() {
        let hearings = load_hearings(config, "classify-stance")?;
        let (kept, stats) = filter_for_affiliation(&hearings);
        log_filter("affiliation", &stats);
        let mut counts = BTreeMap::<StanceLabel, usize>::new();
        report.write("stances.csv", |sink| {
            let mut w = csv::Writer::from_writer(sink);
            w.write_record([
                "hearing_id",
                "utterance_index",
                "speaker_id",
                "stance",
                "strong_opposition",
                "strong_support",
                "medium_opposition",
                "medium_support",
                "weak_support",
            ])?;
            for h in &kept {
                for u in public_comments(h) {
                    let vector = count_phrases(&u.text);
                    let label = model.classify(vector);
                    *counts.entry(label).or_default() += 1;
                    let mut row = vec![
                        h.id.clone(),
                        u.index.to_string(),
                        u.speaker.clone(),
                        label.to_string(),
                    ];
                    row.extend(vector.to_array().iter().map(u32::to_string));
                    w.write_record(&row)?;
                }
            }
            w.flush()?;
            Ok(())
        })?;
        for label in StanceLabel::ALL {
            summary.push_str(&format!(
                "{label}: {}\n",
                counts.get(&label).copied().unwrap_or(0)
            ));
        }
    }
    Ok(report.finish(summary))
}

fn legislator_names(hearings: &[&Hearing]) -> BTreeMap<String, String> {
    hearings
        .iter()
        .flat_map(|h| h.roster())
        .map(|s| (s.id.clone(), s.full_name.clone()))
        .collect()
}

struct Scored {
    id: String,
    name: String,
    counters: EngagementCounters,
    breakdown: EngagementBreakdown,
}

/// Engagement of every roster member over the hearings that pass the
/// engagement filter, ranked.
fn engagement_ranking(
    hearings: &[Hearing],
    config: &RunConfig,
) -> Result<(Vec<Scored>, FilterStats)> {
    let (kept, stats) = filter_for_engagement(hearings);
    log_filter("engagement", &stats);
    let names = legislator_names(&kept);
    let totals = accumulate_all(&kept, &config.engagement_params());
    let mut scored = Vec::with_capacity(totals.len());
    for (id, counters) in totals {
        let breakdown = compute_scores(&counters, &config.weights)?;
        let name = names.get(&id).cloned().unwrap_or_else(|| id.clone());
        scored.push(Scored {
            id,
            name,
            counters,
            breakdown,
        });
    }
    // rank_legislators order, with the id settling equal names
    scored.sort_by(|a, b| {
        b.breakdown
            .total
            .total_cmp(&a.breakdown.total)
            .then_with(|| a.name.cmp(&b.name))
            .then_with(|| a.id.cmp(&b.id))
    });
    Ok((scored, stats))
}

fn write_engagement_csv<W: Write>(rows: &[Scored], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record([
        "rank",
        "legislator_id",
        "name",
        "total",
        "vote",
        "speaking",
        "back_and_forth",
        "question",
        "number_votes",
        "num_hearings_on_committee",
        "num_times_speaking",
        "num_words_in_back_and_forth",
        "num_questions",
    ])?;
    for (i, s) in rows.iter().enumerate() {
        let b = &s.breakdown;
        let c = &s.counters;
        w.write_record([
            (i + 1).to_string(),
            s.id.clone(),
            s.name.clone(),
            format!("{:.6}", b.total),
            format!("{:.6}", b.vote_score),
            format!("{:.6}", b.speaking_score),
            format!("{:.6}", b.back_and_forth_score),
            format!("{:.6}", b.question_score),
            c.number_votes.to_string(),
            c.num_hearings_on_committee.to_string(),
            c.num_times_speaking.to_string(),
            c.num_words_in_back_and_forth.to_string(),
            c.num_questions.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn score_engagement(config: &RunConfig) -> Result<RunReport> {
    let hearings = load_hearings(config, "score-engagement")?;
    let (scored, stats) = engagement_ranking(&hearings, config)?;
    let mut report = Report::new(config);
    report.write("engagement.csv", |sink| write_engagement_csv(&scored, sink))?;
    report.write("filter_stats.csv", |sink| {
        write_filter_stats_csv(&[("engagement", stats)], sink)
    })?;
    let table: Vec<_> = scored
        .iter()
        .map(|s| (s.name.clone(), s.breakdown))
        .collect();
    Ok(report.finish(format_engagement_table(&table)))
}

fn detect_absences_cmd(config: &RunConfig) -> Result<RunReport> {
    let hearings = load_hearings(config, "detect-absences")?;
    let fraction = config.thresholds.special_meeting_fraction;
    let per_hearing: Vec<_> = hearings
        .par_iter()
        .map(|h| {
            let roll_call = detect_roll_call(h);
            apply_special_meeting_rule(detect_absences(h, roll_call.as_ref()), fraction)
        })
        .collect();
    let records: Vec<_> = per_hearing.into_iter().flatten().collect();
    let mut tally = BTreeMap::<String, usize>::new();
    for r in &records {
        *tally.entry(r.status.to_string()).or_default() += 1;
    }
    let mut report = Report::new(config);
    report.write("attendance.csv", |sink| {
        write_attendance_csv(&records, sink)
    })?;
    let summary: String = tally.iter().map(|(k, v)| format!("{k}: {v}\n")).collect();
    info!("attendance: {}", summary.trim().replace('\n', ", "));
    Ok(report.finish(summary))
}

fn rank(config: &RunConfig) -> Result<RunReport> {
    let hearings = load_hearings(config, "rank")?;
    let registry = load_registry(config, "rank")?;
    let affiliation = config.affiliation_config()?;
    let extractor = AffiliationExtractor::new(&registry, &affiliation);
    let exclusions = match &config.exclusions {
        Some(path) => exclusion_set(&read_name_list(path)?),
        None => Default::default(),
    };

    let (kept, affiliation_stats) = filter_for_affiliation(&hearings);
    log_filter("affiliation", &affiliation_stats);
    let per_hearing: Vec<Vec<String>> = hearing_affiliations(&kept, &extractor)
        .into_iter()
        .map(|rows| rows.into_iter().flat_map(|(_, _, orgs)| orgs).collect())
        .collect();
    let orgs = org_frequency(&per_hearing, &exclusions);

    let (scored, engagement_stats) = engagement_ranking(&hearings, config)?;

    let mut report = Report::new(config);
    report.write("org_rankings.csv", |sink| {
        write_org_rankings_csv(&orgs, sink)
    })?;
    report.write("engagement_rankings.csv", |sink| {
        write_engagement_csv(&scored, sink)
    })?;
    report.write("filter_stats.csv", |sink| {
        write_filter_stats_csv(
            &[
                ("affiliation", affiliation_stats),
                ("engagement", engagement_stats),
            ],
            sink,
        )
    })?;
    let table: Vec<_> = scored
        .iter()
        .map(|s| (s.name.clone(), s.breakdown))
        .collect();
    let summary = format!(
        "{}\n{}",
        format_org_table(&orgs),
        format_engagement_table(&table)
    );
    Ok(report.finish(summary))
}

fn gen_training_data(config: &RunConfig) -> Result<RunReport> {
    let path = require(&config.comments, "comments", "gen-training-data")?;
    let comments = parse_tagged_comments(open(path)?).map_err(|e| in_file(path, e))?;
    let registry = load_registry(config, "gen-training-data")?;
    info!("loaded {} tagged comments", comments.len());
    let recall = generate_recall_corpus(&comments, &registry, config.per_comment, config.seed)?;
    let precision = generate_precision_corpus(&comments, &registry, config.per_org, config.seed)?;
    info!(
        "generated {} recall and {} precision sentences",
        recall.len(),
        precision.len()
    );
    let mut report = Report::new(config);
    report.write("recall_corpus.tsv", |sink| {
        emit_sequence_labels(&recall, sink)
    })?;
    report.write("precision_corpus.tsv", |sink| {
        emit_sequence_labels(&precision, sink)
    })?;
    Ok(report.finish(format!(
        "recall corpus: {} sentences\nprecision corpus: {} sentences\n",
        recall.len(),
        precision.len()
    )))
}

fn commenter(item: &LabeledComment) -> Speaker {
    let full_name = item.speaker_name.clone().unwrap_or_default();
    Speaker {
        id: String::new(),
        last_name: full_name
            .split_whitespace()
            .last()
            .unwrap_or("")
            .to_string(),
        full_name,
        role: Role::PublicCommenter,
    }
}

fn evaluate(config: &RunConfig) -> Result<RunReport> {
    let path = require(&config.labeled, "labeled", "evaluate")?;
    let corpus = parse_labeled_corpus(open(path)?).map_err(|e| in_file(path, e))?;
    let registry = load_registry(config, "evaluate")?;
    let affiliation = config.affiliation_config()?;
    let extractor = AffiliationExtractor::new(&registry, &affiliation);
    info!("evaluating on {} labeled comments", corpus.len());

    let variants = [
        ("recall", ExtractorVariant::Recall),
        ("precision", ExtractorVariant::Precision),
        ("combined", ExtractorVariant::Combined),
    ];
    let evaluations: Vec<_> = variants
        .iter()
        .map(|(name, variant)| {
            let eval = evaluate_extractor(&corpus, |item| {
                extractor.extract_names(*variant, &item.comment, &commenter(item))
            });
            (name.to_string(), eval)
        })
        .collect();

    let mut report = Report::new(config);
    let rows: Vec<_> = evaluations.iter().map(|(n, e)| (n.clone(), e)).collect();
    report.write("metrics.csv", |sink| write_metrics_csv(&rows, sink))?;
    let combined = &evaluations[2].1;
    report.write("unresolved.csv", |sink| {
        write_unresolved_csv(&combined.outcome.unresolved, sink)
    })?;
    let summary: String = evaluations
        .iter()
        .map(|(n, e)| {
            format!(
                "{n}: TP {} FN {} FP {} F1 {:.4}\n",
                e.outcome.true_positives,
                e.outcome.false_negatives,
                e.outcome.false_positives,
                e.f1.value
            )
        })
        .collect();
    Ok(report.finish(summary))
}
