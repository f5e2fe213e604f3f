//! Public-commenter stance: phrase-category counts and the classifiers
//! that map them to Support / Oppose / Neutral.

mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use tree::{train_tree, DecisionTree, Node, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    StrongOpposition = 0,
    StrongSupport = 1,
    MediumOpposition = 2,
    MediumSupport = 3,
    WeakSupport = 4,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::StrongOpposition,
        Category::StrongSupport,
        Category::MediumOpposition,
        Category::MediumSupport,
        Category::WeakSupport,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::StrongOpposition => "strong_opposition",
            Category::StrongSupport => "strong_support",
            Category::MediumOpposition => "medium_opposition",
            Category::MediumSupport => "medium_support",
            Category::WeakSupport => "weak_support",
        }
    }

    pub fn phrases(self) -> &'static [&'static str] {
        match self {
            Category::StrongOpposition => &["oppose", "opposition", "opposing", "opposed"],
            Category::StrongSupport => &["support", "supporting"],
            Category::MediumOpposition => &["no vote", "nay vote"],
            Category::MediumSupport => &["aye vote", "yes vote"],
            Category::WeakSupport => &["cosponsor"],
        }
    }
}

/// Every stance phrase as (lowercase words, category), longest first.
fn phrase_table() -> &'static [(Vec<&'static str>, Category)] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<Vec<(Vec<&'static str>, Category)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table: Vec<_> = Category::ALL
            .iter()
            .flat_map(|&c| {
                c.phrases()
                    .iter()
                    .map(move |p| (p.split(' ').collect::<Vec<_>>(), c))
            })
            .collect();
        table.sort_by_key(|entry| std::cmp::Reverse(entry.0.len()));
        table
    })
}

/// Lowercase alphanumeric words; any other character is a boundary.
pub fn stance_words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Longest stance phrase starting at `words[at]`, with its length in words.
pub fn phrase_at<S: AsRef<str>>(words: &[S], at: usize) -> Option<(Category, usize)> {
    phrase_table().iter().find_map(|(phrase, category)| {
        let end = at + phrase.len();
        (end <= words.len()
            && phrase
                .iter()
                .zip(&words[at..end])
                .all(|(p, w)| *p == w.as_ref()))
        .then_some((*category, phrase.len()))
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhraseCountVector {
    pub strong_opposition: u32,
    pub strong_support: u32,
    pub medium_opposition: u32,
    pub medium_support: u32,
    pub weak_support: u32,
}

impl PhraseCountVector {
    pub const DIMENSIONS: usize = 5;

    pub fn from_array(counts: [u32; 5]) -> Self {
        let [strong_opposition, strong_support, medium_opposition, medium_support, weak_support] =
            counts;
        PhraseCountVector {
            strong_opposition,
            strong_support,
            medium_opposition,
            medium_support,
            weak_support,
        }
    }

    pub fn to_array(self) -> [u32; 5] {
        [
            self.strong_opposition,
            self.strong_support,
            self.medium_opposition,
            self.medium_support,
            self.weak_support,
        ]
    }

    pub fn get(&self, feature: usize) -> u32 {
        self.to_array()[feature]
    }

    pub fn total(&self) -> u32 {
        self.to_array().iter().sum()
    }

    fn bump(&mut self, category: Category) {
        match category {
            Category::StrongOpposition => self.strong_opposition += 1,
            Category::StrongSupport => self.strong_support += 1,
            Category::MediumOpposition => self.medium_opposition += 1,
            Category::MediumSupport => self.medium_support += 1,
            Category::WeakSupport => self.weak_support += 1,
        }
    }
}

/// Case-insensitive, word-anchored phrase counts. Each word belongs to at
/// most one phrase; the longest phrase starting at a word wins.
pub fn count_phrases(comment: &str) -> PhraseCountVector {
    let words = stance_words(comment);
    let mut counts = PhraseCountVector::default();
    let mut i = 0;
    while i < words.len() {
        match phrase_at(&words, i) {
            Some((category, len)) => {
                counts.bump(category);
                i += len;
            }
            None => i += 1,
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StanceLabel {
    Support,
    Oppose,
    Neutral,
}

impl StanceLabel {
    pub const ALL: [StanceLabel; 3] = [
        StanceLabel::Support,
        StanceLabel::Oppose,
        StanceLabel::Neutral,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StanceLabel::Support => "support",
            StanceLabel::Oppose => "oppose",
            StanceLabel::Neutral => "neutral",
        }
    }
}

impl fmt::Display for StanceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StanceLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "support" => Ok(StanceLabel::Support),
            "oppose" => Ok(StanceLabel::Oppose),
            "neutral" => Ok(StanceLabel::Neutral),
            other => Err(Error::InvalidArgument(format!(
                "unknown stance label `{other}`"
            ))),
        }
    }
}

/// Baseline used when no trained tree is supplied: whichever side carries
/// more phrase mass wins, ties are Neutral.
pub fn rule_fallback(vector: PhraseCountVector) -> StanceLabel {
    let opposition = vector.strong_opposition + vector.medium_opposition;
    let support = vector.strong_support + vector.medium_support + vector.weak_support;
    match opposition.cmp(&support) {
        std::cmp::Ordering::Greater => StanceLabel::Oppose,
        std::cmp::Ordering::Less => StanceLabel::Support,
        std::cmp::Ordering::Equal => StanceLabel::Neutral,
    }
}

/// One labeled comment per line: `comment<TAB>label`.
pub fn parse_labeled_samples(text: &str) -> Result<Vec<(String, StanceLabel)>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let (comment, label) = line
                .rsplit_once('\t')
                .ok_or_else(|| Error::parse(i + 1, "expected `comment<TAB>label`"))?;
            let label = label
                .parse()
                .map_err(|e: Error| Error::parse(i + 1, e.to_string()))?;
            Ok((comment.to_string(), label))
        })
        .collect()
}

/// Per-class confusion counts and their macro-averaged F1.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StanceMetrics {
    /// (true positives, false negatives, false positives), in
    /// `StanceLabel::ALL` order.
    pub per_class: [(u64, u64, u64); 3],
    pub macro_f1: f64,
    pub accuracy: f64,
}

impl StanceMetrics {
    /// `pairs` are (truth, prediction). Classes absent from both sides are
    /// left out of the macro average.
    pub fn from_pairs(pairs: &[(StanceLabel, StanceLabel)]) -> Self {
        let mut per_class = [(0u64, 0u64, 0u64); 3];
        let mut correct = 0u64;
        for &(truth, predicted) in pairs {
            if truth == predicted {
                per_class[truth.index()].0 += 1;
                correct += 1;
            } else {
                per_class[truth.index()].1 += 1;
                per_class[predicted.index()].2 += 1;
            }
        }
        let scores: Vec<f64> = per_class
            .iter()
            .filter(|(tp, fn_, fp)| tp + fn_ + fp > 0)
            .map(|&(tp, fn_, fp)| crate::evaluation::f1(tp, fn_, fp).value)
            .collect();
        let macro_f1 = if scores.is_empty() {
            0.0
        } else {
            scores.iter().sum::<f64>() / scores.len() as f64
        };
        let accuracy = if pairs.is_empty() {
            0.0
        } else {
            correct as f64 / pairs.len() as f64
        };
        StanceMetrics {
            per_class,
            macro_f1,
            accuracy,
        }
    }
}
