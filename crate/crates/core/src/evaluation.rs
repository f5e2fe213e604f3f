//! Scoring extracted organization lists against annotated truth.
//!
//! Names are compared after normalization. Extracted names that do not
//! match exactly are broken into fragments (at commas and at the word
//! "and", with a leading "the" dropped) and matched again. Whatever is left
//! is reported for manual review.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gazetteer::normalize_org_name;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unresolved {
    pub extracted: Option<String>,
    pub nearest_truth: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchOutcome {
    pub true_positives: u64,
    pub false_negatives: u64,
    pub false_positives: u64,
    pub unresolved: Vec<Unresolved>,
}

impl MatchOutcome {
    pub fn merge(mut self, other: MatchOutcome) -> MatchOutcome {
        self.true_positives += other.true_positives;
        self.false_negatives += other.false_negatives;
        self.false_positives += other.false_positives;
        self.unresolved.extend(other.unresolved);
        self
    }

    pub fn f1(&self) -> F1Score {
        f1(
            self.true_positives,
            self.false_negatives,
            self.false_positives,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F1Score {
    pub value: f64,
    /// No positives, negatives or false alarms at all; `value` is 0.
    pub degenerate: bool,
}

pub fn f1(tp: u64, fn_: u64, fp: u64) -> F1Score {
    let denominator = 2 * tp + fn_ + fp;
    if denominator == 0 {
        return F1Score {
            value: 0.0,
            degenerate: true,
        };
    }
    F1Score {
        value: (2 * tp) as f64 / denominator as f64,
        degenerate: false,
    }
}

/// Fallback fragments of an extracted name, normalized.
fn fragments(name: &str) -> Vec<String> {
    name.split(',')
        .flat_map(|piece| {
            let normalized = normalize_org_name(piece);
            normalized
                .split(' ')
                .collect::<Vec<_>>()
                .split(|w| *w == "and")
                .map(|words| {
                    let words = match words.first() {
                        Some(&"the") => &words[1..],
                        _ => words,
                    };
                    words.join(" ")
                })
                .collect::<Vec<_>>()
        })
        .filter(|f| !f.is_empty())
        .collect()
}

fn similarity(a: &str, b: &str) -> f64 {
    let a: BTreeSet<&str> = a.split(' ').collect();
    let b: BTreeSet<&str> = b.split(' ').collect();
    let union = a.union(&b).count();
    if union == 0 {
        0.0
    } else {
        a.intersection(&b).count() as f64 / union as f64
    }
}

/// Greedy matching: each extracted name takes the first unmatched truth
/// with the same normalized form, in truth order.
pub fn reconcile<S: AsRef<str>, T: AsRef<str>>(extracted: &[S], truth: &[T]) -> MatchOutcome {
    let truth_norm: Vec<String> = truth
        .iter()
        .map(|t| normalize_org_name(t.as_ref()))
        .collect();
    let mut truth_used = vec![false; truth.len()];
    let take = |candidate: &str, used: &mut Vec<bool>| -> bool {
        match (0..truth_norm.len()).find(|&k| !used[k] && truth_norm[k] == candidate) {
            Some(k) => {
                used[k] = true;
                true
            }
            None => false,
        }
    };

    let mut tp = 0;
    let mut leftovers = Vec::new();
    for name in extracted {
        let name = name.as_ref();
        if take(&normalize_org_name(name), &mut truth_used) {
            tp += 1;
        } else {
            leftovers.push(name);
        }
    }

    let mut unmatched_fragments = Vec::new();
    for name in leftovers {
        for fragment in fragments(name) {
            if take(&fragment, &mut truth_used) {
                tp += 1;
            } else {
                unmatched_fragments.push(fragment);
            }
        }
    }

    let missing: Vec<usize> = (0..truth.len()).filter(|&k| !truth_used[k]).collect();
    let nearest = |fragment: &str| -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        for &k in &missing {
            let s = similarity(fragment, &truth_norm[k]);
            if s > 0.0 && best.is_none_or(|(b, _)| s > b) {
                best = Some((s, k));
            }
        }
        best.map(|(_, k)| k)
    };

    let mut unresolved = Vec::new();
    let mut paired = vec![false; truth.len()];
    for fragment in &unmatched_fragments {
        let near = nearest(fragment);
        if let Some(k) = near {
            paired[k] = true;
        }
        unresolved.push(Unresolved {
            extracted: Some(fragment.clone()),
            nearest_truth: near.map(|k| truth[k].as_ref().to_string()),
        });
    }
    for &k in &missing {
        if !paired[k] {
            unresolved.push(Unresolved {
                extracted: None,
                nearest_truth: Some(truth[k].as_ref().to_string()),
            });
        }
    }

    MatchOutcome {
        true_positives: tp,
        false_negatives: missing.len() as u64,
        false_positives: unmatched_fragments.len() as u64,
        unresolved,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledComment {
    pub comment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speaker_name: Option<String>,
    pub truth: Vec<String>,
}

pub fn parse_labeled_corpus<R: BufRead>(source: R) -> Result<Vec<LabeledComment>> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line.map_err(|e| Error::parse(i + 1, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::parse(i + 1, e.to_string()))?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub outcome: MatchOutcome,
    pub f1: F1Score,
}

pub fn evaluate_extractor<F>(corpus: &[LabeledComment], extractor: F) -> Evaluation
where
    F: Fn(&LabeledComment) -> Vec<String> + Sync,
{
    let outcomes: Vec<MatchOutcome> = corpus
        .par_iter()
        .map(|item| reconcile(&extractor(item), &item.truth))
        .collect();
    let outcome = outcomes
        .into_iter()
        .fold(MatchOutcome::default(), MatchOutcome::merge);
    let f1 = outcome.f1();
    Evaluation { outcome, f1 }
}

pub fn write_metrics_csv<W: Write>(rows: &[(String, &Evaluation)], sink: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record([
        "extractor",
        "true_positives",
        "false_negatives",
        "false_positives",
        "f1",
    ])?;
    for (name, eval) in rows {
        let o = &eval.outcome;
        writer.write_record([
            name.clone(),
            o.true_positives.to_string(),
            o.false_negatives.to_string(),
            o.false_positives.to_string(),
            format!("{:.4}", eval.f1.value),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_unresolved_csv<W: Write>(items: &[Unresolved], sink: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(["extracted", "nearest_truth"])?;
    for u in items {
        writer.write_record([
            u.extracted.as_deref().unwrap_or(""),
            u.nearest_truth.as_deref().unwrap_or(""),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
