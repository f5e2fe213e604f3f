//! Legislator engagement: verbal votes, speaking instances, back-and-forth
//! exchanges with non-legislators, and questions, combined into a weighted
//! score.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gazetteer::normalize_org_name;
use crate::transcript::{word_count, Hearing, Phase, Role, Utterance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngagementWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl Default for EngagementWeights {
    fn default() -> Self {
        EngagementWeights {
            alpha: 0.5,
            beta: 0.0005,
            gamma: 0.00005,
            delta: 0.01,
        }
    }
}

impl EngagementWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in self.named() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "weight {name} must be a non-negative number, got {value}"
                )));
            }
        }
        Ok(())
    }

    fn named(&self) -> [(&'static str, f64); 4] {
        [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("delta", self.delta),
        ]
    }

    /// Parses `key=value` lines; missing keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut weights = EngagementWeights::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, "expected key=value"))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::parse(i + 1, format!("`{}` is not a number", value.trim())))?;
            match key.trim() {
                "alpha" => weights.alpha = value,
                "beta" => weights.beta = value,
                "gamma" => weights.gamma = value,
                "delta" => weights.delta = value,
                other => return Err(Error::parse(i + 1, format!("unknown weight `{other}`"))),
            }
        }
        weights.validate()?;
        Ok(weights)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        EngagementWeights::parse(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExchangeWords {
    /// Every utterance in the chain, legislator and interlocutor alike.
    WholeExchange,
    LegislatorOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngagementParams {
    /// Utterances of this many words or fewer are not speaking instances.
    pub speaking_min_words: usize,
    pub block_seconds: f64,
    /// Word-rate stand-in for one block when timing is missing.
    pub block_words: usize,
    /// Chains of this many words or fewer are dropped.
    pub back_and_forth_min_words: usize,
    pub exchange_words: ExchangeWords,
}

impl Default for EngagementParams {
    fn default() -> Self {
        EngagementParams {
            speaking_min_words: 6,
            block_seconds: 30.0,
            block_words: 75,
            back_and_forth_min_words: 12,
            exchange_words: ExchangeWords::WholeExchange,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngagementCounters {
    pub number_votes: u64,
    pub num_hearings_on_committee: u64,
    pub num_times_speaking: u64,
    pub num_words_in_back_and_forth: u64,
    pub num_questions: u64,
}

impl EngagementCounters {
    pub fn merge(self, other: EngagementCounters) -> EngagementCounters {
        EngagementCounters {
            number_votes: self.number_votes + other.number_votes,
            num_hearings_on_committee: self.num_hearings_on_committee
                + other.num_hearings_on_committee,
            num_times_speaking: self.num_times_speaking + other.num_times_speaking,
            num_words_in_back_and_forth: self.num_words_in_back_and_forth
                + other.num_words_in_back_and_forth,
            num_questions: self.num_questions + other.num_questions,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EngagementBreakdown {
    pub vote_score: f64,
    pub speaking_score: f64,
    pub back_and_forth_score: f64,
    pub question_score: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackAndForth {
    pub legislator: String,
    /// Utterance indices of the chain, alternating legislator / other.
    pub utterances: Vec<usize>,
    pub total_words: usize,
    pub legislator_words: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RollCall {
    pub hearing_id: String,
    /// Half-open utterance index range.
    pub start: usize,
    pub end: usize,
    pub votes: BTreeSet<String>,
}

pub fn speaking_instances(utterance: &Utterance, params: &EngagementParams) -> u64 {
    let words = word_count(&utterance.text);
    if words <= params.speaking_min_words {
        return 0;
    }
    match utterance.duration_seconds() {
        // a qualifying utterance is at least one block, even if very short
        Some(seconds) => ((seconds / params.block_seconds).ceil() as u64).max(1),
        None => words.div_ceil(params.block_words) as u64,
    }
}

/// Maximal chains L, N, L (, N, L)* where L is one legislator and each N a
/// single non-legislator utterance, keeping those above the word floor.
pub fn detect_back_and_forths(hearing: &Hearing, params: &EngagementParams) -> Vec<BackAndForth> {
    let utts = &hearing.utterances;
    let is_leg: Vec<bool> = utts.iter().map(|u| hearing.is_legislator_turn(u)).collect();
    let mut chains = Vec::new();
    let mut i = 0;
    while i < utts.len() {
        if !is_leg[i] {
            i += 1;
            continue;
        }
        let legislator = &utts[i].speaker;
        let mut j = i;
        while j + 2 < utts.len()
            && !is_leg[j + 1]
            && is_leg[j + 2]
            && utts[j + 2].speaker == *legislator
        {
            j += 2;
        }
        if j == i {
            i += 1;
            continue;
        }
        let indices: Vec<usize> = (i..=j).collect();
        let total_words = indices.iter().map(|&k| word_count(&utts[k].text)).sum();
        let legislator_words = indices
            .iter()
            .step_by(2)
            .map(|&k| word_count(&utts[k].text))
            .sum();
        if total_words > params.back_and_forth_min_words {
            chains.push(BackAndForth {
                legislator: legislator.clone(),
                utterances: indices,
                total_words,
                legislator_words,
            });
        }
        i = j + 1;
    }
    chains
}

pub fn count_questions<'a>(utterances: impl IntoIterator<Item = &'a Utterance>) -> u64 {
    utterances
        .into_iter()
        .map(|u| u.text.chars().filter(|&c| c == '?').count() as u64)
        .sum()
}

/// Occurrences of a (possibly multi-word) last name among normalized words.
fn name_mentions(words: &[String], last_name: &[String]) -> usize {
    if last_name.is_empty() || words.len() < last_name.len() {
        return 0;
    }
    words
        .windows(last_name.len())
        .filter(|w| *w == last_name)
        .count()
}

fn normalized_words(text: &str) -> Vec<String> {
    normalize_org_name(text)
        .split(' ')
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect()
}

/// Locates the secretary's roll call and the members who answered it.
pub fn detect_roll_call(hearing: &Hearing) -> Option<RollCall> {
    let roster: Vec<(&str, Vec<String>)> = hearing
        .roster()
        .map(|s| (s.id.as_str(), normalized_words(&s.last_name)))
        .filter(|(_, name)| !name.is_empty())
        .collect();

    // per utterance: roster ids the secretary mentions, with counts
    let mut mentions: Vec<BTreeMap<&str, usize>> = vec![BTreeMap::new(); hearing.utterances.len()];
    let mut anchors = Vec::new();
    let mut named = BTreeSet::new();
    let mut tagged = false;
    for (k, utt) in hearing.utterances.iter().enumerate() {
        let is_secretary = hearing
            .speaker_of(utt)
            .is_some_and(|s| s.role == Role::CommitteeSecretary);
        if is_secretary {
            let words = normalized_words(&utt.text);
            for (id, name) in &roster {
                let n = name_mentions(&words, name);
                if n > 0 {
                    mentions[k].insert(id, n);
                    named.insert(*id);
                }
            }
        }
        let is_tagged = utt.phase == Some(Phase::RollCall);
        tagged |= is_tagged;
        if is_tagged || !mentions[k].is_empty() {
            anchors.push(k);
        }
    }
    if anchors.is_empty() || (!tagged && named.len() < 2) {
        return None;
    }
    let start = anchors[0];
    let end = anchors[anchors.len() - 1] + 1;

    let mut votes = BTreeSet::new();
    for (id, _) in &roster {
        let mut total = 0;
        let mut first_mention = None;
        for (k, m) in mentions.iter().enumerate().take(end).skip(start) {
            if let Some(n) = m.get(id) {
                total += n;
                first_mention.get_or_insert(k);
            }
        }
        let answered = first_mention.is_some_and(|first| {
            hearing.utterances[first + 1..end]
                .iter()
                .any(|u| u.speaker == *id)
        });
        if total >= 2 || answered {
            votes.insert(id.to_string());
        }
    }

    Some(RollCall {
        hearing_id: hearing.id.clone(),
        start,
        end,
        votes,
    })
}

/// Counters for every roster member of one hearing.
pub fn hearing_counters(
    hearing: &Hearing,
    params: &EngagementParams,
) -> BTreeMap<String, EngagementCounters> {
    let roll_call = detect_roll_call(hearing);
    let chains = detect_back_and_forths(hearing, params);
    hearing
        .committee_roster
        .iter()
        .map(|id| {
            let own: Vec<&Utterance> = hearing
                .utterances
                .iter()
                .filter(|u| u.speaker == *id)
                .collect();
            let exchange_words: usize = chains
                .iter()
                .filter(|c| c.legislator == *id)
                .map(|c| match params.exchange_words {
                    ExchangeWords::WholeExchange => c.total_words,
                    ExchangeWords::LegislatorOnly => c.legislator_words,
                })
                .sum();
            let counters = EngagementCounters {
                number_votes: u64::from(roll_call.as_ref().is_some_and(|r| r.votes.contains(id))),
                num_hearings_on_committee: 1,
                num_times_speaking: own.iter().map(|u| speaking_instances(u, params)).sum(),
                num_words_in_back_and_forth: exchange_words as u64,
                num_questions: count_questions(own.iter().copied()),
            };
            (id.clone(), counters)
        })
        .collect()
}

/// Session counters for every legislator seen on any roster. Hearings are
/// analysed in parallel and merged in input order.
pub fn accumulate_all<H: Borrow<Hearing> + Sync>(
    hearings: &[H],
    params: &EngagementParams,
) -> BTreeMap<String, EngagementCounters> {
    let per_hearing: Vec<_> = hearings
        .par_iter()
        .map(|h| hearing_counters(h.borrow(), params))
        .collect();
    let mut totals: BTreeMap<String, EngagementCounters> = BTreeMap::new();
    for counters in per_hearing {
        for (id, c) in counters {
            let entry = totals.entry(id).or_default();
            *entry = entry.merge(c);
        }
    }
    totals
}

pub fn accumulate(
    hearings: &[Hearing],
    legislator: &str,
    params: &EngagementParams,
) -> Result<EngagementCounters> {
    let on_committee: Vec<&Hearing> = hearings
        .iter()
        .filter(|h| h.committee_roster.contains(legislator))
        .collect();
    if on_committee.is_empty() {
        return Err(Error::NoCommitteeHearings(legislator.to_string()));
    }
    Ok(on_committee
        .into_iter()
        .filter_map(|h| hearing_counters(h, params).remove(legislator))
        .fold(EngagementCounters::default(), EngagementCounters::merge))
}

pub fn compute_scores(
    counters: &EngagementCounters,
    weights: &EngagementWeights,
) -> Result<EngagementBreakdown> {
    if counters.num_hearings_on_committee == 0 {
        return Err(Error::InvalidArgument(
            "cannot score a legislator with zero committee hearings".into(),
        ));
    }
    if counters.number_votes > counters.num_hearings_on_committee {
        return Err(Error::Invariant(format!(
            "{} votes recorded over {} hearings",
            counters.number_votes, counters.num_hearings_on_committee
        )));
    }
    let vote_score =
        weights.alpha * counters.number_votes as f64 / counters.num_hearings_on_committee as f64;
    let speaking_score = weights.beta * counters.num_times_speaking as f64;
    let back_and_forth_score = weights.gamma * counters.num_words_in_back_and_forth as f64;
    let question_score = weights.delta * counters.num_questions as f64;
    Ok(EngagementBreakdown {
        vote_score,
        speaking_score,
        back_and_forth_score,
        question_score,
        total: vote_score + speaking_score + back_and_forth_score + question_score,
    })
}
