//! Hearing data model, the line-delimited JSON hearing format, and the
//! tokenization rules every other module counts words with.
//!
//! A hearing file holds one JSON object per line. Each hearing carries its
//! own speaker directory; utterances and the committee roster refer to
//! speakers by id. See `docs/hearing-format.md` for the full schema.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Legislator,
    Chair,
    CommitteeSecretary,
    PublicCommenter,
    Witness,
    BillPresenter,
    Other,
}

impl Role {
    /// Chairs sit on the committee, so they count as legislators for
    /// engagement and attendance.
    pub fn is_legislator(self) -> bool {
        matches!(self, Role::Legislator | Role::Chair)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Discussion,
    PublicComment,
    RollCall,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Speaker {
    pub id: String,
    pub full_name: String,
    pub last_name: String,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    pub index: usize,
    /// Id of an entry in the hearing's speaker directory.
    pub speaker: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_seconds: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_seconds: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<Phase>,
}

impl Utterance {
    pub fn duration_seconds(&self) -> Option<f64> {
        match (self.start_seconds, self.end_seconds) {
            (Some(start), Some(end)) => Some(end - start),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hearing {
    pub id: String,
    pub speakers: Vec<Speaker>,
    pub committee_roster: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bill_id: Option<String>,
    #[serde(default)]
    pub is_floor_session: bool,
    #[serde(default)]
    pub vote_recorded: bool,
    pub utterances: Vec<Utterance>,
}

impl Hearing {
    pub fn speaker(&self, id: &str) -> Option<&Speaker> {
        self.speakers.iter().find(|s| s.id == id)
    }

    /// Speaker of an utterance. Parsed hearings always resolve.
    pub fn speaker_of(&self, utterance: &Utterance) -> Option<&Speaker> {
        self.speaker(&utterance.speaker)
    }

    pub fn is_legislator_turn(&self, utterance: &Utterance) -> bool {
        self.speaker_of(utterance)
            .is_some_and(|s| s.role.is_legislator())
    }

    /// Roster members in id order.
    pub fn roster(&self) -> impl Iterator<Item = &Speaker> {
        self.committee_roster
            .iter()
            .filter_map(move |id| self.speaker(id))
    }

    /// Checks every structural invariant of a single hearing. `line` is
    /// only used to label errors.
    pub fn validate(&self, line: usize) -> Result<()> {
        let invalid = |field: &str, message: String| Error::Invalid {
            line,
            hearing: self.id.clone(),
            field: field.to_string(),
            message,
        };

        if self.id.trim().is_empty() {
            return Err(invalid("id", "empty hearing id".into()));
        }

        let mut seen = HashSet::new();
        for speaker in &self.speakers {
            if speaker.id.is_empty() {
                return Err(invalid("speakers.id", "empty speaker id".into()));
            }
            if !seen.insert(speaker.id.as_str()) {
                return Err(invalid(
                    "speakers.id",
                    format!("duplicate speaker id `{}`", speaker.id),
                ));
            }
            if speaker.role == Role::Legislator && speaker.last_name.trim().is_empty() {
                return Err(invalid(
                    "speakers.last_name",
                    format!("legislator `{}` has an empty last name", speaker.id),
                ));
            }
        }

        for id in &self.committee_roster {
            match self.speaker(id) {
                None => {
                    return Err(invalid(
                        "committee_roster",
                        format!("unknown speaker `{id}`"),
                    ))
                }
                Some(s) if !s.role.is_legislator() => {
                    return Err(invalid(
                        "committee_roster",
                        format!("`{id}` is not a legislator"),
                    ))
                }
                Some(_) => {}
            }
        }

        for (expected, utterance) in self.utterances.iter().enumerate() {
            if utterance.index != expected {
                return Err(invalid(
                    "utterances.index",
                    format!(
                        "gapless ordering violated: expected index {expected}, found {}",
                        utterance.index
                    ),
                ));
            }
            if self.speaker(&utterance.speaker).is_none() {
                return Err(invalid(
                    "utterances.speaker",
                    format!(
                        "utterance {} refers to unknown speaker `{}`",
                        utterance.index, utterance.speaker
                    ),
                ));
            }
            for (field, value) in [
                ("utterances.start_seconds", utterance.start_seconds),
                ("utterances.end_seconds", utterance.end_seconds),
            ] {
                if let Some(v) = value {
                    if !v.is_finite() || v < 0.0 {
                        return Err(invalid(
                            field,
                            format!(
                                "utterance {}: {v} is not a non-negative time",
                                utterance.index
                            ),
                        ));
                    }
                }
            }
            if let (Some(start), Some(end)) = (utterance.start_seconds, utterance.end_seconds) {
                if end < start {
                    return Err(invalid(
                        "utterances.end_seconds",
                        format!(
                            "utterance {}: end {end} precedes start {start}",
                            utterance.index
                        ),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Reads a hearing file. Blank lines are skipped; hearing order is kept.
pub fn parse_hearing_file<R: BufRead>(source: R) -> Result<Vec<Hearing>> {
    let mut hearings = Vec::new();
    let mut hearing_ids = HashSet::new();
    // speaker ids are corpus-wide: the same id must describe the same person
    let mut directory: HashMap<String, Speaker> = HashMap::new();

    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::parse(line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let hearing: Hearing =
            serde_json::from_str(&line).map_err(|e| Error::parse(line_no, e.to_string()))?;
        hearing.validate(line_no)?;

        for speaker in &hearing.speakers {
            match directory.get(&speaker.id) {
                Some(known) if known != speaker => {
                    return Err(Error::Invalid {
                        line: line_no,
                        hearing: hearing.id.clone(),
                        field: "speakers".into(),
                        message: format!(
                            "speaker `{}` conflicts with an earlier definition",
                            speaker.id
                        ),
                    })
                }
                Some(_) => {}
                None => {
                    directory.insert(speaker.id.clone(), speaker.clone());
                }
            }
        }

        if !hearing_ids.insert(hearing.id.clone()) {
            return Err(Error::DuplicateHearing(hearing.id));
        }
        hearings.push(hearing);
    }
    Ok(hearings)
}

pub fn write_hearing_file<W: Write>(hearings: &[Hearing], mut sink: W) -> Result<()> {
    for hearing in hearings {
        let line = serde_json::to_string(hearing)
            .map_err(|e| Error::Invariant(format!("hearing serialization: {e}")))?;
        writeln!(sink, "{line}")?;
    }
    Ok(())
}

/// Whitespace tokens of `text`, in order. Token offsets used throughout the
/// crate index into this sequence.
pub fn tokens(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

/// A token made only of punctuation (no letter or digit).
pub fn is_punctuation_token(token: &str) -> bool {
    !token.chars().any(char::is_alphanumeric)
}

pub fn word_count(text: &str) -> usize {
    text.split_whitespace()
        .filter(|t| !is_punctuation_token(t))
        .count()
}

/// Half-open range of token offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TokenSpan {
    pub start: usize,
    pub end: usize,
}

impl TokenSpan {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        TokenSpan { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, offset: usize) -> bool {
        self.start <= offset && offset < self.end
    }

    pub fn overlaps(&self, other: &TokenSpan) -> bool {
        self.start < other.end && other.start < self.end
    }
}
