//! Session-level aggregation: hearing filters, organization rankings and
//! legislator engagement rankings.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::engagement::{detect_roll_call, EngagementBreakdown};
use crate::error::Result;
use crate::gazetteer::normalize_org_name;
use crate::stance::count_phrases;
use crate::transcript::{Hearing, Phase, Role, Utterance};

pub const MIN_SPEAKING_LEGISLATORS: usize = 3;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterStats {
    pub input: usize,
    pub removed_no_votes: usize,
    pub removed_no_public_comment: usize,
    pub removed_few_speakers: usize,
    pub removed_floor_session: usize,
    pub kept: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SessionReport {
    pub org_rankings: Vec<(String, usize)>,
    pub engagement_rankings: Vec<(String, EngagementBreakdown)>,
    pub affiliation_filter: FilterStats,
    pub engagement_filter: FilterStats,
}

pub fn has_vote_evidence(hearing: &Hearing) -> bool {
    hearing.vote_recorded || detect_roll_call(hearing).is_some()
}

/// Tagged utterances follow their tag. Untagged ones count only when the
/// speaker is a registered public commenter, or a non-member witness-type
/// speaker who states a position.
pub fn is_public_comment(hearing: &Hearing, utterance: &Utterance) -> bool {
    match utterance.phase {
        Some(phase) => phase == Phase::PublicComment,
        None => match hearing.speaker_of(utterance).map(|s| s.role) {
            Some(Role::PublicCommenter) => true,
            Some(Role::Witness | Role::Other) => count_phrases(&utterance.text).total() > 0,
            _ => false,
        },
    }
}

pub fn public_comments(hearing: &Hearing) -> impl Iterator<Item = &Utterance> {
    hearing
        .utterances
        .iter()
        .filter(move |u| is_public_comment(hearing, u))
}

fn speaking_legislators(hearing: &Hearing) -> usize {
    hearing
        .utterances
        .iter()
        .filter(|u| hearing.committee_roster.contains(&u.speaker))
        .map(|u| u.speaker.as_str())
        .collect::<HashSet<_>>()
        .len()
}

/// Hearings with a vote, then with at least one public comment.
pub fn filter_for_affiliation(hearings: &[Hearing]) -> (Vec<&Hearing>, FilterStats) {
    let mut stats = FilterStats {
        input: hearings.len(),
        ..Default::default()
    };
    let mut kept = Vec::new();
    for h in hearings {
        if !has_vote_evidence(h) {
            stats.removed_no_votes += 1;
        } else if public_comments(h).next().is_none() {
            stats.removed_no_public_comment += 1;
        } else {
            kept.push(h);
        }
    }
    stats.kept = kept.len();
    (kept, stats)
}

/// Hearings with a vote, at least three speaking members, and not a floor
/// session.
pub fn filter_for_engagement(hearings: &[Hearing]) -> (Vec<&Hearing>, FilterStats) {
    let mut stats = FilterStats {
        input: hearings.len(),
        ..Default::default()
    };
    let mut kept = Vec::new();
    for h in hearings {
        if !has_vote_evidence(h) {
            stats.removed_no_votes += 1;
        } else if speaking_legislators(h) < MIN_SPEAKING_LEGISLATORS {
            stats.removed_few_speakers += 1;
        } else if h.is_floor_session {
            stats.removed_floor_session += 1;
        } else {
            kept.push(h);
        }
    }
    stats.kept = kept.len();
    (kept, stats)
}

/// Number of hearings each organization appears in. Names are compared
/// normalized and shown with their first spelling; `exclusions` are
/// dropped before ranking.
pub fn org_frequency<S: AsRef<str>>(
    per_hearing: &[Vec<S>],
    exclusions: &HashSet<String>,
) -> Vec<(String, usize)> {
    let mut display: HashMap<String, String> = HashMap::new();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for orgs in per_hearing {
        let mut in_hearing = HashSet::new();
        for org in orgs {
            let norm = normalize_org_name(org.as_ref());
            if norm.is_empty() || exclusions.contains(&norm) {
                continue;
            }
            display
                .entry(norm.clone())
                .or_insert_with(|| org.as_ref().to_string());
            if in_hearing.insert(norm.clone()) {
                *counts.entry(norm).or_default() += 1;
            }
        }
    }
    let mut ranked: Vec<(String, usize)> = counts
        .into_iter()
        .map(|(norm, n)| (display.remove(&norm).unwrap_or(norm), n))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked
}

/// Normalized exclusion names.
pub fn exclusion_set<S: AsRef<str>>(names: &[S]) -> HashSet<String> {
    names
        .iter()
        .map(|n| normalize_org_name(n.as_ref()))
        .filter(|n| !n.is_empty())
        .collect()
}

pub fn rank_legislators(
    mut breakdowns: Vec<(String, EngagementBreakdown)>,
) -> Vec<(String, EngagementBreakdown)> {
    breakdowns.sort_by(|a, b| b.1.total.total_cmp(&a.1.total).then_with(|| a.0.cmp(&b.0)));
    breakdowns
}

pub fn write_org_rankings_csv<W: Write>(rankings: &[(String, usize)], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["rank", "organization", "hearings"])?;
    for (i, (name, n)) in rankings.iter().enumerate() {
        w.write_record([(i + 1).to_string(), name.clone(), n.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_filter_stats_csv<W: Write>(rows: &[(&str, FilterStats)], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record([
        "filter",
        "input",
        "removed_no_votes",
        "removed_no_public_comment",
        "removed_few_speakers",
        "removed_floor_session",
        "kept",
    ])?;
    for (name, s) in rows {
        w.write_record([
            name.to_string(),
            s.input.to_string(),
            s.removed_no_votes.to_string(),
            s.removed_no_public_comment.to_string(),
            s.removed_few_speakers.to_string(),
            s.removed_floor_session.to_string(),
            s.kept.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Fixed-width text table with the engagement columns.
pub fn format_engagement_table(rankings: &[(String, EngagementBreakdown)]) -> String {
    let name_width = rankings
        .iter()
        .map(|(n, _)| n.chars().count())
        .max()
        .unwrap_or(0)
        .max("Legislator".len());
    let mut out = format!(
        "{:>4}  {:<name_width$}  {:>10}  {:>8}  {:>8}  {:>14}  {:>8}\n",
        "Rank", "Legislator", "Engagement", "Voting", "Speaking", "Back and Forth", "Question"
    );
    for (i, (name, b)) in rankings.iter().enumerate() {
        out.push_str(&format!(
            "{:>4}  {:<name_width$}  {:>10.3}  {:>8.3}  {:>8.3}  {:>14.3}  {:>8.3}\n",
            i + 1,
            name,
            b.total,
            b.vote_score,
            b.speaking_score,
            b.back_and_forth_score,
            b.question_score
        ));
    }
    out
}

pub fn format_org_table(rankings: &[(String, usize)]) -> String {
    let width = rankings
        .iter()
        .map(|(n, _)| n.chars().count())
        .max()
        .unwrap_or(0)
        .max("Organization".len());
    let mut out = format!(
        "{:>4}  {:<width$}  {:>8}\n",
        "Rank", "Organization", "Hearings"
    );
    for (i, (name, n)) in rankings.iter().enumerate() {
        out.push_str(&format!("{:>4}  {:<width$}  {:>8}\n", i + 1, name, n));
    }
    out
}
