//! Affiliated-organization extraction for public comments.
//!
//! Two extractors with opposite error profiles run over each comment. The
//! recall extractor captures capitalized runs after affiliation cues plus
//! every registry hit anywhere in the comment. The precision extractor only
//! keeps registry hits inside the introduction window that directly follow
//! a cue. [`AffiliationExtractor::combine`] accepts names both agree on and
//! sends the rest through a rule cascade.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gazetteer::{
    block_reason, normalize_org_name, parse_name_list, read_name_list, registry_scan, BlockReason,
    OrgRegistry,
};
use crate::stance::phrase_at;
use crate::transcript::{is_punctuation_token, tokens, Speaker, TokenSpan};

pub const DEFAULT_WINDOW_WORDS: usize = 12;
pub const DEFAULT_CUE_DISTANCE: usize = 3;
const DEFAULT_CUES: &str = include_str!("../data/cue_phrases.txt");
const DEFAULT_STOP_VERBS: &str = include_str!("../data/stop_verbs.txt");

/// Lowercase words allowed between capitalized words of one name.
const CONNECTORS: &[&str] = &[
    "of", "for", "and", "the", "on", "in", "to", "de", "la", "del", "at",
];
const PRONOUNS: &[&str] = &[
    "i", "im", "ive", "id", "ill", "we", "were", "weve", "wed", "my", "our", "me", "us", "you",
];
const ABBREVIATIONS: &[&str] = &[
    "inc", "co", "corp", "ltd", "assn", "jr", "sr", "st", "dr", "no",
];

const TEMPLATE_SPEAKER: (&str, &str) = ("Alex Rivera", "Rivera");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateSource {
    Recall,
    Precision,
    RegistryScan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub surface: String,
    pub canonical: Option<String>,
    pub token_start: usize,
    pub token_end: usize,
    pub source: CandidateSource,
}

impl Candidate {
    pub fn name(&self) -> &str {
        self.canonical.as_deref().unwrap_or(&self.surface)
    }

    fn normalized(&self) -> String {
        normalize_org_name(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectionReason {
    OutsideWindow,
    SpeakerName,
    TemplateRetestFailed,
    Blocklisted,
    TooShort,
}

impl fmt::Display for RejectionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectionReason::OutsideWindow => "outside-window",
            RejectionReason::SpeakerName => "speaker-name",
            RejectionReason::TemplateRetestFailed => "template-retest-failed",
            RejectionReason::Blocklisted => "blocklisted",
            RejectionReason::TooShort => "too-short",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AffiliationResult {
    pub accepted: Vec<String>,
    pub rejected: Vec<(Candidate, RejectionReason)>,
}

#[derive(Debug, Clone)]
pub struct AffiliationConfig {
    /// Cue phrases as normalized word sequences.
    pub cue_phrases: Vec<Vec<String>>,
    pub stop_verbs: HashSet<String>,
    pub window_words: usize,
    pub cue_distance: usize,
}

impl Default for AffiliationConfig {
    fn default() -> Self {
        AffiliationConfig::from_lists(
            &parse_name_list(DEFAULT_CUES),
            &parse_name_list(DEFAULT_STOP_VERBS),
        )
    }
}

impl AffiliationConfig {
    pub fn from_lists(cues: &[String], stop_verbs: &[String]) -> Self {
        let mut cue_phrases: Vec<Vec<String>> = cues
            .iter()
            .map(|c| {
                normalize_org_name(c)
                    .split(' ')
                    .map(str::to_string)
                    .collect::<Vec<_>>()
            })
            .filter(|c: &Vec<String>| !c.iter().all(String::is_empty))
            .collect();
        cue_phrases.sort_by_key(|c| std::cmp::Reverse(c.len()));
        AffiliationConfig {
            cue_phrases,
            stop_verbs: stop_verbs.iter().map(|v| normalize_org_name(v)).collect(),
            window_words: DEFAULT_WINDOW_WORDS,
            cue_distance: DEFAULT_CUE_DISTANCE,
        }
    }

    /// Replaces the shipped lists with the given files, when present.
    pub fn with_files(mut self, cues: Option<&Path>, stop_verbs: Option<&Path>) -> Result<Self> {
        if let Some(path) = cues {
            let window = self.window_words;
            let distance = self.cue_distance;
            let verbs: Vec<String> = self.stop_verbs.iter().cloned().collect();
            self = AffiliationConfig::from_lists(&read_name_list(path)?, &verbs);
            self.window_words = window;
            self.cue_distance = distance;
        }
        if let Some(path) = stop_verbs {
            self.stop_verbs = read_name_list(path)?
                .iter()
                .map(|v| normalize_org_name(v))
                .collect();
        }
        Ok(self)
    }
}

/// Per-token views of a comment shared by the extractors.
struct Tokens<'a> {
    raw: Vec<&'a str>,
    /// Token with leading and trailing punctuation removed.
    core: Vec<&'a str>,
    norm: Vec<String>,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let raw = tokens(text);
        let core = raw
            .iter()
            .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()))
            .collect();
        let norm = raw.iter().map(|t| normalize_org_name(t)).collect();
        Tokens { raw, core, norm }
    }

    fn len(&self) -> usize {
        self.raw.len()
    }

    fn is_capitalized(&self, i: usize) -> bool {
        self.core[i]
            .chars()
            .next()
            .is_some_and(|c| c.is_uppercase() || c.is_ascii_digit())
    }

    /// Longest cue phrase whose words start at `i`; returns its length.
    fn cue_at(&self, i: usize, config: &AffiliationConfig) -> Option<usize> {
        config.cue_phrases.iter().find_map(|cue| {
            let end = i + cue.len();
            (end <= self.len() && cue.iter().zip(&self.norm[i..end]).all(|(a, b)| a == b))
                .then_some(cue.len())
        })
    }

    fn ends_sentence(&self, i: usize) -> bool {
        let t = self.raw[i].trim_end_matches(['"', '\'', ')', '”', '’']);
        if !t.ends_with(['.', '!', '?', ';', ':']) {
            return false;
        }
        let body = self.core[i];
        !(t.ends_with('.')
            && (body.contains('.') || ABBREVIATIONS.contains(&self.norm[i].as_str())))
    }

    fn ends_clause(&self, i: usize) -> bool {
        self.raw[i]
            .trim_end_matches(['"', '\'', ')', '”', '’'])
            .ends_with(',')
    }

    fn surface(&self, span: TokenSpan) -> String {
        let joined = self.raw[span.start..span.end].join(" ");
        joined
            .trim_matches(|c: char| !c.is_alphanumeric())
            .to_string()
    }

    /// Spans where the speaker's full name appears.
    fn name_spans(&self, full_name: &str) -> Vec<TokenSpan> {
        let name: Vec<String> = normalize_org_name(full_name)
            .split(' ')
            .filter(|w| !w.is_empty())
            .map(str::to_string)
            .collect();
        if name.is_empty() {
            return Vec::new();
        }
        let mut spans = Vec::new();
        let mut i = 0;
        while i + name.len() <= self.len() {
            if self.norm[i..i + name.len()] == name[..] {
                spans.push(TokenSpan::new(i, i + name.len()));
                i += name.len();
            } else {
                i += 1;
            }
        }
        spans
    }
}

/// Prefix of the comment holding `window_words` countable words. Tokens
/// inside `entity_spans` and punctuation-only tokens do not count.
pub fn intro_window(comment: &str, entity_spans: &[TokenSpan], window_words: usize) -> TokenSpan {
    let toks = tokens(comment);
    let mut end = toks.len();
    let mut counted = 0;
    for (i, tok) in toks.iter().enumerate() {
        if entity_spans.iter().any(|s| s.contains(i)) || is_punctuation_token(tok) {
            continue;
        }
        counted += 1;
        if counted == window_words {
            end = i + 1;
            break;
        }
    }
    for span in entity_spans {
        if span.start < end && span.end > end {
            end = span.end;
        }
    }
    TokenSpan::new(0, end)
}

#[derive(Debug, Clone, Copy)]
pub struct AffiliationExtractor<'a> {
    pub registry: &'a OrgRegistry,
    pub config: &'a AffiliationConfig,
}

impl<'a> AffiliationExtractor<'a> {
    pub fn new(registry: &'a OrgRegistry, config: &'a AffiliationConfig) -> Self {
        AffiliationExtractor { registry, config }
    }

    fn window(&self, comment: &str, toks: &Tokens<'_>, speaker: &Speaker) -> TokenSpan {
        intro_window(
            comment,
            &toks.name_spans(&speaker.full_name),
            self.config.window_words,
        )
    }

    fn is_terminator(&self, toks: &Tokens<'_>, i: usize) -> bool {
        let norm = toks.norm[i].as_str();
        PRONOUNS.contains(&norm)
            || self.config.stop_verbs.contains(norm)
            || phrase_at(&toks.norm, i).is_some()
    }

    /// Capitalized runs following cue phrases. A comma ends one name and,
    /// unless stance or lowercase text follows, starts the next.
    fn pattern_spans(&self, toks: &Tokens<'_>) -> Vec<TokenSpan> {
        let mut spans = Vec::new();
        let mut i = 0;
        while i < toks.len() {
            let Some(cue_len) = toks.cue_at(i, self.config) else {
                i += 1;
                continue;
            };
            let mut j = i + cue_len;
            let mut segment_start: Option<usize> = None;
            let mut last_cap_end = 0;
            let close = |start: Option<usize>, end: usize, spans: &mut Vec<TokenSpan>| {
                if let Some(s) = start {
                    if end > s {
                        spans.push(TokenSpan::new(s, end));
                    }
                }
            };
            while j < toks.len() {
                if is_punctuation_token(toks.raw[j]) {
                    if toks.raw[j].contains(',') && segment_start.is_some() {
                        close(segment_start.take(), last_cap_end, &mut spans);
                        j += 1;
                        continue;
                    }
                    break;
                }
                if self.is_terminator(toks, j) {
                    break;
                }
                if toks.is_capitalized(j) {
                    segment_start.get_or_insert(j);
                    last_cap_end = j + 1;
                } else if !CONNECTORS.contains(&toks.norm[j].as_str()) {
                    break;
                }
                if toks.ends_sentence(j) {
                    j += 1;
                    break;
                }
                if toks.ends_clause(j) {
                    close(segment_start.take(), last_cap_end, &mut spans);
                }
                j += 1;
            }
            close(segment_start.take(), last_cap_end, &mut spans);
            i = j.max(i + 1);
        }
        spans
    }

    /// Replaces a captured run with its registry entries when the run is
    /// nothing but entries joined by connectors.
    fn refine(&self, toks: &Tokens<'_>, span: TokenSpan) -> Vec<(TokenSpan, Option<String>)> {
        let text = toks.raw[span.start..span.end].join(" ");
        let hits = registry_scan(&text, self.registry);
        let covered = |k: usize| hits.iter().any(|h| h.span.contains(k - span.start));
        let only_glue = (span.start..span.end).all(|k| {
            covered(k) || toks.norm[k].is_empty() || CONNECTORS.contains(&toks.norm[k].as_str())
        });
        if hits.len() > 1 && only_glue {
            hits.into_iter()
                .map(|h| {
                    (
                        TokenSpan::new(h.span.start + span.start, h.span.end + span.start),
                        Some(h.canonical),
                    )
                })
                .collect()
        } else {
            vec![(span, None)]
        }
    }

    pub fn extract_recall(&self, comment: &str, _speaker: &Speaker) -> Vec<Candidate> {
        let toks = Tokens::new(comment);
        let mut out: Vec<Candidate> = Vec::new();
        for span in self.pattern_spans(&toks) {
            for (span, canonical) in self.refine(&toks, span) {
                let surface = toks.surface(span);
                if surface.is_empty() {
                    continue;
                }
                let canonical =
                    canonical.or_else(|| self.registry.canonical(&surface).map(str::to_string));
                out.push(Candidate {
                    surface,
                    canonical,
                    token_start: span.start,
                    token_end: span.end,
                    source: CandidateSource::Recall,
                });
            }
        }
        for hit in registry_scan(comment, self.registry) {
            out.push(Candidate {
                surface: toks.surface(hit.span),
                canonical: Some(hit.canonical),
                token_start: hit.span.start,
                token_end: hit.span.end,
                source: CandidateSource::RegistryScan,
            });
        }
        out.sort_by_key(|c| c.token_start);
        let mut seen = HashSet::new();
        out.retain(|c| seen.insert(c.normalized()));
        out
    }

    pub fn extract_precision(&self, comment: &str, speaker: &Speaker) -> Vec<Candidate> {
        let toks = Tokens::new(comment);
        let window = self.window(comment, &toks, speaker);
        let cue_ends: Vec<usize> = (0..toks.len())
            .filter_map(|i| toks.cue_at(i, self.config).map(|len| i + len))
            .collect();
        let distance = self.config.cue_distance;

        registry_scan(comment, self.registry)
            .into_iter()
            .filter(|hit| window.contains(hit.span.start))
            .filter(|hit| {
                cue_ends
                    .iter()
                    .any(|&end| end <= hit.span.start && end + distance > hit.span.start)
            })
            .map(|hit| Candidate {
                surface: toks.surface(hit.span),
                canonical: Some(hit.canonical),
                token_start: hit.span.start,
                token_end: hit.span.end,
                source: CandidateSource::Precision,
            })
            .collect()
    }

    /// Would the precision extractor accept this name in an ideal
    /// introduction? Names outside the registry get a shape test instead.
    pub fn template_retest(&self, surface: &str) -> bool {
        let normalized = normalize_org_name(surface);
        if self.registry.canonical(surface).is_some() {
            let sentence = format!(
                "My name is {}, with {surface}, and I am in support of this bill.",
                TEMPLATE_SPEAKER.0
            );
            let speaker = Speaker {
                id: String::new(),
                full_name: TEMPLATE_SPEAKER.0.into(),
                last_name: TEMPLATE_SPEAKER.1.into(),
                role: crate::transcript::Role::PublicCommenter,
            };
            return self
                .extract_precision(&sentence, &speaker)
                .iter()
                .any(|c| c.normalized() == normalized);
        }

        let toks = Tokens::new(surface);
        let has_content = (0..toks.len()).any(|i| {
            toks.is_capitalized(i)
                && !CONNECTORS.contains(&toks.norm[i].as_str())
                && !PRONOUNS.contains(&toks.norm[i].as_str())
        });
        let has_stop = (0..toks.len()).any(|i| self.is_terminator(&toks, i));
        has_content && !has_stop
    }

    pub fn combine(
        &self,
        recall: &[Candidate],
        precision: &[Candidate],
        comment: &str,
        speaker: &Speaker,
    ) -> AffiliationResult {
        let recall_names: HashSet<String> = recall.iter().map(Candidate::normalized).collect();
        let precision_names: HashSet<String> =
            precision.iter().map(Candidate::normalized).collect();

        let mut accepted: Vec<(usize, String, String)> = Vec::new();
        let mut remaining: Vec<&Candidate> = Vec::new();
        for candidate in recall.iter().chain(precision) {
            let norm = candidate.normalized();
            if recall_names.contains(&norm) && precision_names.contains(&norm) {
                accepted.push((candidate.token_start, candidate.name().to_string(), norm));
            } else {
                remaining.push(candidate);
            }
        }
        remaining.sort_by_key(|c| c.token_start);

        let toks = Tokens::new(comment);
        let window = self.window(comment, &toks, speaker);
        let full = normalize_org_name(&speaker.full_name);
        let last = normalize_org_name(&speaker.last_name);

        let mut rejected = Vec::new();
        for candidate in remaining {
            let norm = candidate.normalized();
            if accepted.iter().any(|(_, _, n)| *n == norm) {
                continue;
            }
            let reason = if !window.contains(candidate.token_start) {
                Some(RejectionReason::OutsideWindow)
            } else if (!full.is_empty() && norm == full) || (!last.is_empty() && norm == last) {
                Some(RejectionReason::SpeakerName)
            } else if !self.template_retest(candidate.name()) {
                Some(RejectionReason::TemplateRetestFailed)
            } else {
                block_reason(candidate.name(), self.registry).map(|r| match r {
                    BlockReason::TooShort => RejectionReason::TooShort,
                    BlockReason::Listed => RejectionReason::Blocklisted,
                })
            };
            match reason {
                Some(reason) => rejected.push((candidate.clone(), reason)),
                None => accepted.push((candidate.token_start, candidate.name().to_string(), norm)),
            }
        }

        accepted.sort_by_key(|(start, _, _)| *start);
        let mut seen = HashSet::new();
        let accepted = accepted
            .into_iter()
            .filter(|(_, _, norm)| seen.insert(norm.clone()))
            .map(|(_, name, _)| name)
            .collect();
        AffiliationResult { accepted, rejected }
    }

    pub fn extract(&self, comment: &str, speaker: &Speaker) -> AffiliationResult {
        let recall = self.extract_recall(comment, speaker);
        let precision = self.extract_precision(comment, speaker);
        self.combine(&recall, &precision, comment, speaker)
    }

    /// Names produced by one extractor configuration, for comparisons.
    pub fn extract_names(
        &self,
        variant: ExtractorVariant,
        comment: &str,
        speaker: &Speaker,
    ) -> Vec<String> {
        let names = |cands: Vec<Candidate>| {
            let mut seen = HashSet::new();
            cands
                .into_iter()
                .filter(|c| seen.insert(c.normalized()))
                .map(|c| c.name().to_string())
                .collect()
        };
        match variant {
            ExtractorVariant::Recall => names(self.extract_recall(comment, speaker)),
            ExtractorVariant::Precision => names(self.extract_precision(comment, speaker)),
            ExtractorVariant::Combined => self.extract(comment, speaker).accepted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtractorVariant {
    Recall,
    Precision,
    Combined,
}
