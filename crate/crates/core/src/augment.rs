//! Training-corpus generation by organization substitution, and the
//! token/tag column format used to hand corpora to sequence-labeling
//! trainers.

use std::io::{BufRead, Write};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gazetteer::OrgRegistry;
use crate::transcript::TokenSpan;

pub const DEFAULT_PER_COMMENT: usize = 100;
pub const DEFAULT_PER_ORG: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Tag {
    Person,
    Organization,
    Other,
}

impl Tag {
    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Person => "PERSON",
            Tag::Organization => "ORGANIZATION",
            Tag::Other => "OTHER",
        }
    }

    fn parse(s: &str) -> Option<Tag> {
        match s {
            "PERSON" => Some(Tag::Person),
            "ORGANIZATION" => Some(Tag::Organization),
            "OTHER" => Some(Tag::Other),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedComment {
    pub tokens: Vec<String>,
    pub tags: Vec<Tag>,
    /// Spans of the affiliated organizations, in order.
    pub org_slots: Vec<TokenSpan>,
}

impl TaggedComment {
    /// ORGANIZATION tags must be exactly the slot tokens, and slots must be
    /// separated by at least one token so the column format can recover
    /// them.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(format!("tagged comment: {m}")));
        if self.tokens.len() != self.tags.len() {
            return bad(format!(
                "{} tokens but {} tags",
                self.tokens.len(),
                self.tags.len()
            ));
        }
        if let Some(t) = self
            .tokens
            .iter()
            .find(|t| t.is_empty() || t.chars().any(char::is_whitespace))
        {
            return bad(format!("token {t:?} is empty or contains whitespace"));
        }
        let mut prev_end: Option<usize> = None;
        for slot in &self.org_slots {
            if slot.is_empty() || slot.end > self.tokens.len() {
                return bad(format!("slot {slot:?} out of range"));
            }
            if prev_end.is_some_and(|end| slot.start <= end) {
                return bad(format!(
                    "slot {slot:?} overlaps or touches the previous slot"
                ));
            }
            prev_end = Some(slot.end);
        }
        for (i, tag) in self.tags.iter().enumerate() {
            let in_slot = self.org_slots.iter().any(|s| s.contains(i));
            if in_slot != (*tag == Tag::Organization) {
                return bad(format!("token {i} tag {tag:?} disagrees with org slots"));
            }
        }
        Ok(())
    }

    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }

    pub fn slot_text(&self, slot: TokenSpan) -> String {
        self.tokens[slot.start..slot.end].join(" ")
    }

    /// Copy with each slot replaced by the matching organization name.
    fn fill(&self, orgs: &[&str]) -> TaggedComment {
        debug_assert_eq!(orgs.len(), self.org_slots.len());
        let mut tokens = Vec::with_capacity(self.tokens.len());
        let mut tags = Vec::with_capacity(self.tags.len());
        let mut slots = Vec::with_capacity(self.org_slots.len());
        let mut cursor = 0;
        for (slot, org) in self.org_slots.iter().zip(orgs) {
            tokens.extend_from_slice(&self.tokens[cursor..slot.start]);
            tags.extend_from_slice(&self.tags[cursor..slot.start]);
            let start = tokens.len();
            for word in org.split_whitespace() {
                tokens.push(word.to_string());
                tags.push(Tag::Organization);
            }
            slots.push(TokenSpan::new(start, tokens.len()));
            cursor = slot.end;
        }
        tokens.extend_from_slice(&self.tokens[cursor..]);
        tags.extend_from_slice(&self.tags[cursor..]);
        TaggedComment {
            tokens,
            tags,
            org_slots: slots,
        }
    }
}

/// Independent per-item seed, so parallel generation stays reproducible.
pub fn derive_seed(seed: u64, item: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ item.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `n` copies of `comment`, each slot refilled with a uniformly drawn
/// registry entry.
pub fn substitute_orgs(
    comment: &TaggedComment,
    registry: &OrgRegistry,
    n: usize,
    seed: u64,
) -> Result<Vec<TaggedComment>> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "substitution count must be at least 1".into(),
        ));
    }
    if comment.org_slots.is_empty() {
        return Ok(vec![comment.clone(); n]);
    }
    if registry.is_empty() {
        return Err(Error::EmptyRegistry);
    }
    let entries = registry.entries();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let picks: Vec<&str> = comment
                .org_slots
                .iter()
                .map(|_| entries[rng.gen_range(0..entries.len())].as_str())
                .collect();
            comment.fill(&picks)
        })
        .collect())
}

pub fn generate_recall_corpus(
    comments: &[TaggedComment],
    registry: &OrgRegistry,
    per_comment: usize,
    seed: u64,
) -> Result<Vec<TaggedComment>> {
    let batches: Vec<Vec<TaggedComment>> = comments
        .par_iter()
        .enumerate()
        .map(|(i, c)| substitute_orgs(c, registry, per_comment, derive_seed(seed, i as u64)))
        .collect::<Result<_>>()?;
    Ok(batches.into_iter().flatten().collect())
}

/// For every registry entry, `per_org` single-organization comments filled
/// with that entry, followed by every comment without organizations.
pub fn generate_precision_corpus(
    comments: &[TaggedComment],
    registry: &OrgRegistry,
    per_org: usize,
    seed: u64,
) -> Result<Vec<TaggedComment>> {
    if per_org == 0 {
        return Err(Error::InvalidArgument(
            "per-organization count must be at least 1".into(),
        ));
    }
    let singles: Vec<&TaggedComment> = comments.iter().filter(|c| c.org_slots.len() == 1).collect();
    if singles.is_empty() {
        return Err(Error::NoSingleSlotComments);
    }
    let filled: Vec<Vec<TaggedComment>> = registry
        .entries()
        .par_iter()
        .enumerate()
        .map(|(i, org)| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
            let picks: Vec<usize> = if singles.len() >= per_org {
                index::sample(&mut rng, singles.len(), per_org).into_vec()
            } else {
                (0..per_org)
                    .map(|_| rng.gen_range(0..singles.len()))
                    .collect()
            };
            picks.into_iter().map(|k| singles[k].fill(&[org])).collect()
        })
        .collect();

    let mut corpus: Vec<TaggedComment> = filled.into_iter().flatten().collect();
    corpus.extend(comments.iter().filter(|c| c.org_slots.is_empty()).cloned());
    Ok(corpus)
}

/// One `token<TAB>TAG` line per token, a blank line after each sentence.
pub fn emit_sequence_labels<W: Write>(corpus: &[TaggedComment], mut sink: W) -> Result<()> {
    for comment in corpus {
        for (token, tag) in comment.tokens.iter().zip(&comment.tags) {
            writeln!(sink, "{token}\t{}", tag.as_str())?;
        }
        writeln!(sink)?;
    }
    sink.flush()?;
    Ok(())
}

pub fn read_sequence_labels<R: BufRead>(source: R) -> Result<Vec<TaggedComment>> {
    let mut corpus = Vec::new();
    let mut tokens = Vec::new();
    let mut tags = Vec::new();
    let finish =
        |tokens: &mut Vec<String>, tags: &mut Vec<Tag>, corpus: &mut Vec<TaggedComment>| {
            if tokens.is_empty() {
                return;
            }
            let mut slots = Vec::new();
            let mut i = 0;
            while i < tags.len() {
                if tags[i] == Tag::Organization {
                    let start = i;
                    while i < tags.len() && tags[i] == Tag::Organization {
                        i += 1;
                    }
                    slots.push(TokenSpan::new(start, i));
                } else {
                    i += 1;
                }
            }
            corpus.push(TaggedComment {
                tokens: std::mem::take(tokens),
                tags: std::mem::take(tags),
                org_slots: slots,
            });
        };
    for (i, line) in source.lines().enumerate() {
        let line = line.map_err(|e| Error::parse(i + 1, e.to_string()))?;
        if line.is_empty() {
            finish(&mut tokens, &mut tags, &mut corpus);
            continue;
        }
        let (token, tag) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(i + 1, "expected `token<TAB>TAG`"))?;
        let tag =
            Tag::parse(tag).ok_or_else(|| Error::parse(i + 1, format!("unknown tag `{tag}`")))?;
        tokens.push(token.to_string());
        tags.push(tag);
    }
    finish(&mut tokens, &mut tags, &mut corpus);
    Ok(corpus)
}

/// Line-delimited JSON tagged comments, validated.
pub fn parse_tagged_comments<R: BufRead>(source: R) -> Result<Vec<TaggedComment>> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line.map_err(|e| Error::parse(i + 1, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let comment: TaggedComment =
            serde_json::from_str(&line).map_err(|e| Error::parse(i + 1, e.to_string()))?;
        comment
            .validate()
            .map_err(|e| Error::parse(i + 1, e.to_string()))?;
        out.push(comment);
    }
    Ok(out)
}
