//! Registry of known organizations with the place and phrase blocklists
//! used to veto extracted candidates.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::transcript::{tokens, TokenSpan};

/// Names whose normalized form is at most this many characters are never
/// organizations.
pub const MAX_REJECTED_LEN: usize = 2;

pub const DEFAULT_PHRASE_BLOCKLIST: &[&str] = &["board member"];

/// Lowercases, drops every punctuation character and collapses whitespace.
pub fn normalize_org_name(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars() {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
        } else if c.is_alphanumeric() {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.extend(c.to_lowercase());
        }
    }
    out
}

#[derive(Debug, Clone, Default)]
pub struct OrgRegistry {
    entries: Vec<String>,
    normalized_index: BTreeMap<String, String>,
    city_county_blocklist: BTreeSet<String>,
    phrase_blocklist: BTreeSet<String>,
    max_entry_tokens: usize,
}

/// A freshly built registry plus the names that were refused.
#[derive(Debug, Clone)]
pub struct RegistryLoad {
    pub registry: OrgRegistry,
    pub rejected: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegistryMatch {
    pub canonical: String,
    pub span: TokenSpan,
}

impl OrgRegistry {
    /// Builds a registry. Duplicate normalized names keep their first
    /// spelling; names too short after normalization are rejected.
    pub fn from_names<I, J, S, T>(orgs: I, places: J) -> RegistryLoad
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        let mut registry = OrgRegistry {
            phrase_blocklist: DEFAULT_PHRASE_BLOCKLIST
                .iter()
                .map(|p| normalize_org_name(p))
                .collect(),
            ..Default::default()
        };
        let mut rejected = Vec::new();

        for name in orgs {
            let canonical = name
                .as_ref()
                .split_whitespace()
                .collect::<Vec<_>>()
                .join(" ");
            if canonical.is_empty() {
                continue;
            }
            let normalized = normalize_org_name(&canonical);
            if normalized.chars().count() <= MAX_REJECTED_LEN {
                rejected.push(canonical);
                continue;
            }
            if registry.normalized_index.contains_key(&normalized) {
                continue;
            }
            registry.max_entry_tokens =
                registry.max_entry_tokens.max(normalized.split(' ').count());
            registry
                .normalized_index
                .insert(normalized, canonical.clone());
            registry.entries.push(canonical);
        }

        registry.city_county_blocklist = places
            .into_iter()
            .map(|p| normalize_org_name(p.as_ref()))
            .filter(|p| !p.is_empty())
            .collect();

        RegistryLoad { registry, rejected }
    }

    pub fn add_blocked_phrase(&mut self, phrase: &str) {
        let normalized = normalize_org_name(phrase);
        if !normalized.is_empty() {
            self.phrase_blocklist.insert(normalized);
        }
    }

    /// Canonical names in load order.
    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Canonical spelling of a name, if the registry knows it.
    pub fn canonical(&self, name: &str) -> Option<&str> {
        self.normalized_index
            .get(&normalize_org_name(name))
            .map(String::as_str)
    }

    pub fn normalized_index(&self) -> &BTreeMap<String, String> {
        &self.normalized_index
    }
}

/// Reads a one-name-per-line list, skipping blanks and `#` comments.
pub fn read_name_list(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_name_list(&text))
}

pub fn parse_name_list(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

pub fn load_registry(orgs_file: &Path, places_file: &Path) -> Result<RegistryLoad> {
    let orgs = read_name_list(orgs_file)?;
    let places = read_name_list(places_file)?;
    Ok(OrgRegistry::from_names(orgs, places))
}

/// Leftmost-longest, non-overlapping registry matches over the
/// whitespace tokens of `text`. Punctuation-only tokens are transparent.
pub fn registry_scan(text: &str, registry: &OrgRegistry) -> Vec<RegistryMatch> {
    let toks = tokens(text);
    let normalized: Vec<(usize, String)> = toks
        .iter()
        .enumerate()
        .map(|(i, t)| (i, normalize_org_name(t)))
        .filter(|(_, n)| !n.is_empty())
        .collect();

    let mut matches = Vec::new();
    let mut i = 0;
    while i < normalized.len() {
        let longest = (1..=registry.max_entry_tokens.min(normalized.len() - i))
            .rev()
            .find_map(|k| {
                let key = normalized[i..i + k]
                    .iter()
                    .map(|(_, n)| n.as_str())
                    .collect::<Vec<_>>()
                    .join(" ");
                registry.normalized_index.get(&key).map(|c| (k, c))
            });
        match longest {
            Some((k, canonical)) => {
                matches.push(RegistryMatch {
                    canonical: canonical.clone(),
                    span: TokenSpan::new(normalized[i].0, normalized[i + k - 1].0 + 1),
                });
                i += k;
            }
            None => i += 1,
        }
    }
    matches
}

pub fn is_blocklisted(name: &str, registry: &OrgRegistry) -> bool {
    let normalized = normalize_org_name(name);
    registry.city_county_blocklist.contains(&normalized)
        || registry.phrase_blocklist.contains(&normalized)
        || normalized.chars().count() <= MAX_REJECTED_LEN
}

/// Which blocklist, if any, vetoes `name`.
pub(crate) fn block_reason(name: &str, registry: &OrgRegistry) -> Option<BlockReason> {
    let normalized = normalize_org_name(name);
    if normalized.chars().count() <= MAX_REJECTED_LEN {
        Some(BlockReason::TooShort)
    } else if registry.city_county_blocklist.contains(&normalized)
        || registry.phrase_blocklist.contains(&normalized)
    {
        Some(BlockReason::Listed)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BlockReason {
    TooShort,
    Listed,
}
