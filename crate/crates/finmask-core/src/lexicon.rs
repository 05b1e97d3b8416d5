//! Unit groups and the greedy alias scanner.
//!
//! A unit group is an equivalence class of spellings for one unit ("$", "USD",
//! "dollars"). Scale groups additionally carry an exact multiplicative factor
//! ("million" is 10^6). The scanner consumes the longest alias at each
//! position, so "per share" wins over "share" and "million" wins over "mil".

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use crate::decimal::Decimal;

/// Identifier of a unit group, e.g. `currency_usd` or `scale_million`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupId(String);

impl GroupId {
    pub fn new(id: impl Into<String>) -> GroupId {
        GroupId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for GroupId {
    fn from(s: &str) -> GroupId {
        GroupId::new(s)
    }
}

/// One spelling of a unit, with its case-matching rule.
///
/// Single-letter scale markers like "M" stay case-sensitive ("m" is not a
/// scale); words like "million" match case-insensitively.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alias {
    pub text: String,
    pub case_sensitive: bool,
}

impl Alias {
    pub fn insensitive(text: impl Into<String>) -> Alias {
        Alias { text: text.into(), case_sensitive: false }
    }

    pub fn sensitive(text: impl Into<String>) -> Alias {
        Alias { text: text.into(), case_sensitive: true }
    }
}

/// An equivalence class of unit aliases, optionally a scale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitGroup {
    pub id: GroupId,
    pub canonical: String,
    pub aliases: Vec<Alias>,
    pub is_scale: bool,
    /// Exact multiplicative factor; present iff `is_scale`.
    pub scale_factor: Option<Decimal>,
}

/// Which groups an alias scan may consume.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupFilter {
    All,
    ScaleOnly,
    NonScaleOnly,
}

impl GroupFilter {
    fn admits(&self, group: &UnitGroup) -> bool {
        match self {
            GroupFilter::All => true,
            GroupFilter::ScaleOnly => group.is_scale,
            GroupFilter::NonScaleOnly => !group.is_scale,
        }
    }
}

/// An alias occurrence found in a span of text; byte offsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AliasHit {
    pub range: Range<usize>,
    pub group: GroupId,
    pub is_scale: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LexiconError {
    DuplicateGroup(String),
    DuplicateAlias(String),
    EmptyAliases(String),
    MissingScaleFactor(String),
    UnexpectedScaleFactor(String),
    NonPositiveScaleFactor(String),
}

impl fmt::Display for LexiconError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LexiconError::DuplicateGroup(id) => write!(f, "duplicate group id `{id}`"),
            LexiconError::DuplicateAlias(a) => write!(f, "alias `{a}` appears in more than one group"),
            LexiconError::EmptyAliases(id) => write!(f, "group `{id}` has no aliases"),
            LexiconError::MissingScaleFactor(id) => {
                write!(f, "scale group `{id}` is missing a scale factor")
            }
            LexiconError::UnexpectedScaleFactor(id) => {
                write!(f, "non-scale group `{id}` carries a scale factor")
            }
            LexiconError::NonPositiveScaleFactor(id) => {
                write!(f, "scale group `{id}` must have a factor greater than zero")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for LexiconError {}

/// Immutable alias lexicon. Build once, share freely across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitLexicon {
    groups: Vec<UnitGroup>,
}

impl UnitLexicon {
    pub fn builder() -> LexiconBuilder {
        LexiconBuilder { groups: Vec::new() }
    }

    pub fn groups(&self) -> &[UnitGroup] {
        &self.groups
    }

    pub fn group(&self, id: &GroupId) -> Option<&UnitGroup> {
        self.groups.iter().find(|g| &g.id == id)
    }

    pub fn scale_factor(&self, id: &GroupId) -> Option<Decimal> {
        self.group(id).and_then(|g| g.scale_factor)
    }

    /// Greedy longest-alias scan over `text`, skipping `blocked` byte ranges.
    ///
    /// At each position every admissible alias is tried; the longest match is
    /// consumed and the scan resumes after it. Alphabetic aliases only match
    /// at word boundaries (no letter immediately before or after), so "mil"
    /// does not fire inside "family" and "M" does not fire inside "Million".
    pub fn find_aliases(
        &self,
        text: &str,
        filter: GroupFilter,
        blocked: &[Range<usize>],
    ) -> Vec<AliasHit> {
        let bytes = text.as_bytes();
        let mut hits = Vec::new();
        let mut pos = 0usize;
        while pos < bytes.len() {
            if !text.is_char_boundary(pos) {
                pos += 1;
                continue;
            }
            if let Some(b) = blocked.iter().find(|r| r.contains(&pos)) {
                pos = b.end;
                continue;
            }
            let mut best: Option<(usize, &UnitGroup)> = None;
            for group in self.groups.iter().filter(|g| filter.admits(g)) {
                for alias in &group.aliases {
                    let len = alias.text.len();
                    if len == 0 || pos + len > bytes.len() || !text.is_char_boundary(pos + len) {
                        continue;
                    }
                    if blocked.iter().any(|r| r.start < pos + len && pos < r.end) {
                        continue;
                    }
                    let candidate = &text[pos..pos + len];
                    let matched = if alias.case_sensitive {
                        candidate == alias.text
                    } else {
                        candidate.eq_ignore_ascii_case(&alias.text)
                    };
                    if !matched || !word_boundary_ok(text, pos, pos + len, &alias.text) {
                        continue;
                    }
                    match best {
                        Some((best_len, _)) if best_len >= len => {}
                        _ => best = Some((len, group)),
                    }
                }
            }
            if let Some((len, group)) = best {
                hits.push(AliasHit {
                    range: pos..pos + len,
                    group: group.id.clone(),
                    is_scale: group.is_scale,
                });
                pos += len;
            } else {
                pos += text[pos..].chars().next().map_or(1, |c| c.len_utf8());
            }
        }
        hits
    }
}

fn word_boundary_ok(text: &str, start: usize, end: usize, alias: &str) -> bool {
    let first_alpha = alias.chars().next().is_some_and(|c| c.is_alphabetic());
    let last_alpha = alias.chars().last().is_some_and(|c| c.is_alphabetic());
    if first_alpha {
        if let Some(prev) = text[..start].chars().next_back() {
            if prev.is_alphabetic() {
                return false;
            }
        }
    }
    if last_alpha {
        if let Some(next) = text[end..].chars().next() {
            if next.is_alphabetic() {
                return false;
            }
        }
    }
    true
}

/// Incremental construction with validation at the end.
pub struct LexiconBuilder {
    groups: Vec<UnitGroup>,
}

impl LexiconBuilder {
    pub fn unit(mut self, id: impl Into<GroupId>, canonical: &str, aliases: Vec<Alias>) -> Self {
        self.groups.push(UnitGroup {
            id: id.into(),
            canonical: canonical.to_string(),
            aliases,
            is_scale: false,
            scale_factor: None,
        });
        self
    }

    pub fn scale(
        mut self,
        id: impl Into<GroupId>,
        canonical: &str,
        aliases: Vec<Alias>,
        factor: Decimal,
    ) -> Self {
        self.groups.push(UnitGroup {
            id: id.into(),
            canonical: canonical.to_string(),
            aliases,
            is_scale: true,
            scale_factor: Some(factor),
        });
        self
    }

    pub fn push(mut self, group: UnitGroup) -> Self {
        self.groups.push(group);
        self
    }

    pub fn build(self) -> Result<UnitLexicon, LexiconError> {
        let mut seen_ids: Vec<&str> = Vec::new();
        let mut seen_aliases: Vec<&str> = Vec::new();
        for group in &self.groups {
            if seen_ids.contains(&group.id.as_str()) {
                return Err(LexiconError::DuplicateGroup(group.id.as_str().to_string()));
            }
            seen_ids.push(group.id.as_str());
            if group.aliases.is_empty() {
                return Err(LexiconError::EmptyAliases(group.id.as_str().to_string()));
            }
            for alias in &group.aliases {
                if seen_aliases.contains(&alias.text.as_str()) {
                    return Err(LexiconError::DuplicateAlias(alias.text.clone()));
                }
                seen_aliases.push(&alias.text);
            }
            match (&group.is_scale, &group.scale_factor) {
                (true, None) => {
                    return Err(LexiconError::MissingScaleFactor(group.id.as_str().to_string()))
                }
                (true, Some(f)) if !f.is_positive() => {
                    return Err(LexiconError::NonPositiveScaleFactor(
                        group.id.as_str().to_string(),
                    ))
                }
                (false, Some(_)) => {
                    return Err(LexiconError::UnexpectedScaleFactor(
                        group.id.as_str().to_string(),
                    ))
                }
                _ => {}
            }
        }
        Ok(UnitLexicon { groups: self.groups })
    }
}
