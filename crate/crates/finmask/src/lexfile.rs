//! TOML lexicon files: the on-disk schema for unit lexicons and the embedded
//! default used when a config names no lexicon path.

use finmask_core::lexicon::{Alias, LexiconError, UnitGroup, UnitLexicon};
use finmask_core::Decimal;
use serde::Deserialize;
use thiserror::Error;

/// The default lexicon shipped with the binary, as TOML text.
pub const DEFAULT_LEXICON_TOML: &str = include_str!("../data/default_lexicon.toml");

#[derive(Debug, Error)]
pub enum LexiconFileError {
    #[error("lexicon TOML is invalid: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("lexicon is inconsistent: {0}")]
    Lexicon(#[from] LexiconError),
    #[error("group {group}: scale_exp {exp} is out of range (0..=27)")]
    ScaleOutOfRange { group: String, exp: i64 },
}

#[derive(Debug, Deserialize)]
struct LexiconFile {
    #[serde(default)]
    group: Vec<GroupEntry>,
}

#[derive(Debug, Deserialize)]
struct GroupEntry {
    id: String,
    canonical: String,
    #[serde(default)]
    scale_exp: Option<i64>,
    aliases: Vec<AliasEntry>,
}

#[derive(Debug, Deserialize)]
struct AliasEntry {
    text: String,
    #[serde(default)]
    case_sensitive: bool,
}

/// Parses a lexicon from TOML text.
pub fn parse_lexicon(text: &str) -> Result<UnitLexicon, LexiconFileError> {
    let file: LexiconFile = toml::from_str(text)?;
    let mut builder = UnitLexicon::builder();
    for entry in file.group {
        let aliases: Vec<Alias> = entry
            .aliases
            .into_iter()
            .map(|a| {
                if a.case_sensitive {
                    Alias::sensitive(a.text)
                } else {
                    Alias::insensitive(a.text)
                }
            })
            .collect();
        match entry.scale_exp {
            Some(exp) => {
                if !(0..=27).contains(&exp) {
                    return Err(LexiconFileError::ScaleOutOfRange {
                        group: entry.id,
                        exp,
                    });
                }
                builder = builder.push(UnitGroup {
                    id: entry.id.as_str().into(),
                    canonical: entry.canonical,
                    aliases,
                    is_scale: true,
                    scale_factor: Some(Decimal::pow10(exp as i32)),
                });
            }
            None => {
                builder = builder.push(UnitGroup {
                    id: entry.id.as_str().into(),
                    canonical: entry.canonical,
                    aliases,
                    is_scale: false,
                    scale_factor: None,
                });
            }
        }
    }
    Ok(builder.build()?)
}

/// The built-in default lexicon.
pub fn default_lexicon() -> UnitLexicon {
    parse_lexicon(DEFAULT_LEXICON_TOML).expect("embedded default lexicon is valid")
}
