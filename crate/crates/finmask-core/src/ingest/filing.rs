//! Filing documents and byte-level loading.

use alloc::string::{String, ToString};
use core::fmt;

use serde::{Deserialize, Serialize};

/// Input flavor of a filing body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormatTag {
    /// Prose only; no table markup expected.
    PlainText,
    /// Prose with delimited table blocks (pipe rows or table tags).
    SimpleMarkup,
}

/// One filing document with its identifying metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Filing {
    pub company_id: String,
    /// ISO calendar date, `YYYY-MM-DD`.
    pub filing_date: String,
    /// Document text with line endings normalized to `\n`.
    pub body: String,
    pub format: FormatTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_uri: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LoadError {
    /// Bytes are not valid UTF-8.
    DecodeError,
    /// Body is empty (or whitespace only) after decoding.
    EmptyDocument,
    /// `filing_date` is not a valid `YYYY-MM-DD` date.
    InvalidDate(String),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::DecodeError => f.write_str("document bytes are not valid UTF-8"),
            LoadError::EmptyDocument => f.write_str("document body is empty"),
            LoadError::InvalidDate(d) => write!(f, "invalid filing date `{d}` (want YYYY-MM-DD)"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for LoadError {}

/// Decodes filing bytes, normalizes line endings, and validates metadata.
pub fn load_filing(
    bytes: &[u8],
    format: FormatTag,
    company_id: &str,
    filing_date: &str,
) -> Result<Filing, LoadError> {
    let text = core::str::from_utf8(bytes).map_err(|_| LoadError::DecodeError)?;
    let body = normalize_newlines(text);
    if body.trim().is_empty() {
        return Err(LoadError::EmptyDocument);
    }
    if !is_valid_date(filing_date) {
        return Err(LoadError::InvalidDate(filing_date.to_string()));
    }
    Ok(Filing {
        company_id: company_id.to_string(),
        filing_date: filing_date.to_string(),
        body,
        format,
        source_uri: None,
    })
}

fn normalize_newlines(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '\r' {
            if chars.peek() == Some(&'\n') {
                chars.next();
            }
            out.push('\n');
        } else {
            out.push(c);
        }
    }
    out
}

fn is_valid_date(s: &str) -> bool {
    let parts: alloc::vec::Vec<&str> = s.split('-').collect();
    if parts.len() != 3 || parts[0].len() != 4 || parts[1].len() != 2 || parts[2].len() != 2 {
        return false;
    }
    let (Ok(y), Ok(m), Ok(d)) = (
        parts[0].parse::<i32>(),
        parts[1].parse::<u32>(),
        parts[2].parse::<u32>(),
    ) else {
        return false;
    };
    if !(1..=12).contains(&m) || d == 0 {
        return false;
    }
    let leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    let max_day = match m {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if leap => 29,
        _ => 28,
    };
    d <= max_day
}
