//! Locating the management discussion and analysis section.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::filing::Filing;

/// A located section of a filing body; byte offsets into `Filing.body`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentSection {
    pub start_offset: usize,
    pub end_offset: usize,
    pub label: String,
    /// True when the offsets were supplied by hand instead of the heading
    /// matcher, for documents whose headings defeat automatic location.
    #[serde(default)]
    pub manual_override: bool,
}

impl DocumentSection {
    /// A hand-curated section; offsets are trusted as given.
    pub fn manual(start_offset: usize, end_offset: usize, label: &str) -> DocumentSection {
        DocumentSection {
            start_offset,
            end_offset,
            label: label.to_string(),
            manual_override: true,
        }
    }

    pub fn slice<'a>(&self, body: &'a str) -> &'a str {
        &body[self.start_offset..self.end_offset]
    }

    pub fn validate(&self, body: &str) -> bool {
        self.start_offset < self.end_offset
            && self.end_offset <= body.len()
            && body.is_char_boundary(self.start_offset)
            && body.is_char_boundary(self.end_offset)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SectionError {
    /// No "Item 7" heading anywhere in the body.
    SectionNotFound,
    /// An "Item 7" heading exists but no later "Item 7A"/"Item 8" heading
    /// closes it (or every closing heading precedes every opening one).
    MalformedDocument,
}

impl fmt::Display for SectionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SectionError::SectionNotFound => f.write_str("no Item 7 heading found"),
            SectionError::MalformedDocument => {
                f.write_str("Item 7 heading is never followed by an Item 7A/Item 8 heading")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SectionError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum HeadingKind {
    Seven,
    SevenA,
    Eight,
}

/// Finds the MD&A section: from the last line-start "Item 7" heading that is
/// still followed by an "Item 7A" or "Item 8" heading, up to that following
/// heading. Taking the last such match skips tables of contents, which list
/// the same headings near the top of the document. Matching is
/// case-insensitive and tolerates punctuation after the item number
/// ("Item 7.", "ITEM 7 —", "item 7:").
pub fn extract_mdna(filing: &Filing) -> Result<DocumentSection, SectionError> {
    let headings = find_headings(&filing.body);
    let sevens: Vec<usize> = headings
        .iter()
        .filter(|(_, k)| *k == HeadingKind::Seven)
        .map(|(off, _)| *off)
        .collect();
    if sevens.is_empty() {
        return Err(SectionError::SectionNotFound);
    }
    for &start in sevens.iter().rev() {
        let end = headings
            .iter()
            .filter(|(off, k)| *off > start && *k != HeadingKind::Seven)
            .map(|(off, _)| *off)
            .min();
        if let Some(end) = end {
            return Ok(DocumentSection {
                start_offset: start,
                end_offset: end,
                label: "MD&A".to_string(),
                manual_override: false,
            });
        }
    }
    Err(SectionError::MalformedDocument)
}

/// Offsets (first non-blank character of the line) of item headings.
fn find_headings(body: &str) -> Vec<(usize, HeadingKind)> {
    let mut out = Vec::new();
    let mut line_start = 0usize;
    for line in body.split_inclusive('\n') {
        let trimmed = line.trim_start();
        let indent = line.len() - trimmed.len();
        if let Some(kind) = classify_heading(trimmed) {
            out.push((line_start + indent, kind));
        }
        line_start += line.len();
    }
    out
}

fn classify_heading(line: &str) -> Option<HeadingKind> {
    let rest = strip_prefix_ci(line, "item")?;
    let rest = rest.strip_prefix(char::is_whitespace)?;
    let rest = rest.trim_start();
    let (digit, rest) = {
        let mut chars = rest.chars();
        (chars.next()?, chars.as_str())
    };
    match digit {
        '7' => {
            let next = rest.chars().next();
            match next {
                Some(c) if c.eq_ignore_ascii_case(&'a') => {
                    // "Item 7A" only when nothing word-like follows the A.
                    let after = rest[c.len_utf8()..].chars().next();
                    if after.is_none_or(|a| !a.is_alphanumeric()) {
                        Some(HeadingKind::SevenA)
                    } else {
                        None
                    }
                }
                Some(c) if c.is_alphanumeric() => None,
                _ => Some(HeadingKind::Seven),
            }
        }
        '8' => {
            let next = rest.chars().next();
            if next.is_none_or(|c| !c.is_alphanumeric()) {
                Some(HeadingKind::Eight)
            } else {
                None
            }
        }
        _ => None,
    }
}

fn strip_prefix_ci<'a>(text: &'a str, prefix: &str) -> Option<&'a str> {
    if text.len() >= prefix.len() && text[..prefix.len()].eq_ignore_ascii_case(prefix) {
        Some(&text[prefix.len()..])
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::filing::FormatTag;
    use crate::ingest::load_filing;

    fn filing(body: &str) -> Filing {
        load_filing(body.as_bytes(), FormatTag::PlainText, "t", "2024-01-01").unwrap()
    }

    #[test]
    fn section_between_item7_and_item8() {
        let body = "Preamble.\nItem 7. Management's Discussion\nBody text here.\nItem 8. Financial Statements\nAfter.";
        let f = filing(body);
        let s = extract_mdna(&f).unwrap();
        assert!(f.body[s.start_offset..].starts_with("Item 7."));
        assert!(f.body[s.end_offset..].starts_with("Item 8."));
        assert!(s.slice(&f.body).contains("Body text here."));
        assert!(!s.manual_override);
    }

    #[test]
    fn item7a_closes_the_section_first() {
        let body = "Item 7. MD&A\ncontent\nItem 7A. Quantitative\nmore\nItem 8. Financials\n";
        let f = filing(body);
        let s = extract_mdna(&f).unwrap();
        assert!(f.body[s.end_offset..].starts_with("Item 7A."));
    }

    #[test]
    fn table_of_contents_is_skipped() {
        let body = "Item 7. Management's Discussion ... 41\nItem 7A. Market Risk ... 60\nItem 8. Financials ... 62\n\nITEM 7 — MANAGEMENT'S DISCUSSION\nreal content\nITEM 7A — MARKET RISK\n";
        let f = filing(body);
        let s = extract_mdna(&f).unwrap();
        assert!(f.body[s.start_offset..].starts_with("ITEM 7 —"));
        assert!(s.slice(&f.body).contains("real content"));
    }

    #[test]
    fn heading_variants_and_non_headings() {
        assert_eq!(classify_heading("Item 7"), Some(HeadingKind::Seven));
        assert_eq!(classify_heading("ITEM 7:"), Some(HeadingKind::Seven));
        assert_eq!(classify_heading("item 7a. Quantitative"), Some(HeadingKind::SevenA));
        assert_eq!(classify_heading("Item 8. Financial"), Some(HeadingKind::Eight));
        assert_eq!(classify_heading("Item 70"), None);
        assert_eq!(classify_heading("Item 7Annual"), None);
        assert_eq!(classify_heading("Items 7"), None);
        assert_eq!(classify_heading("See Item 7 for details"), None);
    }

    #[test]
    fn error_cases() {
        let f = filing("no headings at all");
        assert_eq!(extract_mdna(&f), Err(SectionError::SectionNotFound));
        let f = filing("Item 8. Financials\nItem 7. MD&A trailing, never closed");
        assert_eq!(extract_mdna(&f), Err(SectionError::MalformedDocument));
    }

    #[test]
    fn deterministic_offsets() {
        let f = filing("x\nItem 7. A\nbody\nItem 8. B\n");
        let a = extract_mdna(&f).unwrap();
        let b = extract_mdna(&f).unwrap();
        assert_eq!((a.start_offset, a.end_offset), (b.start_offset, b.end_offset));
        assert!(a.validate(&f.body));
    }
}
