//! Sentence segmentation with abbreviation-aware fragment merging.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};

/// One narrative sentence; offsets are byte positions in the segmented text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    /// Ordinal in the document's sentence sequence.
    pub index: usize,
    pub text: String,
    pub source_span: Range<usize>,
}

/// Tuning knobs for the segmenter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmenterConfig {
    /// Candidates below this length (in characters) that look like fragments
    /// are merged with their successor.
    pub min_fragment_len: usize,
    /// Tokens whose trailing period never ends a sentence.
    pub abbreviations: Vec<String>,
}

impl Default for SegmenterConfig {
    fn default() -> SegmenterConfig {
        SegmenterConfig {
            min_fragment_len: 15,
            abbreviations: [
                "Inc.", "Corp.", "Co.", "Ltd.", "LLC.", "No.", "U.S.", "U.K.", "Mr.", "Ms.",
                "Dr.", "vs.", "etc.", "e.g.", "i.e.", "approx.",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        }
    }
}

/// Splits narrative text into ordered, non-overlapping sentences.
///
/// Candidate boundaries are terminal punctuation (`.`, `!`, `?`) followed by
/// whitespace, and blank lines. A candidate is then merged with its successor
/// when it ends in a known abbreviation, when it is a short enumerator like
/// "1.", when it carries no letters at all, or when it lacks terminal
/// punctuation and is shorter than the configured minimum. A candidate that
/// ends with terminal punctuation and none of those marks never merges, no
/// matter how short ("Revenue rose." stands alone).
pub fn segment_sentences(text: &str, config: &SegmenterConfig) -> Vec<Sentence> {
    let candidates = split_candidates(text);
    let mut merged: Vec<Range<usize>> = Vec::new();
    let mut current: Option<Range<usize>> = None;
    for cand in candidates {
        let range = match current.take() {
            Some(cur) => cur.start..cand.end,
            None => cand,
        };
        if merges_forward(&text[range.clone()], config) {
            current = Some(range);
        } else {
            merged.push(range);
        }
    }
    if let Some(last) = current {
        merged.push(last);
    }
    merged
        .into_iter()
        .enumerate()
        .map(|(index, range)| Sentence {
            index,
            text: text[range.clone()].to_string(),
            source_span: range,
        })
        .collect()
}

/// Joins sentences back into a segmentable text; blank lines between
/// sentences are hard boundaries, so re-segmenting reproduces the same texts.
pub fn join_sentences(sentences: &[Sentence]) -> String {
    let mut out = String::new();
    for (i, s) in sentences.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        out.push_str(&s.text);
    }
    out
}

/// Trimmed, non-empty candidate ranges between raw boundaries.
fn split_candidates(text: &str) -> Vec<Range<usize>> {
    let mut breaks: Vec<usize> = Vec::new();
    let bytes = text.as_bytes();
    let mut iter = text.char_indices().peekable();
    while let Some((i, c)) = iter.next() {
        if matches!(c, '.' | '!' | '?') {
            match iter.peek() {
                Some((_, next)) if next.is_whitespace() => breaks.push(i + 1),
                None => {}
                _ => {}
            }
        } else if c == '\n' {
            // A blank line (newline, optional spaces, newline) is a boundary.
            let mut j = i + 1;
            while j < bytes.len() && (bytes[j] == b' ' || bytes[j] == b'\t') {
                j += 1;
            }
            if j < bytes.len() && bytes[j] == b'\n' {
                breaks.push(i + 1);
            }
        }
    }
    breaks.push(text.len());
    let mut out = Vec::new();
    let mut start = 0usize;
    for end in breaks {
        if end < start {
            continue;
        }
        if let Some(range) = trim_range(text, start..end) {
            out.push(range);
        }
        start = end;
    }
    out
}

fn trim_range(text: &str, range: Range<usize>) -> Option<Range<usize>> {
    let slice = &text[range.clone()];
    let trimmed = slice.trim();
    if trimmed.is_empty() {
        return None;
    }
    let lead = slice.len() - slice.trim_start().len();
    let trail = slice.len() - slice.trim_end().len();
    Some(range.start + lead..range.end - trail)
}

fn merges_forward(candidate: &str, config: &SegmenterConfig) -> bool {
    let candidate = candidate.trim_end();
    if ends_with_abbreviation(candidate, config) {
        return true;
    }
    if !candidate.chars().any(char::is_alphanumeric) {
        // Symbol noise like "***" or a stray dash line.
        return true;
    }
    if candidate.chars().count() >= config.min_fragment_len {
        return false;
    }
    if !candidate.ends_with(['.', '!', '?']) {
        return true;
    }
    is_enumerator(candidate)
}

/// Final token before the period is all digits: "1." or "Item 7." style.
fn is_enumerator(candidate: &str) -> bool {
    let Some(stem) = candidate.strip_suffix('.') else {
        return false;
    };
    let token = stem.rsplit(char::is_whitespace).next().unwrap_or("");
    !token.is_empty() && token.chars().all(|c| c.is_ascii_digit())
}

fn ends_with_abbreviation(candidate: &str, config: &SegmenterConfig) -> bool {
    for abbrev in &config.abbreviations {
        let Some(tail_start) = candidate.len().checked_sub(abbrev.len()) else {
            continue;
        };
        if !candidate.is_char_boundary(tail_start)
            || !candidate[tail_start..].eq_ignore_ascii_case(abbrev)
        {
            continue;
        }
        let before = &candidate[..tail_start];
        if before.is_empty() || before.ends_with(char::is_whitespace) || before.ends_with('(') {
            return true;
        }
    }
    false
}
