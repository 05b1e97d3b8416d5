//! Table extraction with explanatory pre-text, and whole-section parsing.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use super::sentence::{segment_sentences, SegmenterConfig, Sentence};

/// A table grid with the sentence that introduces it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableBlock {
    /// Stable within a document: "t1", "t2", ... in order of appearance.
    pub table_id: String,
    /// The single sentence immediately preceding the table; empty when the
    /// table opens its section.
    pub pre_text: String,
    pub grid: Vec<Vec<String>>,
    /// Byte range of the table markup in the section text.
    pub source_span: Range<usize>,
    /// Byte range of `pre_text` in the section text, when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pre_text_span: Option<Range<usize>>,
}

/// A leftover stretch of narrative between tables/pre-texts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NarrativeChunk {
    pub text: String,
    pub source_span: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TableParseError {
    /// `<table` without a closing `</table>`.
    UnclosedTable { offset: usize },
    /// Table markup that yields no usable rows or columns.
    EmptyGrid { offset: usize },
}

impl fmt::Display for TableParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableParseError::UnclosedTable { offset } => {
                write!(f, "unclosed table markup at byte {offset}")
            }
            TableParseError::EmptyGrid { offset } => {
                write!(f, "table markup with empty grid at byte {offset}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for TableParseError {}

/// Splits a section into table blocks and the narrative around them.
///
/// Two markup dialects are recognized: runs of lines beginning with `|`
/// (pipe tables, separator rows of dashes skipped) and `<table>...</table>`
/// blocks with `<tr>`/`<td>`/`<th>` rows. Each table takes the last sentence
/// of the narrative before it as `pre_text`; that sentence is carved out of
/// the narrative so tables, pre-texts, and sentences never share a byte.
pub fn extract_tables(
    section_text: &str,
) -> Result<(Vec<TableBlock>, Vec<NarrativeChunk>), TableParseError> {
    extract_tables_with(section_text, &SegmenterConfig::default())
}

pub(crate) fn extract_tables_with(
    section_text: &str,
    config: &SegmenterConfig,
) -> Result<(Vec<TableBlock>, Vec<NarrativeChunk>), TableParseError> {
    let regions = find_table_regions(section_text)?;
    let mut tables = Vec::new();
    let mut chunks = Vec::new();
    let mut cursor = 0usize;
    for (n, region) in regions.iter().enumerate() {
        let grid = match region.dialect {
            Dialect::Pipe => parse_pipe_grid(&section_text[region.range.clone()]),
            Dialect::Markup => parse_markup_grid(&section_text[region.range.clone()]),
        };
        if grid.is_empty() || grid.iter().all(|row| row.is_empty()) {
            return Err(TableParseError::EmptyGrid { offset: region.range.start });
        }
        let gap = cursor..region.range.start;
        let (pre_text, pre_text_span) = take_pre_text(section_text, gap.clone(), config);
        let narrative_end = pre_text_span.as_ref().map_or(gap.end, |r| r.start);
        push_chunk(section_text, cursor..narrative_end, &mut chunks);
        if let Some(span) = &pre_text_span {
            push_chunk(section_text, span.end..gap.end, &mut chunks);
        }
        tables.push(TableBlock {
            table_id: alloc::format!("t{}", n + 1),
            pre_text,
            grid,
            source_span: region.range.clone(),
            pre_text_span,
        });
        cursor = region.range.end;
    }
    push_chunk(section_text, cursor..section_text.len(), &mut chunks);
    Ok((tables, chunks))
}

/// A fully parsed section: tables plus globally indexed sentences, all spans
/// in section coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionParse {
    pub tables: Vec<TableBlock>,
    pub sentences: Vec<Sentence>,
    pub chunks: Vec<NarrativeChunk>,
}

/// Extracts tables and segments the remaining narrative in one pass.
pub fn parse_section(
    section_text: &str,
    config: &SegmenterConfig,
) -> Result<SectionParse, TableParseError> {
    let (tables, chunks) = extract_tables_with(section_text, config)?;
    let mut sentences = Vec::new();
    for chunk in &chunks {
        for mut s in segment_sentences(&chunk.text, config) {
            s.index = sentences.len();
            s.source_span = chunk.source_span.start + s.source_span.start
                ..chunk.source_span.start + s.source_span.end;
            sentences.push(s);
        }
    }
    Ok(SectionParse { tables, sentences, chunks })
}

fn push_chunk(text: &str, range: Range<usize>, chunks: &mut Vec<NarrativeChunk>) {
    if range.start < range.end {
        chunks.push(NarrativeChunk {
            text: text[range.clone()].to_string(),
            source_span: range,
        });
    }
}

/// Last sentence of the gap before a table, if the gap holds any prose.
fn take_pre_text(
    text: &str,
    gap: Range<usize>,
    config: &SegmenterConfig,
) -> (String, Option<Range<usize>>) {
    let gap_text = &text[gap.clone()];
    if gap_text.trim().is_empty() {
        return (String::new(), None);
    }
    match segment_sentences(gap_text, config).pop() {
        Some(last) => {
            let span = gap.start + last.source_span.start..gap.start + last.source_span.end;
            (last.text, Some(span))
        }
        None => (String::new(), None),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dialect {
    Pipe,
    Markup,
}

#[derive(Debug, Clone)]
struct TableRegion {
    range: Range<usize>,
    dialect: Dialect,
}

fn find_table_regions(text: &str) -> Result<Vec<TableRegion>, TableParseError> {
    let mut regions = find_markup_regions(text)?;
    regions.extend(find_pipe_regions(text, &regions));
    regions.sort_by_key(|r| r.range.start);
    Ok(regions)
}

fn find_markup_regions(text: &str) -> Result<Vec<TableRegion>, TableParseError> {
    let mut out = Vec::new();
    let mut from = 0usize;
    while let Some(rel) = find_ci(&text[from..], "<table") {
        let start = from + rel;
        let body_from = start + "<table".len();
        match find_ci(&text[body_from..], "</table>") {
            Some(end_rel) => {
                let end = body_from + end_rel + "</table>".len();
                out.push(TableRegion { range: start..end, dialect: Dialect::Markup });
                from = end;
            }
            None => return Err(TableParseError::UnclosedTable { offset: start }),
        }
    }
    Ok(out)
}

/// Maximal runs of lines that begin (after indentation) with `|`, outside any
/// markup region.
fn find_pipe_regions(text: &str, markup: &[TableRegion]) -> Vec<TableRegion> {
    let mut out: Vec<TableRegion> = Vec::new();
    let mut line_start = 0usize;
    let mut current: Option<Range<usize>> = None;
    for line in text.split_inclusive('\n') {
        let content_len = line.trim_end_matches('\n').len();
        let is_pipe = line.trim_start().starts_with('|')
            && !markup.iter().any(|r| r.range.contains(&line_start));
        if is_pipe {
            let end = line_start + content_len;
            current = match current {
                Some(r) => Some(r.start..end),
                None => Some(line_start..end),
            };
        } else if let Some(r) = current.take() {
            out.push(TableRegion { range: r, dialect: Dialect::Pipe });
        }
        line_start += line.len();
    }
    if let Some(r) = current {
        out.push(TableRegion { range: r, dialect: Dialect::Pipe });
    }
    out
}

fn find_ci(haystack: &str, needle: &str) -> Option<usize> {
    if needle.is_empty() || haystack.len() < needle.len() {
        return None;
    }
    (0..=haystack.len() - needle.len()).find(|&i| {
        haystack.is_char_boundary(i)
            && haystack.is_char_boundary(i + needle.len())
            && haystack[i..i + needle.len()].eq_ignore_ascii_case(needle)
    })
}

fn parse_pipe_grid(block: &str) -> Vec<Vec<String>> {
    let mut grid = Vec::new();
    for line in block.lines() {
        let line = line.trim();
        let Some(line) = line.strip_prefix('|') else { continue };
        let line = line.strip_suffix('|').unwrap_or(line);
        let cells: Vec<String> = line.split('|').map(|c| c.trim().to_string()).collect();
        let separator = cells
            .iter()
            .all(|c| !c.is_empty() && c.chars().all(|ch| matches!(ch, '-' | ':' | ' ' | '=')));
        if separator {
            continue;
        }
        if cells.iter().any(|c| !c.is_empty()) {
            grid.push(cells);
        }
    }
    grid
}

fn parse_markup_grid(block: &str) -> Vec<Vec<String>> {
    let mut grid = Vec::new();
    let mut from = 0usize;
    while let Some(rel) = find_ci(&block[from..], "<tr") {
        let row_start = from + rel;
        let row_body_start = match block[row_start..].find('>') {
            Some(p) => row_start + p + 1,
            None => break,
        };
        let row_end = find_ci(&block[row_body_start..], "</tr>")
            .map(|p| row_body_start + p)
            .or_else(|| find_ci(&block[row_body_start..], "<tr").map(|p| row_body_start + p))
            .unwrap_or_else(|| {
                find_ci(&block[row_body_start..], "</table>")
                    .map_or(block.len(), |p| row_body_start + p)
            });
        let row = parse_markup_row(&block[row_body_start..row_end]);
        if !row.is_empty() {
            grid.push(row);
        }
        from = row_end.max(row_body_start);
        if from <= row_start {
            break;
        }
    }
    grid
}

fn parse_markup_row(row: &str) -> Vec<String> {
    let mut cells = Vec::new();
    let mut from = 0usize;
    loop {
        let td = find_ci(&row[from..], "<td");
        let th = find_ci(&row[from..], "<th");
        let rel = match (td, th) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => break,
        };
        let cell_start = from + rel;
        let content_start = match row[cell_start..].find('>') {
            Some(p) => cell_start + p + 1,
            None => break,
        };
        let content_end = ["</td>", "</th>", "<td", "<th"]
            .iter()
            .filter_map(|pat| find_ci(&row[content_start..], pat))
            .min()
            .map_or(row.len(), |p| content_start + p);
        cells.push(clean_cell(&row[content_start..content_end]));
        from = content_end.max(content_start);
    }
    cells
}

/// Strips residual tags and decodes the entities that appear in fixtures.
fn clean_cell(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut in_tag = false;
    for c in raw.chars() {
        match c {
            '<' => in_tag = true,
            '>' if in_tag => in_tag = false,
            _ if !in_tag => out.push(c),
            _ => {}
        }
    }
    let out = out
        .replace("&amp;", "&")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&nbsp;", " ")
        .replace("&quot;", "\"")
        .replace("&#39;", "'");
    out.trim().to_string()
}
