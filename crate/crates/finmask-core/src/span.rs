//! Numeric span detection and lexicon-driven expansion.
//!
//! Detection finds numeric literals and grows them over a small built-in set
//! of currency marks, scale words, percent signs, and quantity words — the
//! deterministic stand-in for a named-entity tagger. Expansion then grows
//! spans further using the configured [`UnitLexicon`], which is also what
//! decides maskability: a span is maskable only if the operative lexicon
//! finds at least one unit or scale alias inside it.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use crate::ingest::Sentence;
use crate::lexicon::{Alias, GroupFilter, UnitLexicon};
use crate::matcher::scan_literals;
use crate::Decimal;

/// Entity class of a numeric span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpanKind {
    Money,
    Percent,
    Cardinal,
    Quantity,
}

/// A numeric span within one sentence. `char_range` holds byte offsets into
/// the sentence's UTF-8 text (half-open).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NumericSpan {
    pub sentence_index: usize,
    pub char_range: Range<usize>,
    /// Exact substring of the sentence at `char_range`.
    pub surface: String,
    pub kind: SpanKind,
    pub has_unit_or_scale: bool,
}

/// The fixed detection vocabulary standing in for an NER tagger. The
/// configurable lexicon used for expansion and matching is separate; this one
/// only decides where spans start and what kind they are.
fn detection_lexicon() -> UnitLexicon {
    UnitLexicon::builder()
        .unit(
            "currency_usd",
            "USD",
            [Alias::sensitive("$"), Alias::sensitive("US$"), Alias::sensitive("USD")].into(),
        )
        .unit("percent", "%", [Alias::sensitive("%"), Alias::insensitive("percent")].into())
        .unit("per_share", "per share", [Alias::insensitive("per share")].into())
        .unit("shares", "shares", [Alias::insensitive("shares")].into())
        .unit(
            "basis_points",
            "basis points",
            [Alias::insensitive("basis points"), Alias::insensitive("bps")].into(),
        )
        .unit(
            "percentage_points",
            "percentage points",
            [Alias::insensitive("percentage points")].into(),
        )
        .scale(
            "scale_thousand",
            "thousand",
            [Alias::insensitive("thousand"), Alias::sensitive("K")].into(),
            Decimal::pow10(3),
        )
        .scale(
            "scale_million",
            "million",
            [Alias::insensitive("million"), Alias::insensitive("mil"), Alias::sensitive("M")]
                .into(),
            Decimal::pow10(6),
        )
        .scale(
            "scale_billion",
            "billion",
            [Alias::insensitive("billion"), Alias::insensitive("bn"), Alias::sensitive("B")]
                .into(),
            Decimal::pow10(9),
        )
        .scale(
            "scale_trillion",
            "trillion",
            [Alias::insensitive("trillion")].into(),
            Decimal::pow10(12),
        )
        .build()
        .expect("built-in detection lexicon is valid")
}

/// Finds numeric entities in a sentence: maximal digit-bearing tokens grown
/// over the built-in vocabulary and classified by their neighbors. A leading
/// currency mark makes money; a trailing percent mark makes percent; a
/// trailing quantity word (shares, per share, basis points) makes quantity;
/// anything else is cardinal.
pub fn detect_numeric_entities(sentence: &Sentence) -> Vec<NumericSpan> {
    let lexicon = detection_lexicon();
    let text = &sentence.text;
    let literals: Vec<Range<usize>> =
        scan_literals(text).into_iter().map(|l| l.range).collect();
    let hits = lexicon.find_aliases(text, GroupFilter::All, &literals);
    let mut claimed = alloc::vec![false; hits.len()];
    let mut spans = Vec::new();
    for literal in &literals {
        let range = absorb(text, literal.clone(), &hits, &mut claimed, &literals);
        let kind = classify(literal, &range, &hits, &claimed);
        let has_unit = hits
            .iter()
            .zip(claimed.iter())
            .any(|(h, c)| *c && range.start <= h.range.start && h.range.end <= range.end);
        spans.push(NumericSpan {
            sentence_index: sentence.index,
            char_range: range.clone(),
            surface: text[range].to_string(),
            kind,
            has_unit_or_scale: has_unit,
        });
    }
    merge_overlaps(text, spans)
}

/// Grows one span over adjacent aliases from the configured lexicon. The
/// expansion absorbs an alias when only whitespace separates it from the
/// current range, never crossing another numeric literal (the gap would not
/// be blank). Maskability (`has_unit_or_scale`) is recomputed against this
/// lexicon.
pub fn expand_span(sentence: &Sentence, span: &NumericSpan, lexicon: &UnitLexicon) -> NumericSpan {
    let text = &sentence.text;
    let literals: Vec<Range<usize>> =
        scan_literals(text).into_iter().map(|l| l.range).collect();
    let hits = lexicon.find_aliases(text, GroupFilter::All, &literals);
    let mut claimed = alloc::vec![false; hits.len()];
    // Hits already inside the detected range are spoken for.
    for (h, c) in hits.iter().zip(claimed.iter_mut()) {
        if span.char_range.start <= h.range.start && h.range.end <= span.char_range.end {
            *c = true;
        }
    }
    let range = absorb(text, span.char_range.clone(), &hits, &mut claimed, &literals);
    finish_span(sentence, span, range, lexicon)
}

/// Full per-sentence pipeline: detect entities, expand each against the
/// lexicon (leftmost span claims a contested alias), and merge any overlaps.
pub fn detect_spans(sentence: &Sentence, lexicon: &UnitLexicon) -> Vec<NumericSpan> {
    let text = &sentence.text;
    let detected = detect_numeric_entities(sentence);
    let literals: Vec<Range<usize>> =
        scan_literals(text).into_iter().map(|l| l.range).collect();
    let hits = lexicon.find_aliases(text, GroupFilter::All, &literals);
    let mut claimed = alloc::vec![false; hits.len()];
    for span in &detected {
        for (h, c) in hits.iter().zip(claimed.iter_mut()) {
            if span.char_range.start <= h.range.start && h.range.end <= span.char_range.end {
                *c = true;
            }
        }
    }
    let mut expanded = Vec::new();
    for span in &detected {
        let range = absorb(text, span.char_range.clone(), &hits, &mut claimed, &literals);
        expanded.push(finish_span(sentence, span, range, lexicon));
    }
    merge_overlaps(text, expanded)
}

/// Keeps only spans the lexicon recognizes as unit- or scale-bearing.
pub fn filter_maskable(spans: Vec<NumericSpan>) -> Vec<NumericSpan> {
    spans.into_iter().filter(|s| s.has_unit_or_scale).collect()
}

fn finish_span(
    sentence: &Sentence,
    span: &NumericSpan,
    range: Range<usize>,
    lexicon: &UnitLexicon,
) -> NumericSpan {
    let surface = sentence.text[range.clone()].to_string();
    let inner_literals: Vec<Range<usize>> =
        scan_literals(&surface).into_iter().map(|l| l.range).collect();
    let has_unit =
        !lexicon.find_aliases(&surface, GroupFilter::All, &inner_literals).is_empty();
    NumericSpan {
        sentence_index: sentence.index,
        char_range: range,
        surface,
        kind: span.kind,
        has_unit_or_scale: has_unit,
    }
}

/// Absorbs unclaimed alias hits adjacent to `range` (whitespace-only gaps),
/// alternating sides until fixed point. Absorbed hits are marked claimed.
///
/// A hit glued without any gap to a *different* literal belongs to that
/// literal and is never absorbed across: in "$5M $6M" the second "$" is
/// prefix-attached to "6", so the first span stops at "M".
fn absorb(
    text: &str,
    mut range: Range<usize>,
    hits: &[crate::lexicon::AliasHit],
    claimed: &mut [bool],
    literals: &[Range<usize>],
) -> Range<usize> {
    let foreign = |r: &Range<usize>, own: &Range<usize>| {
        literals.iter().any(|l| l != own && (r.end == l.start || r.start == l.end))
    };
    let own_literal = range.clone();
    loop {
        let mut grew = false;
        for (i, hit) in hits.iter().enumerate() {
            if claimed[i] || foreign(&hit.range, &own_literal) {
                continue;
            }
            if hit.range.end <= range.start && text[hit.range.end..range.start].trim().is_empty()
            {
                range.start = hit.range.start;
                claimed[i] = true;
                grew = true;
            } else if hit.range.start >= range.end
                && text[range.end..hit.range.start].trim().is_empty()
            {
                range.end = hit.range.end;
                claimed[i] = true;
                grew = true;
            }
        }
        if !grew {
            return range;
        }
    }
}

fn classify(
    literal: &Range<usize>,
    range: &Range<usize>,
    hits: &[crate::lexicon::AliasHit],
    claimed: &[bool],
) -> SpanKind {
    let own = |h: &crate::lexicon::AliasHit| {
        range.start <= h.range.start && h.range.end <= range.end
    };
    let leading_currency = hits.iter().zip(claimed).any(|(h, c)| {
        *c && own(h) && h.group.as_str() == "currency_usd" && h.range.start < literal.start
    });
    if leading_currency {
        return SpanKind::Money;
    }
    let trailing = |group: &str| {
        hits.iter().zip(claimed).any(|(h, c)| {
            *c && own(h) && h.group.as_str() == group && h.range.start >= literal.end
        })
    };
    if trailing("percent") {
        return SpanKind::Percent;
    }
    if trailing("per_share")
        || trailing("shares")
        || trailing("basis_points")
        || trailing("percentage_points")
    {
        return SpanKind::Quantity;
    }
    SpanKind::Cardinal
}

/// Defensive sweep: if expansion ever produced overlapping ranges, merge them
/// with the leftmost span keeping the identity (kind).
fn merge_overlaps(text: &str, mut spans: Vec<NumericSpan>) -> Vec<NumericSpan> {
    spans.sort_by_key(|s| s.char_range.start);
    let mut out: Vec<NumericSpan> = Vec::new();
    for span in spans {
        match out.last_mut() {
            Some(prev) if span.char_range.start < prev.char_range.end => {
                prev.char_range.end = prev.char_range.end.max(span.char_range.end);
                prev.surface = text[prev.char_range.clone()].to_string();
                prev.has_unit_or_scale |= span.has_unit_or_scale;
            }
            _ => out.push(span),
        }
    }
    out
}
