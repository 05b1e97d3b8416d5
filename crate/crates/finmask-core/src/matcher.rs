//! Precision-relaxed span matching with unit groups.
//!
//! A span like "$1,230 million" is normalized to an exact base value
//! (1,230,000,000) and a precision, the power of ten of the literal's least
//! significant nonzero digit multiplied by any consumed scale factor (here
//! 10^0 * 10^6). Two spans match numerically when both values round to the
//! same integer at the coarser of their two precisions, with ties away from
//! zero. Units match when every non-scale unit group found in the ground
//! truth is also present in the prediction.

use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use alloc::collections::BTreeSet;
use serde::{Deserialize, Serialize};

use crate::decimal::Decimal;
use crate::lexicon::{GroupFilter, GroupId, UnitLexicon};

/// Why a span failed to normalize.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizeError {
    /// No digits anywhere in the span ("several million").
    NoNumericLiteral,
    /// More than one numeric literal; the span is ambiguous.
    MultipleNumericLiterals { found: usize },
    /// Value or precision exceeded the representable range.
    Overflow,
}

impl fmt::Display for NormalizeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormalizeError::NoNumericLiteral => f.write_str("no numeric literal in span"),
            NormalizeError::MultipleNumericLiterals { found } => {
                write!(f, "ambiguous span: {found} numeric literals")
            }
            NormalizeError::Overflow => f.write_str("value out of representable range"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for NormalizeError {}

/// A span reduced to exact base value and precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedNumber {
    value: Decimal,
    precision: Decimal,
    scale_group: Option<GroupId>,
    literal: Decimal,
    literal_precision: Decimal,
}

impl NormalizedNumber {
    /// Base value with the scale applied ("1.23 billion" -> 1,230,000,000).
    pub fn value(&self) -> Decimal {
        self.value
    }

    /// Power of ten of the least significant nonzero literal digit, times the
    /// scale factor ("1,230,000" -> 10^4; "1.23 billion" -> 10^7).
    pub fn precision(&self) -> Decimal {
        self.precision
    }

    /// First scale group consumed during normalization, if any.
    pub fn scale_group(&self) -> Option<&GroupId> {
        self.scale_group.as_ref()
    }

    /// The literal as written, before any scale factor.
    pub fn unscaled_value(&self) -> Decimal {
        self.literal
    }

    /// Precision of the bare literal.
    pub fn unscaled_precision(&self) -> Decimal {
        self.literal_precision
    }
}

/// Set of non-scale unit groups found in a span.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UnitSet {
    groups: BTreeSet<GroupId>,
}

impl UnitSet {
    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn contains(&self, id: &GroupId) -> bool {
        self.groups.contains(id)
    }

    pub fn is_subset(&self, other: &UnitSet) -> bool {
        self.groups.is_subset(&other.groups)
    }

    pub fn iter(&self) -> impl Iterator<Item = &GroupId> {
        self.groups.iter()
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }
}

impl FromIterator<GroupId> for UnitSet {
    fn from_iter<T: IntoIterator<Item = GroupId>>(iter: T) -> UnitSet {
        UnitSet { groups: iter.into_iter().collect() }
    }
}

/// Which side of a comparison could not be normalized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchFailure {
    TruthUnparseable(NormalizeError),
    PredictionUnparseable(NormalizeError),
    PrecisionOverflow,
}

impl fmt::Display for MatchFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatchFailure::TruthUnparseable(e) => write!(f, "ground truth unparseable: {e}"),
            MatchFailure::PredictionUnparseable(e) => write!(f, "prediction unparseable: {e}"),
            MatchFailure::PrecisionOverflow => f.write_str("precision comparison overflowed"),
        }
    }
}

/// Outcome of comparing a predicted span against the ground truth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    pub is_numeric_match: bool,
    pub is_unit_match: bool,
    /// Always `is_numeric_match && is_unit_match`.
    pub overall: bool,
    /// Diagnostic reason when either side failed to parse.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<MatchFailure>,
}

impl MatchResult {
    pub fn new(is_numeric_match: bool, is_unit_match: bool) -> MatchResult {
        MatchResult {
            is_numeric_match,
            is_unit_match,
            overall: is_numeric_match && is_unit_match,
            failure: None,
        }
    }

    pub fn failed(reason: MatchFailure) -> MatchResult {
        MatchResult {
            is_numeric_match: false,
            is_unit_match: false,
            overall: false,
            failure: Some(reason),
        }
    }

    pub fn is_full_match(&self) -> bool {
        self.overall
    }
}

/// A numeric literal located in span text; byte offsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Literal {
    pub range: Range<usize>,
    pub value: Decimal,
    /// Digits exceeded the representable mantissa; `value` is meaningless.
    pub overflowed: bool,
}

/// Finds every numeric literal in `text`: digit runs with comma separators
/// and at most one decimal point, plus an attached leading minus sign or
/// tightly wrapping accounting parentheses ("(7.2)" is negative).
pub fn scan_literals(text: &str) -> Vec<Literal> {
    let bytes = text.as_bytes();
    let mut literals = Vec::new();
    let mut i = 0usize;
    while i < bytes.len() {
        let c = bytes[i];
        let starts_number = c.is_ascii_digit()
            || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit));
        if !starts_number {
            i += text[i..].chars().next().map_or(1, |ch| ch.len_utf8());
            continue;
        }
        let start = i;
        let mut seen_dot = false;
        let mut mantissa: i128 = 0;
        let mut frac_digits: i32 = 0;
        let mut overflowed = false;
        while i < bytes.len() {
            let b = bytes[i];
            if b.is_ascii_digit() {
                mantissa = match mantissa
                    .checked_mul(10)
                    .and_then(|m| m.checked_add((b - b'0') as i128))
                {
                    Some(m) => m,
                    None => {
                        overflowed = true;
                        0
                    }
                };
                if seen_dot {
                    frac_digits += 1;
                }
                i += 1;
            } else if b == b',' && !seen_dot && bytes.get(i + 1).is_some_and(u8::is_ascii_digit) {
                i += 1;
            } else if b == b'.' && !seen_dot && bytes.get(i + 1).is_some_and(u8::is_ascii_digit) {
                seen_dot = true;
                i += 1;
            } else {
                break;
            }
        }
        let mut range = start..i;
        let mut negative = false;
        // Leading sign directly attached.
        if let Some(prev) = text[..range.start].chars().next_back() {
            if prev == '-' || prev == '\u{2212}' {
                negative = true;
                range.start -= prev.len_utf8();
            }
        }
        // Accounting parentheses tightly wrapping the literal.
        if !negative
            && text[..range.start].ends_with('(')
            && text[range.end..].starts_with(')')
        {
            negative = true;
            range = range.start - 1..range.end + 1;
        }
        let value = if overflowed {
            Decimal::ZERO
        } else {
            Decimal::new(if negative { -mantissa } else { mantissa }, -frac_digits)
        };
        literals.push(Literal { range, value, overflowed });
    }
    literals
}

/// Normalizes a span to its exact base value and precision.
///
/// Scale words anywhere in the span are consumed (longest alias first) and
/// multiplied into both value and precision; unknown words are left alone.
pub fn normalize_number(
    span_text: &str,
    lexicon: &UnitLexicon,
) -> Result<NormalizedNumber, NormalizeError> {
    let literals = scan_literals(span_text);
    let literal = match literals.len() {
        0 => return Err(NormalizeError::NoNumericLiteral),
        1 => &literals[0],
        n => return Err(NormalizeError::MultipleNumericLiterals { found: n }),
    };
    if literal.overflowed {
        return Err(NormalizeError::Overflow);
    }
    let blocked = [literal.range.clone()];
    let scale_hits = lexicon.find_aliases(span_text, GroupFilter::ScaleOnly, &blocked);
    let mut factor = Decimal::ONE;
    for hit in &scale_hits {
        let f = lexicon.scale_factor(&hit.group).unwrap_or(Decimal::ONE);
        factor = factor.checked_mul(&f).ok_or(NormalizeError::Overflow)?;
    }
    let literal_precision = Decimal::pow10(literal.value.exponent());
    let value = literal.value.checked_mul(&factor).ok_or(NormalizeError::Overflow)?;
    let precision = literal_precision.checked_mul(&factor).ok_or(NormalizeError::Overflow)?;
    Ok(NormalizedNumber {
        value,
        precision,
        scale_group: scale_hits.first().map(|h| h.group.clone()),
        literal: literal.value,
        literal_precision,
    })
}

/// Extracts the set of non-scale unit groups present in a span.
///
/// Positions inside numeric literals are not consumable; scale aliases never
/// appear because they live in scale groups.
pub fn extract_units(span_text: &str, lexicon: &UnitLexicon) -> UnitSet {
    let blocked: Vec<Range<usize>> =
        scan_literals(span_text).into_iter().map(|l| l.range).collect();
    lexicon
        .find_aliases(span_text, GroupFilter::NonScaleOnly, &blocked)
        .into_iter()
        .map(|h| h.group)
        .collect()
}

/// Compares rounded values at the coarser of the two precisions.
pub fn numeric_match(truth: &NormalizedNumber, prediction: &NormalizedNumber) -> Option<bool> {
    let coarser = truth.precision.max(prediction.precision);
    let a = truth.value.div_round_half_away(&coarser)?;
    let b = prediction.value.div_round_half_away(&coarser)?;
    Some(a == b)
}

/// Full comparison of a predicted span against the ground truth.
pub fn match_spans(
    ground_truth: &str,
    prediction: &str,
    lexicon: &UnitLexicon,
) -> MatchResult {
    let truth = match normalize_number(ground_truth, lexicon) {
        Ok(n) => n,
        Err(e) => return MatchResult::failed(MatchFailure::TruthUnparseable(e)),
    };
    let predicted = match normalize_number(prediction, lexicon) {
        Ok(n) => n,
        Err(e) => return MatchResult::failed(MatchFailure::PredictionUnparseable(e)),
    };
    let numeric = match numeric_match(&truth, &predicted) {
        Some(m) => m,
        None => return MatchResult::failed(MatchFailure::PrecisionOverflow),
    };
    let truth_units = extract_units(ground_truth, lexicon);
    let predicted_units = extract_units(prediction, lexicon);
    MatchResult::new(numeric, truth_units.is_subset(&predicted_units))
}
