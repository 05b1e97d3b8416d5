//! Task construction: mask one numeric span per instance and assemble the
//! context a model will see (every table with its pre-text, plus the
//! sentences immediately before and after the masked one).

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agreement::ConsensusResult;
use crate::ingest::{Sentence, TableBlock};
use crate::score::ScenarioLabel;
use crate::span::{NumericSpan, SpanKind};

/// The literal token substituted for the masked span.
pub const MASK_TOKEN: &str = "[MASK]";

/// Everything a model may consult besides the corrupted sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextSet {
    /// All tables of the document, each with its pre-text.
    pub tables: Vec<TableBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prev_sentence: Option<Sentence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub next_sentence: Option<Sentence>,
}

/// The value-type hint shown to the model; never reveals digits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HintText {
    pub unit_description: String,
}

/// One masked-span benchmark instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskInstance {
    /// Content-addressed: identical inputs give identical ids.
    pub task_id: String,
    pub company_id: String,
    pub filing_date: String,
    pub sentence_index: usize,
    /// Byte range of the masked span in the original sentence.
    pub char_range: Range<usize>,
    pub corrupted_sentence: String,
    pub ground_truth: String,
    pub span_kind: SpanKind,
    pub hint: HintText,
    pub context: ContextSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answerability: Option<ConsensusResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioLabel>,
}

impl TaskInstance {
    /// Puts the ground truth back in place of the mask.
    pub fn restore(&self) -> String {
        self.corrupted_sentence.replacen(MASK_TOKEN, &self.ground_truth, 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TaskError {
    /// The span is not unit- or scale-bearing, or does not belong to the
    /// sentence it claims.
    NotMaskable,
    /// The sentence already contains the mask token.
    MaskCollision,
}

impl fmt::Display for TaskError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskError::NotMaskable => f.write_str("span is not maskable"),
            TaskError::MaskCollision => f.write_str("sentence already contains the mask token"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for TaskError {}

/// Identity and surroundings of the document a task is built from.
#[derive(Debug, Clone, Copy)]
pub struct DocumentContext<'a> {
    pub company_id: &'a str,
    pub filing_date: &'a str,
    pub tables: &'a [TableBlock],
    pub sentences: &'a [Sentence],
}

/// Builds one task instance by masking `span` inside `sentence`.
pub fn build_task(
    doc: &DocumentContext<'_>,
    sentence: &Sentence,
    span: &NumericSpan,
) -> Result<TaskInstance, TaskError> {
    if !span.has_unit_or_scale
        || span.sentence_index != sentence.index
        || sentence.text.get(span.char_range.clone()) != Some(span.surface.as_str())
    {
        return Err(TaskError::NotMaskable);
    }
    if sentence.text.contains(MASK_TOKEN) {
        return Err(TaskError::MaskCollision);
    }
    let mut corrupted = String::with_capacity(sentence.text.len());
    corrupted.push_str(&sentence.text[..span.char_range.start]);
    corrupted.push_str(MASK_TOKEN);
    corrupted.push_str(&sentence.text[span.char_range.end..]);
    let prev_sentence = sentence
        .index
        .checked_sub(1)
        .and_then(|i| doc.sentences.iter().find(|s| s.index == i))
        .cloned();
    let next_sentence = doc.sentences.iter().find(|s| s.index == sentence.index + 1).cloned();
    Ok(TaskInstance {
        task_id: task_id(doc.company_id, sentence.index, &span.char_range),
        company_id: doc.company_id.to_string(),
        filing_date: doc.filing_date.to_string(),
        sentence_index: sentence.index,
        char_range: span.char_range.clone(),
        corrupted_sentence: corrupted,
        ground_truth: span.surface.clone(),
        span_kind: span.kind,
        hint: derive_hint(span),
        context: ContextSet {
            tables: doc.tables.to_vec(),
            prev_sentence,
            next_sentence,
        },
        answerability: None,
        scenario: None,
    })
}

/// Stable content hash of (company, sentence ordinal, span range).
pub fn task_id(company_id: &str, sentence_index: usize, range: &Range<usize>) -> String {
    let mut hasher = Sha256::new();
    hasher.update(company_id.as_bytes());
    hasher.update([0x1f]);
    hasher.update(alloc::format!("{sentence_index}").as_bytes());
    hasher.update([0x1f]);
    hasher.update(alloc::format!("{}-{}", range.start, range.end).as_bytes());
    let digest = hasher.finalize();
    hex::encode(&digest[..8])
}

/// Value-type hint from the span kind. A span carrying a per-share unit is
/// hinted as per-share even when a currency mark classified it as money.
pub fn derive_hint(span: &NumericSpan) -> HintText {
    let lowered = span.surface.to_lowercase();
    let unit_description = if lowered.contains("per share") {
        "as a per-share amount"
    } else {
        match span.kind {
            SpanKind::Percent => "as a percentage",
            SpanKind::Money => "as an absolute amount",
            SpanKind::Cardinal | SpanKind::Quantity => "as a numeric value with its unit",
        }
    };
    HintText { unit_description: unit_description.to_string() }
}

/// Uniform sample (without replacement) of sentences that contain at least
/// one maskable span. Returns sentence indices in ascending order.
///
/// The draw is a partial Fisher-Yates shuffle over the eligible indices,
/// driven by ChaCha8 seeded from `seed`, so a fixed seed gives the same
/// subset on every platform. The modulo step is deliberately simple; the
/// discipline here is determinism, not perfect uniformity.
pub fn sample_sentences(
    sentences: &[Sentence],
    spans: &[NumericSpan],
    n: usize,
    seed: u64,
) -> Vec<usize> {
    let mut eligible: Vec<usize> = sentences
        .iter()
        .map(|s| s.index)
        .filter(|i| spans.iter().any(|sp| sp.sentence_index == *i && sp.has_unit_or_scale))
        .collect();
    eligible.sort_unstable();
    eligible.dedup();
    let take = n.min(eligible.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..take {
        let j = i + (rng.next_u64() % (eligible.len() - i) as u64) as usize;
        eligible.swap(i, j);
    }
    eligible.truncate(take);
    eligible.sort_unstable();
    eligible
}
