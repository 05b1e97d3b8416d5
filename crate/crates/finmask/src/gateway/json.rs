//! Structured-output extraction: locate the first JSON object in a model
//! completion (fenced block preferred, then first balanced bare object) and
//! validate it against the schema the template expects.

use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExtractError {
    /// No parseable JSON object anywhere in the text. Triggers a re-query.
    #[error("completion contains no parseable JSON object")]
    InvalidOutput,
    /// JSON parsed but does not carry the fields the template requires.
    /// Also triggers a re-query.
    #[error("completion JSON violates the expected schema: {0}")]
    Schema(String),
}

/// Finds the first JSON object: a ``` / ```json fenced block if present,
/// otherwise the first balanced `{ … }` region that parses.
pub fn extract_json(raw_text: &str) -> Result<Value, ExtractError> {
    if let Some(obj) = first_fenced_object(raw_text) {
        return Ok(obj);
    }
    first_balanced_object(raw_text).ok_or(ExtractError::InvalidOutput)
}

fn first_fenced_object(text: &str) -> Option<Value> {
    let mut search_from = 0usize;
    while let Some(rel) = text[search_from..].find("```") {
        let fence_start = search_from + rel;
        let after_ticks = fence_start + 3;
        // Skip an optional language tag up to end of line.
        let body_start = {
            let nl = text[after_ticks..].find('\n')?;
            after_ticks + nl + 1
        };
        let lang = text[after_ticks..body_start].trim();
        let body_end = {
            let rel_end = text[body_start..].find("```")?;
            body_start + rel_end
        };
        if lang.is_empty() || lang.eq_ignore_ascii_case("json") {
            // The fenced body may itself carry prose around the object.
            if let Some(obj) = first_balanced_object(&text[body_start..body_end]) {
                return Some(obj);
            }
        }
        search_from = body_end + 3;
    }
    None
}

/// Tries every `{` position in order: find its balanced closing brace
/// (string- and escape-aware) and attempt a parse; the first candidate that
/// parses as an object wins.
fn first_balanced_object(text: &str) -> Option<Value> {
    let bytes = text.as_bytes();
    let mut from = 0usize;
    while let Some(rel) = text[from..].find('{') {
        let start = from + rel;
        if let Some(end) = balanced_end(bytes, start) {
            if let Ok(v) = serde_json::from_str::<Value>(&text[start..=end]) {
                if v.is_object() {
                    return Some(v);
                }
            }
        }
        from = start + 1;
    }
    None
}

/// Index of the `}` that balances the `{` at `start`, honouring JSON string
/// literals and escapes.
fn balanced_end(bytes: &[u8], start: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate().skip(start) {
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

/// Validated fields of an answerability reply for one tagged span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerabilityReply {
    pub label: String,
    pub reasoning: String,
}

/// Validates the answerability schema and pulls the label for `span_text`.
pub fn validate_answerability(value: &Value, span_text: &str) -> Result<AnswerabilityReply, ExtractError> {
    let spans = value
        .get("spans")
        .and_then(Value::as_object)
        .ok_or_else(|| ExtractError::Schema("missing object field \"spans\"".into()))?;
    let label = spans
        .get(span_text)
        .and_then(Value::as_str)
        .ok_or_else(|| ExtractError::Schema(format!("no label for span {span_text:?}")))?;
    if label != "answerable" && label != "unanswerable" {
        return Err(ExtractError::Schema(format!("label {label:?} is not answerable|unanswerable")));
    }
    let reasoning = value.get("reasoning").and_then(Value::as_str).unwrap_or_default();
    Ok(AnswerabilityReply { label: label.to_string(), reasoning: reasoning.to_string() })
}

/// Validated fields of a prediction reply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionReply {
    pub answer: String,
    pub scenario: String,
    pub necessary_metrics: Vec<String>,
    pub references: Vec<String>,
}

/// Validates the prediction schema (the `results` envelope with `answer`,
/// `scenario`, `necessary_metrics`, `reference`).
pub fn validate_prediction(value: &Value) -> Result<PredictionReply, ExtractError> {
    // Tolerate replies that omit the envelope and put fields at top level.
    let results = value.get("results").unwrap_or(value);
    let answer = results
        .get("answer")
        .and_then(Value::as_str)
        .ok_or_else(|| ExtractError::Schema("missing string field \"answer\"".into()))?;
    let scenario = results
        .get("scenario")
        .and_then(Value::as_str)
        .ok_or_else(|| ExtractError::Schema("missing string field \"scenario\"".into()))?;
    if !matches!(scenario, "A" | "B" | "C" | "D") {
        return Err(ExtractError::Schema(format!("scenario {scenario:?} is not one of A-D")));
    }
    let string_list = |field: &str| -> Vec<String> {
        results
            .get(field)
            .and_then(Value::as_array)
            .map(|a| a.iter().filter_map(Value::as_str).map(str::to_string).collect())
            .unwrap_or_default()
    };
    Ok(PredictionReply {
        answer: answer.to_string(),
        scenario: scenario.to_string(),
        necessary_metrics: string_list("necessary_metrics"),
        references: string_list("reference"),
    })
}
