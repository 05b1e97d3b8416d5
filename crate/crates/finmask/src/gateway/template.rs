//! Prompt templates and rendering. The two templates are fixed text with
//! named placeholders; rendering substitutes every placeholder exactly once
//! and verifies none remain, so a rendered prompt differs from its template
//! only at placeholder sites.

use finmask_core::ingest::TableBlock;
use finmask_core::task::TaskInstance;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Answerability annotation prompt. The braces in the output-format block
/// are literal text, not placeholders; `{span}` likewise stays literal (it
/// names the tagged spans for the model).
pub const ANSWERABILITY_TEMPLATE: &str = r#"You are given the following tables from a 10-K annual report: {tables_with_pretext}
Filing date: {filing_date}
Sentence: {pre_sentence} {sentence} {post_sentence}
Your task:
For each highlighted span substring (shown as <SPAN>{span}</SPAN>) in the sentence, determine if the span is:
- unanswerable: Spans that
    - do not represent some type of numeric financial data (e.g., phone numbers, pincodes, or any other noise), or
    - the span cannot be derived from or supported by the table by any method.
- answerable: Spans that
    - can be directly found in the table, or
    - can be derived through some calculations (such as addition, subtraction, multiplication, or division), or
    - can be inferred via deeper reasoning involving multiple table entries
Instructions:
    1. Carefully analyze every given table and the given sentence.
    2. For each <SPAN>{span}</SPAN>, in the sentence:
            - Label the {span} as answerable or unanswerable
    3. Provide a concise explanation for your reasoning.
Output Format:
```json
{
  "reasoning": <A detailed explanation for each highlighted
  span in the sentence - if it is  answerable: how it can
  be matched, derived, or inferred from the table,
  or else if it  is unanswerable: a brief reason why.>
  "spans": {
    "<span1>" : "answerable" | "unanswerable",
    ...
  }
}
```"#;

/// Masked-value prediction prompt.
pub const PREDICTION_TEMPLATE: &str = r#"You are a financial analyst.
Your task is to fill in the masked blank in a sentence using the provided financial data tables.
Hint: The masked content is a single positive value that fits the context {unit_description}.
**Instructions:**
    1. **Analyze the Request:** Carefully read the sentence and examine the provided tables to understand what information is needed to fill in the blank.
    2. **Reason Step-by-Step:** Before providing the final answer, write out your reasoning process. Explain how you will find the value, including any calculations.
        - If you are extracting a value, mention which table and cell you are getting it from.
        - If you are performing a calculation, show the formula and the values you are using.
    3. **Categorize Your Reasoning:** Based on your reasoning, classify it into one of the following scenarios:
        - **A. Direct Lookup:** The value is directly extracted from a single cell in a table.
        - **B. Simple Calculation (Single Metric):** The result is calculated from a single metric across different time periods, categories, or rows (e.g., calculating a year-over-year change).
        - **C. Simple Calculation (Two Metrics):** The result is calculated using two different metrics (e.g., calculating a ratio).
        - **D. Complex Calculation:** The reasoning involves more than two metrics or multiple complex steps.
    4. **Format the Final Answer:** After your reasoning, provide the final answer in a JSON block with the following structure.
**JSON Output Format:**
```json
{
"results": {
    "answer": "<The calculated or extracted value>",
    "scenario": "<A, B, C, or D>",
    "necessary_metrics": ["<metric_name_1>",
                          "<metric_name_2>", ...],
    "reference": ["<table_identifier_1>",
                  "<table_identifier_2>", ...]
   }
}
```
**Field Explanations:**
- `answer`: The value to fill in the masked blank. Format it professionally (i.e., with rounding and units, etc.).
- `scenario`: One of "A", "B", "C", or "D" based on your reasoning.
- `necessary_metrics`: A list of all metric names from the tables required to derive the answer.
- `reference`: A list of all table identifiers for the tables used.
**Inputs:**
**Tables:** {tables_with_pretext}
**Sentence:** {pre_sentence} {sentence} {post_sentence}"#;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    Answerability,
    Prediction,
}

/// A fully rendered prompt plus the values that filled it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub template_id: TemplateId,
    pub rendered_text: String,
    pub placeholders_filled: BTreeMap<String, String>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TemplateError {
    #[error("placeholder {{{0}}} is not used by this template")]
    UnknownPlaceholder(String),
    #[error("placeholder {{{0}}} was left unresolved")]
    Unresolved(String),
}

/// Placeholders each template must resolve. `{span}` is intentionally
/// absent: it is literal prose in the answerability template.
const ANSWERABILITY_PLACEHOLDERS: [&str; 5] =
    ["tables_with_pretext", "filing_date", "pre_sentence", "sentence", "post_sentence"];
const PREDICTION_PLACEHOLDERS: [&str; 5] =
    ["unit_description", "tables_with_pretext", "pre_sentence", "sentence", "post_sentence"];

fn fill(
    template_id: TemplateId,
    template: &str,
    placeholders: &[&str],
    values: &BTreeMap<String, String>,
) -> Result<PromptBundle, TemplateError> {
    for key in values.keys() {
        if !placeholders.contains(&key.as_str()) {
            return Err(TemplateError::UnknownPlaceholder(key.clone()));
        }
    }
    let mut rendered = template.to_string();
    for name in placeholders {
        let needle = format!("{{{name}}}");
        match values.get(*name) {
            Some(value) => rendered = rendered.replace(&needle, value),
            None => return Err(TemplateError::Unresolved((*name).to_string())),
        }
    }
    // `{span}` is literal; every other known placeholder must be gone.
    for name in placeholders {
        let needle = format!("{{{name}}}");
        if rendered.contains(&needle) {
            return Err(TemplateError::Unresolved((*name).to_string()));
        }
    }
    Ok(PromptBundle { template_id, rendered_text: rendered, placeholders_filled: values.clone() })
}

/// Renders every table with its pre-text in a stable plain-text layout:
/// a `[table_id] pre_text` line followed by the grid in pipe form, tables
/// separated by blank lines. Zero tables render as an empty block.
pub fn render_tables(tables: &[TableBlock]) -> String {
    let mut out = String::new();
    for (i, t) in tables.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        out.push('[');
        out.push_str(&t.table_id);
        out.push(']');
        if !t.pre_text.is_empty() {
            out.push(' ');
            out.push_str(&t.pre_text);
        }
        for row in &t.grid {
            out.push_str("\n| ");
            out.push_str(&row.join(" | "));
            out.push_str(" |");
        }
    }
    out
}

/// Renders the answerability prompt for one tagged sentence.
pub fn render_answerability_prompt(
    tables_with_pretext: &str,
    filing_date: &str,
    pre_sentence: &str,
    sentence_with_span_tags: &str,
    post_sentence: &str,
) -> Result<PromptBundle, TemplateError> {
    let mut values = BTreeMap::new();
    values.insert("tables_with_pretext".to_string(), tables_with_pretext.to_string());
    values.insert("filing_date".to_string(), filing_date.to_string());
    values.insert("pre_sentence".to_string(), pre_sentence.to_string());
    values.insert("sentence".to_string(), sentence_with_span_tags.to_string());
    values.insert("post_sentence".to_string(), post_sentence.to_string());
    fill(TemplateId::Answerability, ANSWERABILITY_TEMPLATE, &ANSWERABILITY_PLACEHOLDERS, &values)
}

/// Renders the prediction prompt for one task instance.
pub fn render_prediction_prompt(task: &TaskInstance) -> Result<PromptBundle, TemplateError> {
    let mut values = BTreeMap::new();
    values.insert("unit_description".to_string(), task.hint.unit_description.clone());
    values.insert("tables_with_pretext".to_string(), render_tables(&task.context.tables));
    values.insert(
        "pre_sentence".to_string(),
        task.context.prev_sentence.as_ref().map(|s| s.text.clone()).unwrap_or_default(),
    );
    values.insert("sentence".to_string(), task.corrupted_sentence.clone());
    values.insert(
        "post_sentence".to_string(),
        task.context.next_sentence.as_ref().map(|s| s.text.clone()).unwrap_or_default(),
    );
    fill(TemplateId::Prediction, PREDICTION_TEMPLATE, &PREDICTION_PLACEHOLDERS, &values)
}

/// Wraps the ground truth back into the sentence inside `<SPAN>` tags, the
/// form the answerability template asks about.
pub fn tag_span(task: &TaskInstance) -> String {
    task.corrupted_sentence.replacen(
        finmask_core::task::MASK_TOKEN,
        &format!("<SPAN>{}</SPAN>", task.ground_truth),
        1,
    )
}
