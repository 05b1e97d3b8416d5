//! Deterministic in-process transport for tests and offline pipeline runs.
//! Replies are a pure function of the prompt text, so reruns are
//! reproducible regardless of call order or concurrency.

use std::sync::atomic::{AtomicU64, Ordering};

use finmask_core::task::TaskInstance;
use serde_json::json;

use super::transport::{ChatRequest, Transport, TransportError};

/// Literal placeholder mention that appears in the answerability
/// instructions; the real tagged span is the one whose inner text differs.
const LITERAL_SPAN_MENTION: &str = "{span}";

/// Fixed reply for a prompt containing `fragment`. First match wins.
#[derive(Debug, Clone)]
pub struct StubRule {
    pub fragment: String,
    pub completion: String,
}

/// Reply used when no rule matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefaultReply {
    /// Label every tagged span in the prompt `answerable`.
    AnswerAll,
    /// Label every tagged span in the prompt `unanswerable`.
    RejectAll,
    /// Plain prose without any JSON; drives retry exhaustion.
    ProseOnly,
}

pub struct StubTransport {
    rules: Vec<StubRule>,
    default: DefaultReply,
    calls: AtomicU64,
}

impl StubTransport {
    pub fn new(default: DefaultReply) -> StubTransport {
        StubTransport { rules: Vec::new(), default, calls: AtomicU64::new(0) }
    }

    pub fn with_rules(default: DefaultReply, rules: Vec<StubRule>) -> StubTransport {
        StubTransport { rules, default, calls: AtomicU64::new(0) }
    }

    /// Builds an evaluation stub that echoes each task's ground truth. The
    /// rule fragment is the corrupted sentence (it contains the mask token,
    /// so it can only match that task's prediction prompt). Perturbations
    /// are keyed on the task's position in `tasks`, never on call order:
    /// every `wrong_every`-th answer gets its digits rotated and every
    /// `drop_scale_every`-th loses its scale word, so the stub produces a
    /// deterministic mixture of correct, wrong, and scale-confused replies.
    pub fn echo_from_tasks(
        tasks: &[TaskInstance],
        wrong_every: Option<u64>,
        drop_scale_every: Option<u64>,
    ) -> StubTransport {
        let scenarios = ["A", "B", "C", "D"];
        let rules = tasks
            .iter()
            .enumerate()
            .map(|(i, task)| {
                let ordinal = i as u64 + 1;
                let hits = |every: Option<u64>| every.is_some_and(|n| n > 0 && ordinal.is_multiple_of(n));
                let answer = if hits(wrong_every) {
                    rotate_digits(&task.ground_truth)
                } else if hits(drop_scale_every) {
                    drop_scale_word(&task.ground_truth)
                } else {
                    task.ground_truth.clone()
                };
                let body = json!({
                    "results": {
                        "answer": answer,
                        "scenario": scenarios[i % scenarios.len()],
                        "necessary_metrics": [],
                        "reference": [],
                    }
                });
                StubRule {
                    fragment: task.corrupted_sentence.clone(),
                    completion: format!("```json\n{body:#}\n```"),
                }
            })
            .collect();
        StubTransport::with_rules(DefaultReply::ProseOnly, rules)
    }

    fn default_completion(&self, prompt: &str) -> String {
        match self.default {
            DefaultReply::ProseOnly => {
                "I reviewed the filing but cannot provide a structured reply.".to_string()
            }
            DefaultReply::AnswerAll | DefaultReply::RejectAll => {
                let label = if self.default == DefaultReply::AnswerAll {
                    "answerable"
                } else {
                    "unanswerable"
                };
                let mut spans = serde_json::Map::new();
                for inner in tagged_spans(prompt) {
                    spans.insert(inner.to_string(), json!(label));
                }
                let body = json!({"reasoning": "deterministic stub verdict", "spans": spans});
                format!("```json\n{body:#}\n```")
            }
        }
    }
}

impl Transport for StubTransport {
    fn send(&self, request: &ChatRequest) -> Result<String, TransportError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let prompt = request
            .messages
            .last()
            .map(|m| m.content.as_str())
            .ok_or_else(|| TransportError::BadResponse("empty message list".into()))?;
        for rule in &self.rules {
            if prompt.contains(&rule.fragment) {
                return Ok(rule.completion.clone());
            }
        }
        Ok(self.default_completion(prompt))
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

/// Inner texts of `<SPAN>...</SPAN>` pairs, skipping the literal
/// instruction mention.
fn tagged_spans(prompt: &str) -> Vec<&str> {
    let mut found = Vec::new();
    let mut rest = prompt;
    while let Some(open) = rest.find("<SPAN>") {
        let after = &rest[open + "<SPAN>".len()..];
        match after.find("</SPAN>") {
            None => break,
            Some(close) => {
                let inner = &after[..close];
                if inner != LITERAL_SPAN_MENTION {
                    found.push(inner);
                }
                rest = &after[close + "</SPAN>".len()..];
            }
        }
    }
    found
}

/// Maps every ASCII digit d to (d+1) mod 10, guaranteeing a different
/// numeric value for any span that contains a digit.
fn rotate_digits(text: &str) -> String {
    text.chars()
        .map(|c| match c {
            '0'..='8' => char::from(c as u8 + 1),
            '9' => '0',
            other => other,
        })
        .collect()
}

/// Removes the first scale word so the value is off by a power of ten while
/// the leading digits still agree.
fn drop_scale_word(text: &str) -> String {
    for word in [" trillion", " billion", " million", " thousand"] {
        if let Some(pos) = text.find(word) {
            let mut out = String::with_capacity(text.len());
            out.push_str(&text[..pos]);
            out.push_str(&text[pos + word.len()..]);
            return out;
        }
    }
    text.to_string()
}
