//! Model client: prompt in, validated reply out. Completions are cached by
//! (model, prompt, attempt); sampling temperature is pinned to zero so a
//! cache hit is semantically equivalent to a fresh call.

use std::sync::Arc;

use serde_json::Value;
use thiserror::Error;

use super::cache::{CacheEntry, CacheError, CompletionCache};
use super::json::ExtractError;
use super::transport::{ChatRequest, Message, Transport, TransportError};

/// Maximum structured-output attempts per prompt; a reply that stays
/// malformed after this many tries becomes an abstention or a scored miss,
/// decided by the calling stage.
pub const MAX_ATTEMPTS: u32 = 3;

const TEMPERATURE: f32 = 0.0;

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error("no valid structured reply after {attempts} attempts: {last_error}")]
    Exhausted { attempts: u32, last_error: String },
}

impl GatewayError {
    /// True when the failure is the model's output (retries were already
    /// spent), as opposed to infrastructure problems.
    pub fn is_exhaustion(&self) -> bool {
        matches!(self, GatewayError::Exhausted { .. })
    }
}

/// One completion, with its provenance.
#[derive(Debug, Clone)]
pub struct RawCompletion {
    pub text: String,
    pub attempt: u32,
    pub from_cache: bool,
}

/// A validated reply plus the raw completion it was parsed from.
#[derive(Debug, Clone)]
pub struct QueryOutcome<T> {
    pub reply: T,
    pub attempt: u32,
    pub completion: String,
}

pub struct ModelClient {
    model_name: String,
    transport: Arc<dyn Transport>,
    cache: Option<CompletionCache>,
    max_tokens: Option<u32>,
}

impl ModelClient {
    pub fn new(
        model_name: impl Into<String>,
        transport: Arc<dyn Transport>,
        cache: Option<CompletionCache>,
        max_tokens: Option<u32>,
    ) -> ModelClient {
        ModelClient { model_name: model_name.into(), transport, cache, max_tokens }
    }

    pub fn model_name(&self) -> &str {
        &self.model_name
    }

    pub fn transport_calls(&self) -> u64 {
        self.transport.calls()
    }

    /// Returns the completion for `(prompt, attempt)`, from cache when
    /// available. Network errors are retried in place (they produce no
    /// completion, so the attempt ordinal does not advance); HTTP client
    /// errors abort immediately.
    pub fn complete(&self, prompt: &str, attempt: u32) -> Result<RawCompletion, GatewayError> {
        let key = CompletionCache::key(&self.model_name, prompt, attempt);
        if let Some(cache) = &self.cache {
            if let Some(entry) = cache.get(&key)? {
                return Ok(RawCompletion { text: entry.completion, attempt, from_cache: true });
            }
        }
        let request = ChatRequest {
            model: self.model_name.clone(),
            messages: vec![Message { role: "user".to_string(), content: prompt.to_string() }],
            temperature: TEMPERATURE,
            max_tokens: self.max_tokens,
        };
        let mut last_network = None;
        for _ in 0..3 {
            match self.transport.send(&request) {
                Ok(text) => {
                    if let Some(cache) = &self.cache {
                        cache.put(
                            &key,
                            &CacheEntry {
                                model: self.model_name.clone(),
                                attempt,
                                completion: text.clone(),
                            },
                        )?;
                    }
                    return Ok(RawCompletion { text, attempt, from_cache: false });
                }
                Err(e) if e.is_retryable() => last_network = Some(e),
                Err(e) => return Err(e.into()),
            }
        }
        Err(last_network.expect("loop ran at least once").into())
    }

    /// Runs up to [`MAX_ATTEMPTS`] completions until `validate` accepts the
    /// extracted JSON. Both extraction failures and schema violations are
    /// retried; infrastructure errors abort.
    pub fn query<T>(
        &self,
        prompt: &str,
        validate: impl Fn(&Value) -> Result<T, ExtractError>,
    ) -> Result<QueryOutcome<T>, GatewayError> {
        let mut last_error = String::new();
        for attempt in 1..=MAX_ATTEMPTS {
            let completion = self.complete(prompt, attempt)?;
            match super::json::extract_json(&completion.text).and_then(|v| validate(&v)) {
                Ok(reply) => {
                    return Ok(QueryOutcome { reply, attempt, completion: completion.text })
                }
                Err(e) => last_error = e.to_string(),
            }
        }
        Err(GatewayError::Exhausted { attempts: MAX_ATTEMPTS, last_error })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::stub::{DefaultReply, StubRule, StubTransport};

    fn client_with(stub: StubTransport, cache: Option<CompletionCache>) -> ModelClient {
        ModelClient::new("stub-model", Arc::new(stub), cache, None)
    }

    #[test]
    fn cache_hit_skips_transport() {
        let dir = tempfile::tempdir().unwrap();
        let make = || {
            client_with(
                StubTransport::new(DefaultReply::RejectAll),
                Some(CompletionCache::new(dir.path())),
            )
        };
        let cold = make();
        let first = cold.complete("Sentence: <SPAN>$5 million</SPAN>.", 1).unwrap();
        assert!(!first.from_cache);
        assert_eq!(cold.transport_calls(), 1);

        let warm = make();
        let second = warm.complete("Sentence: <SPAN>$5 million</SPAN>.", 1).unwrap();
        assert!(second.from_cache);
        assert_eq!(second.text, first.text);
        assert_eq!(warm.transport_calls(), 0);
    }

    #[test]
    fn query_retries_malformed_output_then_exhausts() {
        let client = client_with(StubTransport::new(DefaultReply::ProseOnly), None);
        let err = client
            .query("no json here", |v| {
                crate::gateway::json::validate_prediction(v)
            })
            .unwrap_err();
        assert!(err.is_exhaustion());
        // One transport call per attempt: prose is never parseable.
        assert_eq!(client.transport_calls(), u64::from(MAX_ATTEMPTS));
    }

    #[test]
    fn query_succeeds_first_attempt_on_valid_reply() {
        let completion = "```json\n{\"results\": {\"answer\": \"$1\", \"scenario\": \"C\"}}\n```";
        let stub = StubTransport::with_rules(
            DefaultReply::ProseOnly,
            vec![StubRule { fragment: "Sentence:".into(), completion: completion.into() }],
        );
        let client = client_with(stub, None);
        let outcome = client
            .query("Sentence: cash was [MASK].", |v| {
                crate::gateway::json::validate_prediction(v)
            })
            .unwrap();
        assert_eq!(outcome.attempt, 1);
        assert_eq!(outcome.reply.answer, "$1");
        assert_eq!(outcome.reply.scenario, "C");
        assert_eq!(client.transport_calls(), 1);
    }

    #[test]
    fn attempts_use_distinct_cache_entries() {
        let dir = tempfile::tempdir().unwrap();
        let client = client_with(
            StubTransport::new(DefaultReply::ProseOnly),
            Some(CompletionCache::new(dir.path())),
        );
        let _ = client.query("always prose", crate::gateway::json::validate_prediction);
        assert_eq!(client.transport_calls(), u64::from(MAX_ATTEMPTS));
        // Warm rerun replays all three attempts from cache.
        let warm = client_with(
            StubTransport::new(DefaultReply::ProseOnly),
            Some(CompletionCache::new(dir.path())),
        );
        let err = warm.query("always prose", crate::gateway::json::validate_prediction);
        assert!(err.unwrap_err().is_exhaustion());
        assert_eq!(warm.transport_calls(), 0);
    }
}
