//! Model gateway: prompt templates, transports, completion cache, and the
//! retrying client that yields schema-validated replies.

pub mod cache;
pub mod client;
pub mod json;
pub mod stub;
pub mod template;
pub mod transport;

pub use cache::{CacheEntry, CacheError, CompletionCache};
pub use client::{GatewayError, ModelClient, QueryOutcome, RawCompletion, MAX_ATTEMPTS};
pub use json::{
    extract_json, validate_answerability, validate_prediction, AnswerabilityReply, ExtractError,
    PredictionReply,
};
pub use stub::{DefaultReply, StubRule, StubTransport};
pub use template::{
    render_answerability_prompt, render_prediction_prompt, render_tables, tag_span, PromptBundle,
    TemplateError, TemplateId,
};
pub use transport::{ChatRequest, HttpTransport, Message, Transport, TransportError};
