//! Transport abstraction under the model client: one call = one completion
//! request. Implementations count their calls so tests can assert the
//! zero-network property of warm-cache runs.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A chat-completion style request. Temperature is pinned by the client
/// layer and only carried here.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<Message>,
    pub temperature: f32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: String,
    pub content: String,
}

#[derive(Debug, Error)]
pub enum TransportError {
    /// Network-level failure; retryable.
    #[error("network error: {0}")]
    Network(String),
    /// HTTP 4xx; not retryable.
    #[error("client error (HTTP {status}): {message}")]
    Client { status: u16, message: String },
    /// Malformed completion payload; not retryable.
    #[error("malformed response: {0}")]
    BadResponse(String),
}

impl TransportError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, TransportError::Network(_))
    }
}

pub trait Transport: Send + Sync {
    /// Performs one completion call and returns the completion text.
    fn send(&self, request: &ChatRequest) -> Result<String, TransportError>;
    /// Number of calls performed so far (cache hits never reach here).
    fn calls(&self) -> u64;
}

/// Token-bucket rate limiter; `rate_per_sec == 0` disables limiting.
pub struct TokenBucket {
    rate_per_sec: f64,
    capacity: f64,
    state: Mutex<BucketState>,
}

struct BucketState {
    tokens: f64,
    last_refill: Instant,
}

impl TokenBucket {
    pub fn new(rate_per_sec: f64) -> TokenBucket {
        let capacity = rate_per_sec.max(1.0);
        TokenBucket {
            rate_per_sec,
            capacity,
            state: Mutex::new(BucketState { tokens: capacity, last_refill: Instant::now() }),
        }
    }

    /// Blocks until a token is available.
    pub fn acquire(&self) {
        if self.rate_per_sec <= 0.0 {
            return;
        }
        loop {
            let wait = {
                let mut s = self.state.lock().expect("token bucket poisoned");
                let now = Instant::now();
                let elapsed = now.duration_since(s.last_refill).as_secs_f64();
                s.tokens = (s.tokens + elapsed * self.rate_per_sec).min(self.capacity);
                s.last_refill = now;
                if s.tokens >= 1.0 {
                    s.tokens -= 1.0;
                    None
                } else {
                    Some(Duration::from_secs_f64((1.0 - s.tokens) / self.rate_per_sec))
                }
            };
            match wait {
                None => return,
                Some(d) => std::thread::sleep(d),
            }
        }
    }
}

/// HTTP transport for chat-completion style endpoints
/// (request: model/messages/temperature; response: choices[0].message.content).
pub struct HttpTransport {
    endpoint: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
    bucket: TokenBucket,
    calls: AtomicU64,
}

impl HttpTransport {
    /// `api_key_env` names an environment variable holding the bearer token;
    /// secrets never appear in config files.
    pub fn new(
        endpoint: String,
        api_key_env: Option<&str>,
        rate_limit_per_sec: f64,
        timeout: Duration,
    ) -> Result<HttpTransport, TransportError> {
        let api_key = match api_key_env {
            None => None,
            Some(var) => Some(std::env::var(var).map_err(|_| {
                TransportError::Client {
                    status: 401,
                    message: format!("environment variable {var} is not set"),
                }
            })?),
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| TransportError::Network(e.to_string()))?;
        Ok(HttpTransport {
            endpoint,
            api_key,
            client,
            bucket: TokenBucket::new(rate_limit_per_sec),
            calls: AtomicU64::new(0),
        })
    }
}

#[derive(Debug, Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Debug, Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Debug, Deserialize)]
struct ChoiceMessage {
    content: String,
}

impl Transport for HttpTransport {
    fn send(&self, request: &ChatRequest) -> Result<String, TransportError> {
        self.bucket.acquire();
        self.calls.fetch_add(1, Ordering::Relaxed);
        let mut builder = self.client.post(&self.endpoint).json(request);
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        let response = builder.send().map_err(|e| TransportError::Network(e.to_string()))?;
        let status = response.status();
        if status.is_client_error() {
            return Err(TransportError::Client {
                status: status.as_u16(),
                message: response.text().unwrap_or_default(),
            });
        }
        if !status.is_success() {
            return Err(TransportError::Network(format!("HTTP {status}")));
        }
        let parsed: ChatResponse = response
            .json()
            .map_err(|e| TransportError::BadResponse(e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| TransportError::BadResponse("response has no choices".into()))
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}
