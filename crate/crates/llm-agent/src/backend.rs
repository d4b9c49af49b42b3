use crate::config::Role;
use serde::{Deserialize, Serialize};
use std::time::Duration;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BackendError {
    /// Retryable: connection problems, timeouts, rate limits, 5xx.
    #[error("transport error: {0}")]
    Transport(String),
    /// Not retryable: the endpoint answered but not in the expected shape.
    #[error("protocol error: {0}")]
    Protocol(String),
    /// Not retryable: backend configuration problem (missing key, bad URL).
    #[error("backend configuration error: {0}")]
    Config(String),
}

impl BackendError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, BackendError::Transport(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Stub,
    Http,
}

/// Which call of an episode a completion request belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CallKind {
    /// The only call of a Simple episode.
    Single,
    /// First Reasoner call: belief elicitation.
    Belief,
    /// Second Reasoner call: the decision.
    Decision,
}

/// Episode coordinates attached to every completion request. The HTTP
/// backend ignores them; the scripted stub uses them to stay a pure
/// function of (script, coordinates, prompt).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMeta {
    pub cell_id: String,
    pub cell_ordinal: u32,
    pub episode: u32,
    pub role: Role,
    pub call: CallKind,
    pub low: i64,
    pub high: i64,
    pub seed: u64,
}

/// Generation knobs, recorded verbatim in every trace. `None` means the
/// backend default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct GenerationSettings {
    pub temperature: Option<f64>,
    pub max_tokens: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct CompletionRequest<'a> {
    pub model: &'a str,
    pub prompt: &'a str,
    pub settings: &'a GenerationSettings,
    pub meta: &'a EpisodeMeta,
}

/// Raw request/response bodies of one HTTP call, kept for the trace.
/// Secrets never appear here: the API key travels in a header only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HttpExchange {
    pub request_body: String,
    pub response_body: String,
}

#[derive(Debug, Clone)]
pub struct CompletionResponse {
    pub text: String,
    pub tokens_in: Option<u64>,
    pub tokens_out: Option<u64>,
    pub http_exchange: Option<HttpExchange>,
}

/// A chat-completion backend. Implementations must tolerate concurrent
/// in-flight requests.
pub trait LlmBackend: Send + Sync {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, BackendError>;

    fn kind(&self) -> BackendKind;
}

/// Retry transport failures only; semantic failures (unparseable content)
/// are never retried so response distributions stay unbiased.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub base_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 3,
            base_delay_ms: 250,
        }
    }
}

pub fn complete_with_retry(
    backend: &dyn LlmBackend,
    request: &CompletionRequest,
    policy: &RetryPolicy,
) -> Result<CompletionResponse, BackendError> {
    let mut delay = policy.base_delay_ms;
    let mut last_err = None;
    for attempt in 0..policy.attempts.max(1) {
        match backend.complete(request) {
            Ok(response) => return Ok(response),
            Err(e) if e.is_retryable() => {
                log::warn!(
                    "transport failure on {}#{} attempt {}: {e}",
                    request.meta.cell_id,
                    request.meta.episode,
                    attempt + 1
                );
                last_err = Some(e);
                if attempt + 1 < policy.attempts {
                    std::thread::sleep(Duration::from_millis(delay));
                    delay = delay.saturating_mul(2);
                }
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or_else(|| BackendError::Transport("no attempts made".into())))
}

/// Chat-completions HTTP backend (OpenAI-compatible request/response
/// shape). The API key is read from an environment variable at
/// construction and sent as a bearer header; it is never logged.
pub struct HttpChatBackend {
    endpoint: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl HttpChatBackend {
    pub fn from_env(endpoint: impl Into<String>, api_key_env: &str) -> Result<Self, BackendError> {
        let api_key = match std::env::var(api_key_env) {
            Ok(key) if !key.is_empty() => Some(key),
            _ => None,
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| BackendError::Config(e.to_string()))?;
        Ok(Self {
            endpoint: endpoint.into(),
            api_key,
            client,
        })
    }
}

impl LlmBackend for HttpChatBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, BackendError> {
        let mut body = serde_json::json!({
            "model": request.model,
            "messages": [{"role": "user", "content": request.prompt}],
        });
        if let Some(t) = request.settings.temperature {
            body["temperature"] = serde_json::json!(t);
        }
        if let Some(m) = request.settings.max_tokens {
            body["max_tokens"] = serde_json::json!(m);
        }
        let request_body = body.to_string();

        let mut http = self.client.post(&self.endpoint).json(&body);
        if let Some(key) = &self.api_key {
            http = http.bearer_auth(key);
        }
        let response = http
            .send()
            .map_err(|e| BackendError::Transport(e.to_string()))?;

        let status = response.status();
        let response_body = response
            .text()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(BackendError::Transport(format!(
                "status {status}: {response_body}"
            )));
        }
        if !status.is_success() {
            return Err(BackendError::Protocol(format!(
                "status {status}: {response_body}"
            )));
        }

        let parsed: serde_json::Value = serde_json::from_str(&response_body)
            .map_err(|e| BackendError::Protocol(format!("non-JSON body: {e}")))?;
        let text = parsed["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| {
                BackendError::Protocol("missing choices[0].message.content".to_string())
            })?
            .to_string();
        let tokens_in = parsed["usage"]["prompt_tokens"].as_u64();
        let tokens_out = parsed["usage"]["completion_tokens"].as_u64();

        Ok(CompletionResponse {
            text,
            tokens_in,
            tokens_out,
            http_exchange: Some(HttpExchange {
                request_body,
                response_body,
            }),
        })
    }

    fn kind(&self) -> BackendKind {
        BackendKind::Http
    }
}
