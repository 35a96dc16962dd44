use std::collections::VecDeque;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub query_id: String,
    pub prompt: String,
    pub context: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationResponse {
    pub text: String,
    pub tokens_in: u64,
    pub tokens_out: u64,
    /// Optional self-reported confidence in `[0, 1]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Timeout,
    RateLimited,
    Server,
    Transport,
    Auth,
    BadRequest,
    BadResponse,
}

impl ErrorKind {
    /// Transient failures are retried on the same provider; the rest move on
    /// to the next provider in the chain.
    pub fn is_retryable(self) -> bool {
        matches!(self, Self::Timeout | Self::RateLimited | Self::Server | Self::Transport)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq, Serialize, Deserialize)]
#[error("{kind:?}: {message}")]
pub struct ProviderError {
    pub kind: ErrorKind,
    pub message: String,
}

impl ProviderError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self { kind, message: message.into() }
    }
}

pub trait GenerationProvider: Send + Sync {
    fn provider_id(&self) -> &str;
    fn default_model(&self) -> &str;
    fn generate(&self, model_id: &str, request: &GenerationRequest) -> Result<GenerationResponse, ProviderError>;
}

#[derive(Debug, Clone, PartialEq)]
pub enum MockStep {
    Succeed { text: String, tokens_in: u64, tokens_out: u64 },
    Fail(ErrorKind),
    /// Block for the given time, then answer with the default response.
    Delay(Duration),
}

/// Scriptable provider. Each call consumes one step; once the script is
/// exhausted it answers with [`MockProvider::default_answer`].
#[derive(Debug)]
pub struct MockProvider {
    id: String,
    model: String,
    script: Mutex<VecDeque<MockStep>>,
    calls: AtomicUsize,
}

impl MockProvider {
    pub fn new(id: impl Into<String>) -> Self {
        let id = id.into();
        Self { model: format!("{id}-mock"), id, script: Mutex::new(VecDeque::new()), calls: AtomicUsize::new(0) }
    }

    pub fn with_script(self, steps: impl IntoIterator<Item = MockStep>) -> Self {
        self.script.lock().extend(steps);
        self
    }

    pub fn push(&self, step: MockStep) {
        self.script.lock().push_back(step);
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    /// First sentence of up to two context passages, or a fixed refusal when
    /// there is no context.
    pub fn default_answer(request: &GenerationRequest) -> GenerationResponse {
        let sentences: Vec<&str> = request
            .context
            .iter()
            .take(2)
            .filter_map(|c| {
                // first sentence of the first line that reads like prose, skipping headings
                let firsts = c.lines().map(|l| {
                    let l = l.trim();
                    l[..l.find('.').map_or(l.len(), |i| i + 1)].trim()
                });
                let mut firsts = firsts.filter(|s| !s.is_empty()).peekable();
                let fallback = firsts.peek().copied();
                firsts.find(|s| s.split_whitespace().count() >= 4).or(fallback)
            })
            .collect();
        let text = if sentences.is_empty() {
            "No supporting context was retrieved for this question.".to_string()
        } else {
            sentences.join(" ")
        };
        let words = |s: &str| s.split_whitespace().count() as u64;
        GenerationResponse {
            tokens_in: words(&request.prompt) + request.context.iter().map(|c| words(c)).sum::<u64>(),
            tokens_out: words(&text),
            text,
            confidence: None,
        }
    }
}

impl GenerationProvider for MockProvider {
    fn provider_id(&self) -> &str {
        &self.id
    }

    fn default_model(&self) -> &str {
        &self.model
    }

    fn generate(&self, _model_id: &str, request: &GenerationRequest) -> Result<GenerationResponse, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let step = self.script.lock().pop_front();
        match step {
            None => Ok(Self::default_answer(request)),
            Some(MockStep::Succeed { text, tokens_in, tokens_out }) => {
                Ok(GenerationResponse { text, tokens_in, tokens_out, confidence: None })
            }
            Some(MockStep::Fail(kind)) => Err(ProviderError::new(kind, format!("scripted {kind:?}"))),
            Some(MockStep::Delay(d)) => {
                std::thread::sleep(d);
                Ok(Self::default_answer(request))
            }
        }
    }
}

/// JSON-over-HTTP provider: POST `{model_id, prompt, context}` and expect
/// `{text, tokens_in, tokens_out, confidence?}`.
pub struct HttpGenerationProvider {
    id: String,
    model: String,
    endpoint: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model_id: &'a str,
    prompt: &'a str,
    context: &'a [String],
}

impl HttpGenerationProvider {
    pub fn new(
        id: impl Into<String>,
        model: impl Into<String>,
        endpoint: impl Into<String>,
        api_key: Option<String>,
        timeout: Duration,
    ) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .new_agent();
        Self { id: id.into(), model: model.into(), endpoint: endpoint.into(), api_key, agent }
    }
}

impl GenerationProvider for HttpGenerationProvider {
    fn provider_id(&self) -> &str {
        &self.id
    }

    fn default_model(&self) -> &str {
        &self.model
    }

    fn generate(&self, model_id: &str, request: &GenerationRequest) -> Result<GenerationResponse, ProviderError> {
        let body = WireRequest { model_id, prompt: &request.prompt, context: &request.context };
        let mut req = self.agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req.send_json(&body).map_err(|e| match e {
            ureq::Error::Timeout(_) => ProviderError::new(ErrorKind::Timeout, e.to_string()),
            other => ProviderError::new(ErrorKind::Transport, other.to_string()),
        })?;
        let status = resp.status().as_u16();
        let kind = match status {
            200..=299 => None,
            401 | 403 => Some(ErrorKind::Auth),
            408 => Some(ErrorKind::Timeout),
            429 => Some(ErrorKind::RateLimited),
            400..=499 => Some(ErrorKind::BadRequest),
            _ => Some(ErrorKind::Server),
        };
        if let Some(kind) = kind {
            return Err(ProviderError::new(kind, format!("HTTP {status}")));
        }
        resp.body_mut()
            .read_json::<GenerationResponse>()
            .map_err(|e| ProviderError::new(ErrorKind::BadResponse, e.to_string()))
    }
}
