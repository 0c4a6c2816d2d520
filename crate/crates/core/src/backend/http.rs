//! Client for OpenAI-compatible `/v1/completions` servers.

use std::fmt;
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{truncate_at_stop, Backend, BackendError, CompletionRequest, CompletionResponse, Finish, TokenSource};
use crate::corpus::Tokenizer;

const BODY_EXCERPT: usize = 512;
const MAX_BACKOFF: Duration = Duration::from_secs(60);

/// Wire shape of the request body. Field order is part of the contract.
#[derive(Debug, Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    prompt: &'a str,
    max_tokens: usize,
    temperature: f64,
    stop: &'a [String],
}

#[derive(Debug, Deserialize)]
struct WireResponse {
    #[serde(default)]
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<WireUsage>,
}

#[derive(Debug, Deserialize)]
struct WireChoice {
    #[serde(default)]
    text: String,
    #[serde(default)]
    finish_reason: Option<String>,
    // vLLM reports the matched stop string here
    #[serde(default)]
    stop_reason: Option<serde_json::Value>,
}

#[derive(Debug, Deserialize)]
struct WireUsage {
    #[serde(default)]
    completion_tokens: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 3,
            initial_backoff: Duration::from_millis(500),
        }
    }
}

impl RetryPolicy {
    fn backoff(&self, attempt: u32) -> Duration {
        self.initial_backoff
            .saturating_mul(1u32 << attempt.min(16))
            .min(MAX_BACKOFF)
    }
}

pub struct HttpBackend {
    url: String,
    model: String,
    api_key: Option<String>,
    agent: ureq::Agent,
    retry: RetryPolicy,
    tokenizer: Arc<dyn Tokenizer>,
}

impl fmt::Debug for HttpBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HttpBackend")
            .field("url", &self.url)
            .field("model", &self.model)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .field("retry", &self.retry)
            .finish()
    }
}

impl HttpBackend {
    pub fn new(
        endpoint: &str,
        model: &str,
        api_key: Option<String>,
        timeout: Duration,
        retry: RetryPolicy,
        tokenizer: Arc<dyn Tokenizer>,
    ) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(timeout).build();
        Self {
            url: format!("{}/v1/completions", endpoint.trim_end_matches('/')),
            model: model.to_string(),
            api_key,
            agent,
            retry,
            tokenizer,
        }
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    fn attempt(&self, request: &CompletionRequest) -> Result<CompletionResponse, BackendError> {
        let body = WireRequest {
            model: &self.model,
            prompt: &request.prompt,
            max_tokens: request.max_tokens,
            temperature: request.temperature,
            stop: &request.stop,
        };
        let payload = serde_json::to_string(&body).map_err(|e| BackendError::InvalidRequest(e.to_string()))?;
        let mut call = self.agent.post(&self.url).set("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            call = call.set("Authorization", &format!("Bearer {key}"));
        }
        let response = match call.send_string(&payload) {
            Ok(r) => r,
            Err(ureq::Error::Status(429, r)) => {
                let retry_after = r
                    .header("Retry-After")
                    .and_then(|v| v.trim().parse::<f64>().ok())
                    .filter(|s| s.is_finite() && *s >= 0.0)
                    .map(Duration::from_secs_f64);
                return Err(BackendError::RateLimited { retry_after });
            }
            Err(ureq::Error::Status(status, r)) => {
                let text = r.into_string().unwrap_or_default();
                return Err(BackendError::Status {
                    status,
                    body: excerpt(&text),
                });
            }
            Err(ureq::Error::Transport(t)) => {
                let retryable = !matches!(t.kind(), ureq::ErrorKind::InvalidUrl | ureq::ErrorKind::UnknownScheme);
                return Err(BackendError::Transport {
                    message: t.to_string(),
                    retryable,
                });
            }
        };
        let text = response.into_string().map_err(|e| BackendError::Transport {
            message: e.to_string(),
            retryable: true,
        })?;
        let wire: WireResponse =
            serde_json::from_str(&text).map_err(|e| BackendError::Protocol(format!("{e}: {}", excerpt(&text))))?;
        self.decode(wire, request)
    }

    fn decode(&self, wire: WireResponse, request: &CompletionRequest) -> Result<CompletionResponse, BackendError> {
        let reported = wire.usage.and_then(|u| u.completion_tokens);
        let choice = wire
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| BackendError::Protocol("response has no choices".into()))?;
        let mut text = choice.text;
        let mut finish = match choice.finish_reason.as_deref() {
            Some("length") => Finish::Length,
            Some("stop") => match choice.stop_reason {
                Some(serde_json::Value::String(s)) => Finish::Stop(s),
                Some(serde_json::Value::Null) | None => match request.stop.first() {
                    Some(s) => Finish::Stop(s.clone()),
                    None => Finish::End,
                },
                Some(_) => Finish::End,
            },
            _ => Finish::End,
        };
        // servers that ignore `stop` still must not leak stop strings
        if let Some((at, stop)) = truncate_at_stop(&text, &request.stop) {
            text.truncate(at);
            finish = Finish::Stop(stop.to_string());
        }
        let (tokens_generated, token_source) = match reported {
            Some(n) => (n, TokenSource::Reported),
            None => (self.tokenizer.count_tokens(&text), TokenSource::Estimated),
        };
        Ok(CompletionResponse {
            text,
            finish,
            tokens_generated,
            token_source,
        })
    }
}

fn excerpt(text: &str) -> String {
    match text.char_indices().nth(BODY_EXCERPT) {
        Some((at, _)) => format!("{}...", &text[..at]),
        None => text.to_string(),
    }
}

impl Backend for HttpBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, BackendError> {
        request.validate()?;
        let mut attempt = 0;
        loop {
            match self.attempt(request) {
                Ok(r) => return Ok(r),
                Err(e) if e.is_retryable() && attempt < self.retry.max_retries => {
                    let wait = match &e {
                        BackendError::RateLimited { retry_after: Some(d) } => (*d).min(MAX_BACKOFF),
                        _ => self.retry.backoff(attempt),
                    };
                    log::warn!("request to {} failed ({e}); retrying in {:?}", self.url, wait);
                    thread::sleep(wait);
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
}
