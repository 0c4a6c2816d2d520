//! Segment-level text completion backends.

use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

mod config;
pub mod http;
pub mod mock;

pub use config::{BackendConfig, BackendKind};
pub use http::HttpBackend;
pub use mock::{MockAction, MockBackend, MockRule};

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionRequest {
    pub prompt: String,
    pub stop: Vec<String>,
    pub max_tokens: usize,
    pub temperature: f64,
}

impl CompletionRequest {
    pub fn validate(&self) -> Result<(), BackendError> {
        if self.max_tokens == 0 {
            return Err(BackendError::InvalidRequest("max_tokens must be at least 1".into()));
        }
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(BackendError::InvalidRequest("temperature must be non-negative".into()));
        }
        if self.stop.iter().any(String::is_empty) {
            return Err(BackendError::InvalidRequest("empty stop string".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Finish {
    /// Generation hit this stop string, which is not part of the text.
    Stop(String),
    Length,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenSource {
    /// Counts come from the server's usage report.
    Reported,
    /// Counts come from the local tokenizer.
    Estimated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletionResponse {
    pub text: String,
    pub finish: Finish,
    pub tokens_generated: usize,
    pub token_source: TokenSource,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BackendError {
    #[error("transport error: {message}")]
    Transport { message: String, retryable: bool },
    #[error("rate limited{}", retry_after.map(|d| format!(" (retry after {:.1}s)", d.as_secs_f64())).unwrap_or_default())]
    RateLimited { retry_after: Option<Duration> },
    #[error("backend returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed backend response: {0}")]
    Protocol(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("invalid mock pattern: {0}")]
    InvalidPattern(String),
    #[error("backend configuration: {0}")]
    Config(String),
}

impl BackendError {
    pub fn is_retryable(&self) -> bool {
        match self {
            BackendError::Transport { retryable, .. } => *retryable,
            BackendError::RateLimited { .. } => true,
            BackendError::Status { status, .. } => *status >= 500,
            _ => false,
        }
    }
}

pub trait Backend: Send + Sync {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, BackendError>;
}

impl fmt::Debug for dyn Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("dyn Backend")
    }
}

impl<B: Backend + ?Sized> Backend for std::sync::Arc<B> {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, BackendError> {
        (**self).complete(request)
    }
}

impl<B: Backend + ?Sized> Backend for &B {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, BackendError> {
        (**self).complete(request)
    }
}

/// Cuts `text` before the earliest occurrence of any stop string.
pub fn truncate_at_stop<'a>(text: &str, stops: &'a [String]) -> Option<(usize, &'a str)> {
    stops
        .iter()
        .filter_map(|s| text.find(s.as_str()).map(|at| (at, s.as_str())))
        .min_by_key(|&(at, s)| (at, std::cmp::Reverse(s.len())))
}
