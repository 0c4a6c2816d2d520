use std::env;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::http::{HttpBackend, RetryPolicy};
use super::mock::MockBackend;
use super::{Backend, BackendError};
use crate::corpus::Tokenizer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Mock,
    Http,
}

/// Declarative backend settings. The API key itself never appears here, only
/// the name of the environment variable holding it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub api_key_env: Option<String>,
    pub timeout_secs: f64,
    pub max_retries: u32,
    pub initial_backoff_ms: u64,
    pub script: Option<PathBuf>,
    /// Mock only: random per-call delay bound, in microseconds.
    pub jitter_us: u64,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            kind: BackendKind::Mock,
            endpoint: None,
            model: None,
            api_key_env: None,
            timeout_secs: 60.0,
            max_retries: 3,
            initial_backoff_ms: 500,
            script: None,
            jitter_us: 0,
        }
    }
}

impl BackendConfig {
    pub fn build(&self, tokenizer: Arc<dyn Tokenizer>) -> Result<Arc<dyn Backend>, BackendError> {
        match self.kind {
            BackendKind::Mock => {
                let mock = match &self.script {
                    Some(path) => MockBackend::from_file(path)?,
                    None => MockBackend::default(),
                };
                Ok(Arc::new(mock.with_jitter(Duration::from_micros(self.jitter_us))))
            }
            BackendKind::Http => {
                let endpoint = self
                    .endpoint
                    .as_deref()
                    .ok_or_else(|| BackendError::Config("http backend requires an endpoint".into()))?;
                let model = self
                    .model
                    .as_deref()
                    .ok_or_else(|| BackendError::Config("http backend requires a model".into()))?;
                if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
                    return Err(BackendError::Config("timeout must be positive".into()));
                }
                let api_key = match &self.api_key_env {
                    Some(var) => Some(
                        env::var(var)
                            .map_err(|_| BackendError::Config(format!("environment variable {var} is not set")))?,
                    ),
                    None => None,
                };
                Ok(Arc::new(HttpBackend::new(
                    endpoint,
                    model,
                    api_key,
                    Duration::from_secs_f64(self.timeout_secs),
                    RetryPolicy {
                        max_retries: self.max_retries,
                        initial_backoff: Duration::from_millis(self.initial_backoff_ms),
                    },
                    tokenizer,
                )))
            }
        }
    }
}
