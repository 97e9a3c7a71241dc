//! Completion providers: a chat-completions HTTP client, a persistent
//! response cache and a scripted mock.

mod cache;
mod mock;
mod openai;

use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use cache::{CacheEntry, CacheKey, CachedBackend, ResponseCache};
pub use mock::{MockBackend, MockRule, MockScriptError};
pub use openai::HttpBackend;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub model_name: String,
    pub endpoint_url: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub retry_limit: u32,
    pub timeout_secs: u64,
    /// Environment variable holding the API key. No key is sent when unset.
    pub api_key_env: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system_message: Option<String>,
    /// First retry delay; later retries double it.
    pub backoff_base_ms: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            model_name: "gpt-3.5-turbo".into(),
            endpoint_url: "https://api.openai.com/v1".into(),
            temperature: 0.0,
            max_output_tokens: 1024,
            retry_limit: 3,
            timeout_secs: 120,
            api_key_env: "OPENAI_API_KEY".into(),
            system_message: None,
            backoff_base_ms: 1000,
        }
    }
}

impl ModelConfig {
    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.timeout_secs)
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(BackendError::Config(format!("temperature must be >= 0, got {}", self.temperature)));
        }
        if self.max_output_tokens == 0 {
            return Err(BackendError::Config("max_output_tokens must be positive".into()));
        }
        if self.model_name.trim().is_empty() {
            return Err(BackendError::Config("model_name must not be empty".into()));
        }
        Ok(())
    }
}

/// One completion request. `sample` distinguishes repeated draws of the same
/// prompt (self-consistency chains) for caching and scripting.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionRequest {
    pub prompt: String,
    pub temperature: f64,
    pub sample: u32,
}

impl CompletionRequest {
    pub fn new(prompt: impl Into<String>, temperature: f64) -> Self {
        CompletionRequest { prompt: prompt.into(), temperature, sample: 0 }
    }

    pub fn with_sample(mut self, sample: u32) -> Self {
        self.sample = sample;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawResponse {
    pub text: String,
    pub reported_completion_tokens: Option<u64>,
    pub latency: Duration,
    pub from_cache: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BackendError {
    #[error("transport failure after {attempts} attempt(s){}: {message}", status.map(|s| format!(" (last status {s})")).unwrap_or_default())]
    Transport { status: Option<u16>, message: String, attempts: u32 },
    #[error("malformed provider payload: {0}")]
    Protocol(String),
    #[error("no scripted response for prompt hash {hash} (sample {sample})")]
    ScriptedGap { hash: String, sample: u32 },
    #[error("invalid model configuration: {0}")]
    Config(String),
    #[error("cache i/o: {0}")]
    Cache(String),
}

pub trait CompletionBackend: Send + Sync {
    fn complete(&self, request: &CompletionRequest) -> Result<RawResponse, BackendError>;
}

impl<T: CompletionBackend + ?Sized> CompletionBackend for &T {
    fn complete(&self, request: &CompletionRequest) -> Result<RawResponse, BackendError> {
        (**self).complete(request)
    }
}

impl<T: CompletionBackend + ?Sized> CompletionBackend for Box<T> {
    fn complete(&self, request: &CompletionRequest) -> Result<RawResponse, BackendError> {
        (**self).complete(request)
    }
}

impl<T: CompletionBackend + ?Sized> CompletionBackend for Arc<T> {
    fn complete(&self, request: &CompletionRequest) -> Result<RawResponse, BackendError> {
        (**self).complete(request)
    }
}

/// Provider text with trailing whitespace removed.
pub(crate) fn trim_provider_text(mut text: String) -> String {
    let keep = text.trim_end().len();
    text.truncate(keep);
    text
}
