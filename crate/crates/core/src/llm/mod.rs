//! Completion providers.
//!
//! [`CompletionProvider`] is the single abstraction the rest of the crate
//! talks to. Implementations: [`HttpProvider`] (chat-completions wire format),
//! [`MockProvider`] (scripted, deterministic) and [`CachedProvider`], which
//! memoizes any other provider in a [`CacheStore`].

mod cache;
mod http;
mod mock;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::http::{InFlightLimiter, RetryPolicy, MAX_ATTEMPTS};
pub use cache::{cache_key, cache_key_material, CacheStore, CachedProvider, FileStore, MemoryStore};
pub use http::{HttpConfig, HttpProvider};
pub use mock::{MockProvider, MockRule, MockScript};

pub const DEFAULT_TEMPERATURE: f64 = 0.1;
pub const DEFAULT_MAX_TOKENS: u32 = 512;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("request to {url} failed after {attempts} attempt(s): {message}")]
    Transport {
        url: String,
        attempts: u32,
        message: String,
    },
    #[error("HTTP {status} from provider: {body}")]
    Status { status: u16, body: String },
    #[error("malformed provider response: {0}")]
    Malformed(String),
    #[error("mock script: {0}")]
    Script(String),
    #[error("{0}")]
    Provider(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub system_text: Option<String>,
    pub user_text: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub model_name: String,
}

impl CompletionRequest {
    pub fn validate(&self) -> Result<(), LlmError> {
        if self.user_text.trim().is_empty() {
            return Err(LlmError::InvalidRequest("user text is empty".into()));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(LlmError::InvalidRequest(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        if self.max_tokens == 0 {
            return Err(LlmError::InvalidRequest("max_tokens must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionResult {
    pub text: String,
    pub provider_name: String,
    pub cached: bool,
    pub latency_ms: u64,
}

pub trait CompletionProvider: Send + Sync {
    fn name(&self) -> &str;

    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, LlmError>;
}

impl<P: CompletionProvider + ?Sized> CompletionProvider for Arc<P> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, LlmError> {
        (**self).complete(request)
    }
}

/// Model settings applied to every request the pipeline sends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RequestSettings {
    pub model_name: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub system_text: Option<String>,
}

impl Default for RequestSettings {
    fn default() -> Self {
        RequestSettings {
            model_name: "mock".into(),
            temperature: DEFAULT_TEMPERATURE,
            max_tokens: DEFAULT_MAX_TOKENS,
            system_text: None,
        }
    }
}

impl RequestSettings {
    pub fn request(&self, user_text: impl Into<String>) -> CompletionRequest {
        CompletionRequest {
            system_text: self.system_text.clone(),
            user_text: user_text.into(),
            temperature: self.temperature,
            max_tokens: self.max_tokens,
            model_name: self.model_name.clone(),
        }
    }

    /// Sends `user_text` and returns the trimmed response text.
    pub fn ask(
        &self,
        llm: &dyn CompletionProvider,
        user_text: impl Into<String>,
    ) -> Result<String, LlmError> {
        let req = self.request(user_text);
        req.validate()?;
        Ok(llm.complete(&req)?.text.trim().to_string())
    }
}
