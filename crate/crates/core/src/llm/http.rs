use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{CompletionProvider, CompletionRequest, CompletionResult, LlmError};
use crate::http::{excerpt, InFlightLimiter, JsonClient, RetryPolicy, TransportError};

#[derive(Debug, Clone)]
pub struct HttpConfig {
    /// Full chat-completions URL, e.g. `https://api.openai.com/v1/chat/completions`.
    pub endpoint: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
    pub retry: RetryPolicy,
    pub limiter: Option<Arc<InFlightLimiter>>,
}

impl HttpConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        HttpConfig {
            endpoint: endpoint.into(),
            api_key: None,
            timeout: Duration::from_secs(120),
            retry: RetryPolicy::default(),
            limiter: None,
        }
    }
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    temperature: f64,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Deserialize)]
struct ResponseMessage {
    #[serde(default)]
    content: Option<String>,
}

/// Client for an OpenAI-style chat-completions endpoint.
pub struct HttpProvider {
    name: String,
    endpoint: String,
    api_key: Option<String>,
    attempts: u32,
    client: JsonClient,
}

impl HttpProvider {
    pub fn new(config: HttpConfig) -> Self {
        HttpProvider {
            name: format!("http:{}", config.endpoint),
            attempts: config.retry.effective_attempts(),
            client: JsonClient::new(config.timeout, config.retry, config.limiter),
            endpoint: config.endpoint,
            api_key: config.api_key,
        }
    }
}

impl CompletionProvider for HttpProvider {
    fn name(&self) -> &str {
        &self.name
    }

    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, LlmError> {
        request.validate()?;
        let mut messages = Vec::with_capacity(2);
        if let Some(system) = &request.system_text {
            messages.push(ChatMessage {
                role: "system",
                content: system,
            });
        }
        messages.push(ChatMessage {
            role: "user",
            content: &request.user_text,
        });
        let body = ChatRequest {
            model: &request.model_name,
            messages,
            temperature: request.temperature,
            max_tokens: request.max_tokens,
        };

        let started = Instant::now();
        let (status, text) = self
            .client
            .post_json(&self.endpoint, self.api_key.as_deref(), &body)
            .map_err(|e| LlmError::Transport {
                url: self.endpoint.clone(),
                attempts: match e {
                    TransportError::Transient(_) => self.attempts,
                    TransportError::Other(_) => 1,
                },
                message: e.to_string(),
            })?;
        if !(200..300).contains(&status) {
            return Err(LlmError::Status {
                status,
                body: excerpt(&text, 300),
            });
        }
        let parsed: ChatResponse =
            serde_json::from_str(&text).map_err(|e| LlmError::Malformed(e.to_string()))?;
        let content = parsed
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| LlmError::Malformed("response has no choices".into()))?
            .message
            .content
            .unwrap_or_default();
        Ok(CompletionResult {
            text: content,
            provider_name: self.name.clone(),
            cached: false,
            latency_ms: started.elapsed().as_millis() as u64,
        })
    }
}
