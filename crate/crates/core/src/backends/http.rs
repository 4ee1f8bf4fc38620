use std::sync::{Arc, OnceLock};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{BackendError, Embedder, EmbeddingVector, PerplexityProvider, PerplexityValue};
use crate::http::{excerpt, InFlightLimiter, JsonClient, RetryPolicy, TransportError};

/// Connection settings for the metric-model service.
#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Base URL, e.g. `http://127.0.0.1:8000`; `/embed` and `/perplexity` are appended.
    pub base_url: String,
    pub timeout: Duration,
    pub retry: RetryPolicy,
    pub limiter: Option<Arc<InFlightLimiter>>,
}

impl ServiceConfig {
    pub fn new(base_url: impl Into<String>) -> Self {
        ServiceConfig {
            base_url: base_url.into(),
            timeout: Duration::from_secs(60),
            retry: RetryPolicy::default(),
            limiter: None,
        }
    }

    fn endpoint(&self, path: &str) -> String {
        format!("{}/{}", self.base_url.trim_end_matches('/'), path)
    }

    fn client(&self) -> JsonClient {
        JsonClient::new(self.timeout, self.retry, self.limiter.clone())
    }
}

fn post<B: Serialize, R: for<'de> Deserialize<'de>>(
    client: &JsonClient,
    url: &str,
    body: &B,
) -> Result<R, BackendError> {
    let (status, text) = client.post_json(url, None, body).map_err(|e| match e {
        TransportError::Transient(m) | TransportError::Other(m) => BackendError::Unreachable {
            url: url.to_string(),
            message: m,
        },
    })?;
    if !(200..300).contains(&status) {
        return Err(BackendError::Status {
            status,
            body: excerpt(&text, 200),
        });
    }
    serde_json::from_str(&text).map_err(|e| BackendError::Malformed(e.to_string()))
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: Vec<&'a str>,
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
    #[serde(default)]
    dimension: Option<usize>,
}

/// Client for `POST {base}/embed`.
///
/// When no dimension is declared, the first response fixes it.
pub struct HttpEmbedder {
    url: String,
    client: JsonClient,
    declared: Option<usize>,
    observed: OnceLock<usize>,
}

impl HttpEmbedder {
    pub fn new(config: &ServiceConfig, dimension: Option<usize>) -> Self {
        HttpEmbedder {
            url: config.endpoint("embed"),
            client: config.client(),
            declared: dimension,
            observed: OnceLock::new(),
        }
    }

    /// Embeds several texts in one request, preserving order.
    pub fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, BackendError> {
        if texts.is_empty() || texts.iter().any(|t| t.trim().is_empty()) {
            return Err(BackendError::EmptyText);
        }
        let resp: EmbedResponse = post(
            &self.client,
            &self.url,
            &EmbedRequest {
                texts: texts.to_vec(),
            },
        )?;
        if resp.vectors.len() != texts.len() {
            return Err(BackendError::Malformed(format!(
                "expected {} vectors, got {}",
                texts.len(),
                resp.vectors.len()
            )));
        }
        let expected = self
            .declared
            .or(resp.dimension)
            .unwrap_or_else(|| *self.observed.get_or_init(|| resp.vectors[0].len()));
        resp.vectors
            .into_iter()
            .map(|v| {
                if v.len() != expected {
                    return Err(BackendError::DimensionMismatch {
                        expected,
                        found: v.len(),
                    });
                }
                EmbeddingVector::from_unit(v)
            })
            .collect()
    }
}

impl Embedder for HttpEmbedder {
    fn name(&self) -> &str {
        &self.url
    }

    fn dimension(&self) -> Option<usize> {
        self.declared.or_else(|| self.observed.get().copied())
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, BackendError> {
        let mut v = self.embed_batch(&[text])?;
        Ok(v.remove(0))
    }
}

#[derive(Serialize)]
struct PerplexityRequest<'a> {
    text: &'a str,
}

#[derive(Deserialize)]
struct PerplexityResponse {
    perplexity: f64,
}

/// Client for `POST {base}/perplexity`.
pub struct HttpPerplexity {
    url: String,
    client: JsonClient,
}

impl HttpPerplexity {
    pub fn new(config: &ServiceConfig) -> Self {
        HttpPerplexity {
            url: config.endpoint("perplexity"),
            client: config.client(),
        }
    }
}

impl PerplexityProvider for HttpPerplexity {
    fn name(&self) -> &str {
        &self.url
    }

    fn perplexity(&self, text: &str) -> Result<PerplexityValue, BackendError> {
        if text.trim().is_empty() {
            return Err(BackendError::EmptyText);
        }
        let resp: PerplexityResponse =
            post(&self.client, &self.url, &PerplexityRequest { text })?;
        PerplexityValue::new(resp.perplexity)
    }
}
