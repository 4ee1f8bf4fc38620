//! Embedding and perplexity providers behind the similarity and fluency metrics.
//!
//! Two families implement the same traits: HTTP clients for the companion
//! metric-model service (`/embed`, `/perplexity`) and deterministic offline
//! providers for tests and dry runs.

pub mod conformance;
mod http;
mod offline;

use thiserror::Error;

pub use http::{HttpEmbedder, HttpPerplexity, ServiceConfig};
pub use offline::{fnv1a64, HashEmbedder, RepetitionPerplexity, HASH_EMBEDDER_VERSION};

/// Tolerance on the Euclidean norm of an embedding.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("text is empty")]
    EmptyText,
    #[error("metric service unreachable at {url}: {message}")]
    Unreachable { url: String, message: String },
    #[error("metric service returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed metric service response: {0}")]
    Malformed(String),
    #[error("embedding dimension {found} does not match expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("embedding is not unit-norm (norm {0})")]
    NotNormalized(f64),
    #[error("embedding contains non-finite values")]
    NonFinite,
    #[error("perplexity must be finite and >= 1, got {0}")]
    InvalidPerplexity(f64),
}

/// A finite, unit-norm embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl EmbeddingVector {
    /// Scales `values` to unit norm. Fails on an all-zero or non-finite vector.
    pub fn normalized(mut values: Vec<f64>) -> Result<Self, BackendError> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(BackendError::NonFinite);
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(BackendError::NotNormalized(norm));
        }
        values.iter_mut().for_each(|v| *v /= norm);
        Ok(EmbeddingVector { values })
    }

    /// Accepts a vector that is already unit-norm within [`UNIT_NORM_TOLERANCE`].
    pub fn from_unit(values: Vec<f64>) -> Result<Self, BackendError> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(BackendError::NonFinite);
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
            return Err(BackendError::NotNormalized(norm));
        }
        Ok(EmbeddingVector { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn cosine(&self, other: &EmbeddingVector) -> Result<f64, BackendError> {
        if self.dimension() != other.dimension() {
            return Err(BackendError::DimensionMismatch {
                expected: self.dimension(),
                found: other.dimension(),
            });
        }
        // A unit vector against itself is exactly 1, not 1 minus rounding.
        if self.values == other.values {
            return Ok(1.0);
        }
        let dot: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum();
        Ok(dot.clamp(-1.0, 1.0))
    }
}

/// A perplexity value: finite and at least one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerplexityValue(f64);

impl PerplexityValue {
    pub fn new(value: f64) -> Result<Self, BackendError> {
        if value.is_finite() && value >= 1.0 {
            Ok(PerplexityValue(value))
        } else {
            Err(BackendError::InvalidPerplexity(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

pub trait Embedder: Send + Sync {
    fn name(&self) -> &str;

    /// Declared dimension, when known up front.
    fn dimension(&self) -> Option<usize>;

    fn embed(&self, text: &str) -> Result<EmbeddingVector, BackendError>;
}

pub trait PerplexityProvider: Send + Sync {
    fn name(&self) -> &str;

    fn perplexity(&self, text: &str) -> Result<PerplexityValue, BackendError>;
}
