use std::collections::HashSet;

use super::{BackendError, Embedder, EmbeddingVector, PerplexityProvider, PerplexityValue};
use crate::metrics::text::tokenize;

/// Identifies the hashing scheme of [`HashEmbedder`]; bump on any change.
pub const HASH_EMBEDDER_VERSION: &str = "fnv1a64-bow-v1";

/// 64-bit FNV-1a over the UTF-8 bytes of `s`.
pub fn fnv1a64(s: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Bag-of-words embedding: each token adds one to bucket `fnv1a64(token) % dim`,
/// then the vector is scaled to unit norm.
///
/// Text with no alphanumeric tokens is hashed as a single token of its trimmed,
/// lowercased content.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    dimension: usize,
}

impl HashEmbedder {
    pub const DEFAULT_DIMENSION: usize = 256;

    pub fn new() -> Self {
        HashEmbedder {
            dimension: Self::DEFAULT_DIMENSION,
        }
    }

    pub fn with_dimension(dimension: usize) -> Self {
        HashEmbedder {
            dimension: dimension.max(1),
        }
    }

    pub fn bucket(&self, token: &str) -> usize {
        (fnv1a64(token) % self.dimension as u64) as usize
    }
}

impl Default for HashEmbedder {
    fn default() -> Self {
        Self::new()
    }
}

impl Embedder for HashEmbedder {
    fn name(&self) -> &str {
        HASH_EMBEDDER_VERSION
    }

    fn dimension(&self) -> Option<usize> {
        Some(self.dimension)
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, BackendError> {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Err(BackendError::EmptyText);
        }
        let mut tokens = tokenize(trimmed);
        if tokens.is_empty() {
            tokens.push(trimmed.to_lowercase());
        }
        let mut values = vec![0.0; self.dimension];
        for t in &tokens {
            values[self.bucket(t)] += 1.0;
        }
        EmbeddingVector::normalized(values)
    }
}

/// Test-only fluency proxy: `1 + 99 * f`, where `f` is the fraction of bigrams
/// that repeat an earlier bigram. Not a language model; it only gives a
/// deterministic signal that ranks repetitive text as less fluent.
#[derive(Debug, Clone, Default)]
pub struct RepetitionPerplexity;

impl RepetitionPerplexity {
    pub fn repeated_bigram_fraction(text: &str) -> f64 {
        let tokens = tokenize(text);
        if tokens.len() < 2 {
            return 0.0;
        }
        let bigrams: Vec<&[String]> = tokens.windows(2).collect();
        let unique: HashSet<&[String]> = bigrams.iter().copied().collect();
        (bigrams.len() - unique.len()) as f64 / bigrams.len() as f64
    }
}

impl PerplexityProvider for RepetitionPerplexity {
    fn name(&self) -> &str {
        "repetition-proxy-v1"
    }

    fn perplexity(&self, text: &str) -> Result<PerplexityValue, BackendError> {
        if text.trim().is_empty() {
            return Err(BackendError::EmptyText);
        }
        PerplexityValue::new(1.0 + Self::repeated_bigram_fraction(text) * 99.0)
    }
}
