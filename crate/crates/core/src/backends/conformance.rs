//! Contract checks that every embedding and perplexity provider must pass.
//!
//! Shared by the offline providers, the HTTP clients against a stub server,
//! and (when one is running) the real metric-model service.

use super::{Embedder, PerplexityProvider, UNIT_NORM_TOLERANCE};

const TEXTS: &[&str] = &[
    "The cat sat on the mat.",
    "Joan had 8 kittens and gave 2 away.",
    "Break the problem into smaller parts.",
];

/// A grammatical sentence and a shuffled version of the same tokens.
pub const FLUENT_SENTENCE: &str = "The quick brown fox jumps over the lazy dog near the river bank.";
pub const SHUFFLED_SENTENCE: &str = "bank river fox the lazy jumps the quick near over brown dog the.";

pub fn check_embedder(embedder: &dyn Embedder) -> Result<(), String> {
    let mut dim = embedder.dimension();
    for text in TEXTS {
        let a = embedder.embed(text).map_err(|e| format!("embed({text:?}): {e}"))?;
        let b = embedder.embed(text).map_err(|e| format!("embed({text:?}): {e}"))?;
        if a != b {
            return Err(format!("embedding of {text:?} is not deterministic"));
        }
        if (a.norm() - 1.0).abs() > UNIT_NORM_TOLERANCE {
            return Err(format!("embedding of {text:?} has norm {}", a.norm()));
        }
        match dim {
            Some(d) if d != a.dimension() => {
                return Err(format!("dimension {} differs from {d}", a.dimension()))
            }
            _ => dim = Some(a.dimension()),
        }
        let self_cos = a.cosine(&b).map_err(|e| e.to_string())?;
        if (self_cos - 1.0).abs() > 1e-9 {
            return Err(format!("self-cosine of {text:?} is {self_cos}"));
        }
    }
    let x = embedder.embed(TEXTS[0]).map_err(|e| e.to_string())?;
    let y = embedder.embed(TEXTS[1]).map_err(|e| e.to_string())?;
    let xy = x.cosine(&y).map_err(|e| e.to_string())?;
    let yx = y.cosine(&x).map_err(|e| e.to_string())?;
    if xy != yx {
        return Err(format!("cosine is not symmetric: {xy} vs {yx}"));
    }
    if embedder.embed("").is_ok() {
        return Err("empty text was accepted".into());
    }
    Ok(())
}

pub fn check_perplexity(provider: &dyn PerplexityProvider) -> Result<(), String> {
    for text in TEXTS {
        let a = provider
            .perplexity(text)
            .map_err(|e| format!("perplexity({text:?}): {e}"))?;
        let b = provider
            .perplexity(text)
            .map_err(|e| format!("perplexity({text:?}): {e}"))?;
        if a != b {
            return Err(format!("perplexity of {text:?} is not deterministic"));
        }
        if !(a.value().is_finite() && a.value() >= 1.0) {
            return Err(format!("perplexity of {text:?} is {}", a.value()));
        }
    }
    if provider.perplexity("").is_ok() {
        return Err("empty text was accepted".into());
    }
    Ok(())
}

/// The language-model-specific ordering check: shuffled tokens must read as
/// less fluent. Only meaningful for real models, not the offline proxy.
pub fn check_shuffled_is_less_fluent(provider: &dyn PerplexityProvider) -> Result<(), String> {
    let fluent = provider.perplexity(FLUENT_SENTENCE).map_err(|e| e.to_string())?;
    let shuffled = provider.perplexity(SHUFFLED_SENTENCE).map_err(|e| e.to_string())?;
    if shuffled.value() > fluent.value() {
        Ok(())
    } else {
        Err(format!(
            "shuffled perplexity {} does not exceed original {}",
            shuffled.value(),
            fluent.value()
        ))
    }
}
