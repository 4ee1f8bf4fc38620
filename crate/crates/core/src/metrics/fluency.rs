use super::MetricError;
use crate::backends::PerplexityProvider;

/// Maps a perplexity `p >= 1` to `1 / (1 + ln p)`.
pub fn fluency_from_perplexity(p: f64) -> Result<f64, MetricError> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(MetricError::InvalidPerplexity(p));
    }
    Ok(1.0 / (1.0 + p.ln()))
}

pub fn fluency_score(text: &str, provider: &dyn PerplexityProvider) -> Result<f64, MetricError> {
    if text.trim().is_empty() {
        return Err(MetricError::EmptyText);
    }
    let p = provider.perplexity(text)?;
    fluency_from_perplexity(p.value())
}
