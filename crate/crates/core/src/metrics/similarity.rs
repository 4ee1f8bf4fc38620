use super::MetricError;
use crate::backends::Embedder;

/// Cosine similarity of the two embeddings, clamped to `[0, 1]`.
pub fn similarity_score(
    candidate: &str,
    reference: &str,
    embedder: &dyn Embedder,
) -> Result<f64, MetricError> {
    if candidate.trim().is_empty() || reference.trim().is_empty() {
        return Err(MetricError::EmptyText);
    }
    let a = embedder.embed(candidate)?;
    let b = embedder.embed(reference)?;
    let cos = a.cosine(&b)?;
    Ok(cos.clamp(0.0, 1.0))
}
