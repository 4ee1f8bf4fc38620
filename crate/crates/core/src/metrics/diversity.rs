use std::collections::HashSet;

use super::text::{ngrams, tokenize};
use super::MetricError;

pub const DEFAULT_NGRAM_ORDERS: [usize; 2] = [1, 2];

/// Mean distinct-n ratio over `orders`: for each `n`, the number of unique
/// n-grams divided by the total number of n-grams in `text`.
pub fn diversity_score(text: &str, orders: &[usize]) -> Result<f64, MetricError> {
    let tokens = tokenize(text);
    diversity_of_tokens(&tokens, orders)
}

pub(crate) fn diversity_of_tokens(tokens: &[String], orders: &[usize]) -> Result<f64, MetricError> {
    let max_order = orders.iter().copied().max().ok_or(MetricError::InvalidOrders)?;
    if orders.contains(&0) {
        return Err(MetricError::InvalidOrders);
    }
    if tokens.len() < max_order {
        return Err(MetricError::TextTooShort {
            tokens: tokens.len(),
            order: max_order,
        });
    }
    let mut distinct: Vec<usize> = orders.to_vec();
    distinct.sort_unstable();
    distinct.dedup();

    let mut total = 0.0;
    for &n in &distinct {
        let grams: Vec<&[String]> = ngrams(tokens, n).collect();
        let unique: HashSet<&[String]> = grams.iter().copied().collect();
        total += unique.len() as f64 / grams.len() as f64;
    }
    Ok(total / distinct.len() as f64)
}
