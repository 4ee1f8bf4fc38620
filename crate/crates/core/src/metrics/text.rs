//! Tokenization shared by the lexical metrics and the offline providers.
//!
//! Text is lowercased and split at every character that is not alphanumeric,
//! so whitespace and punctuation both act as boundaries and are dropped.

pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// All contiguous `n`-token windows of `tokens`.
pub fn ngrams(tokens: &[String], n: usize) -> impl Iterator<Item = &[String]> {
    tokens.windows(n.max(1)).filter(move |_| n > 0)
}
