use serde::{Deserialize, Serialize};

use super::text::tokenize;
use super::MetricError;

/// Caps and marker lists for the complexity score.
///
/// Markers may be single words or short phrases; they are tokenized the same
/// way as the scored text and matched as contiguous token sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComplexityConfig {
    /// Token count at which the length sub-score saturates.
    pub max_tokens: usize,
    /// Clause-marker count at which the syntax sub-score saturates.
    pub clause_cap: usize,
    /// Step-marker count at which the reasoning-steps sub-score saturates.
    pub step_cap: usize,
    pub clause_markers: Vec<String>,
    pub step_markers: Vec<String>,
}

const DEFAULT_CLAUSE_MARKERS: &[&str] = &[
    "because", "although", "though", "while", "whereas", "if", "unless", "since", "which", "that",
    "when", "however", "therefore", "thus", "so",
];

const DEFAULT_STEP_MARKERS: &[&str] = &[
    "first", "second", "third", "then", "next", "finally", "step", "steps", "afterwards", "lastly",
];

impl Default for ComplexityConfig {
    fn default() -> Self {
        ComplexityConfig {
            max_tokens: 100,
            clause_cap: 5,
            step_cap: 5,
            clause_markers: DEFAULT_CLAUSE_MARKERS.iter().map(|s| s.to_string()).collect(),
            step_markers: DEFAULT_STEP_MARKERS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl ComplexityConfig {
    pub fn validate(&self) -> Result<(), MetricError> {
        if self.max_tokens == 0 {
            return Err(MetricError::NonPositiveCap("max_tokens"));
        }
        if self.clause_cap == 0 {
            return Err(MetricError::NonPositiveCap("clause_cap"));
        }
        if self.step_cap == 0 {
            return Err(MetricError::NonPositiveCap("step_cap"));
        }
        Ok(())
    }
}

fn count_markers(tokens: &[String], markers: &[String]) -> usize {
    markers
        .iter()
        .map(|m| tokenize(m))
        .filter(|m| !m.is_empty())
        .map(|m| tokens.windows(m.len()).filter(|w| *w == m.as_slice()).count())
        .sum()
}

/// Mean of three saturating sub-scores: length, clause markers, step markers.
pub fn complexity_score(text: &str, config: &ComplexityConfig) -> Result<f64, MetricError> {
    config.validate()?;
    if text.trim().is_empty() {
        return Err(MetricError::EmptyText);
    }
    let tokens = tokenize(text);
    let ratio = |count: usize, cap: usize| (count as f64 / cap as f64).min(1.0);
    let length = ratio(tokens.len(), config.max_tokens);
    let clauses = ratio(count_markers(&tokens, &config.clause_markers), config.clause_cap);
    let steps = ratio(count_markers(&tokens, &config.step_markers), config.step_cap);
    Ok((length + clauses + steps) / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_token() {
        let c = complexity_score("hi", &ComplexityConfig::default()).unwrap();
        assert!((c - 0.01 / 3.0).abs() < 1e-12);
        assert!((c - 0.0033).abs() < 1e-4);
    }

    #[test]
    fn step_sub_score() {
        let cfg = ComplexityConfig {
            max_tokens: 4,
            clause_cap: 5,
            step_cap: 5,
            clause_markers: vec![],
            step_markers: vec!["first".into(), "second".into()],
        };
        // length 4/4 = 1, clauses 0, steps 2/5
        let c = complexity_score("First, add. Second, subtract.", &cfg).unwrap();
        assert!((c - (1.0 + 0.0 + 0.4) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn saturates_at_caps() {
        let cfg = ComplexityConfig {
            max_tokens: 3,
            clause_cap: 1,
            step_cap: 1,
            clause_markers: vec!["because".into()],
            step_markers: vec!["then".into()],
        };
        assert_eq!(complexity_score("then because x", &cfg).unwrap(), 1.0);
        assert_eq!(complexity_score("then because then because x y z", &cfg).unwrap(), 1.0);
    }

    #[test]
    fn phrase_markers() {
        let cfg = ComplexityConfig {
            max_tokens: 100,
            clause_cap: 1,
            step_cap: 2,
            clause_markers: vec![],
            step_markers: vec!["step by step".into()],
        };
        let c = complexity_score("Let's think step by step.", &cfg).unwrap();
        assert!((c - (6.0 / 100.0 + 0.0 + 0.5) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let cfg = ComplexityConfig::default();
        assert!(matches!(complexity_score("  ", &cfg), Err(MetricError::EmptyText)));
        let zero = ComplexityConfig {
            step_cap: 0,
            ..ComplexityConfig::default()
        };
        assert!(matches!(
            complexity_score("x", &zero),
            Err(MetricError::NonPositiveCap("step_cap"))
        ));
    }
}
