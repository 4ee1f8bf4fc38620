//! Metric scores and their weighted fusion.
//!
//! Every metric maps a model output into `[0, 1]` so that a [`MetricPlan`]
//! (a normalized weight per metric) can combine them into one fitness value:
//!
//! ```text
//! fused = sum_i weight_i * score_i
//! ```

mod complexity;
mod diversity;
mod engine;
mod fluency;
mod similarity;
pub mod text;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backends::BackendError;
use crate::llm::LlmError;
use crate::prompt::Prompt;

pub use complexity::{complexity_score, ComplexityConfig};
pub use diversity::{diversity_score, DEFAULT_NGRAM_ORDERS};
pub use engine::{score_output, score_prompt, score_samples, EvaluationContext, MetricProviders};
pub use fluency::{fluency_from_perplexity, fluency_score};
pub use similarity::similarity_score;

/// Tolerance used when checking that plan weights sum to one.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("unknown metric `{0}` (expected similarity, diversity, fluency or complexity)")]
    UnknownKind(String),
    #[error("metric plan is empty")]
    EmptyPlan,
    #[error("metric `{0}` appears more than once")]
    DuplicateKind(MetricKind),
    #[error("weight for `{kind}` must be positive and finite, got {weight}")]
    InvalidWeight { kind: MetricKind, weight: f64 },
    #[error("weights do not sum to a positive finite value")]
    DegenerateWeights,
    #[error("no score for metric `{0}`")]
    MissingScore(MetricKind),
    #[error("score for `{kind}` must be finite and within [0, 1], got {value}")]
    InvalidScore { kind: MetricKind, value: f64 },
    #[error("text is empty")]
    EmptyText,
    #[error("text has {tokens} tokens, fewer than the largest n-gram order {order}")]
    TextTooShort { tokens: usize, order: usize },
    #[error("n-gram orders must be a non-empty set of positive integers")]
    InvalidOrders,
    #[error("complexity cap `{0}` must be positive")]
    NonPositiveCap(&'static str),
    #[error("perplexity must be finite and >= 1, got {0}")]
    InvalidPerplexity(f64),
    #[error("no {0} provider configured for metric `{1}`")]
    MissingProvider(&'static str, MetricKind),
    #[error("scores cover {found:?} but the plan needs {expected:?}")]
    PlanMismatch {
        expected: Vec<MetricKind>,
        found: Vec<MetricKind>,
    },
    #[error("evaluation context has no items")]
    NoItems,
    #[error("model output for item `{item}` is empty")]
    EmptyOutput { item: String },
    #[error("item `{item}`: {source}")]
    Item {
        item: String,
        #[source]
        source: Box<MetricError>,
    },
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Llm(#[from] LlmError),
}

/// The four supported metric kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Similarity,
    Diversity,
    Fluency,
    Complexity,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [
        MetricKind::Similarity,
        MetricKind::Diversity,
        MetricKind::Fluency,
        MetricKind::Complexity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Similarity => "similarity",
            MetricKind::Diversity => "diversity",
            MetricKind::Fluency => "fluency",
            MetricKind::Complexity => "complexity",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricKind {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "similarity" => Ok(MetricKind::Similarity),
            "diversity" => Ok(MetricKind::Diversity),
            "fluency" => Ok(MetricKind::Fluency),
            "complexity" => Ok(MetricKind::Complexity),
            _ => Err(MetricError::UnknownKind(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub metric: MetricKind,
    pub weight: f64,
}

/// A set of distinct metrics with positive weights summing to one.
///
/// Only constructible through [`normalize_weights`] (or the
/// [`MetricPlan::single`] shortcut), so every value upholds the invariants.
/// Entries keep the order they were supplied in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPlan", into = "RawPlan")]
pub struct MetricPlan {
    entries: Vec<PlanEntry>,
}

#[derive(Serialize, Deserialize)]
struct RawPlan {
    entries: Vec<PlanEntry>,
}

impl TryFrom<RawPlan> for MetricPlan {
    type Error = MetricError;

    fn try_from(raw: RawPlan) -> Result<Self, Self::Error> {
        normalize_weights(raw.entries.iter().map(|e| (e.metric, e.weight)))
    }
}

impl From<MetricPlan> for RawPlan {
    fn from(plan: MetricPlan) -> Self {
        RawPlan {
            entries: plan.entries,
        }
    }
}

impl MetricPlan {
    /// A plan scoring a single metric with weight one.
    pub fn single(kind: MetricKind) -> Self {
        MetricPlan {
            entries: vec![PlanEntry {
                metric: kind,
                weight: 1.0,
            }],
        }
    }

    pub fn entries(&self) -> &[PlanEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn kinds(&self) -> impl Iterator<Item = MetricKind> + '_ {
        self.entries.iter().map(|e| e.metric)
    }

    pub fn contains(&self, kind: MetricKind) -> bool {
        self.kinds().any(|k| k == kind)
    }

    pub fn weight(&self, kind: MetricKind) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.metric == kind)
            .map(|e| e.weight)
    }

    /// Metric with the largest weight; ties go to the earlier entry.
    pub fn top_metric(&self) -> MetricKind {
        let mut best = self.entries[0];
        for e in &self.entries[1..] {
            if e.weight > best.weight {
                best = *e;
            }
        }
        best.metric
    }

    /// `kind=weight` lines, the same shape the selector asks the LLM for.
    pub fn to_lines(&self) -> String {
        self.entries
            .iter()
            .map(|e| format!("{}={}", e.metric, e.weight))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

impl fmt::Display for MetricPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|e| format!("{}: {:.4}", e.metric, e.weight))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Scales raw positive weights so they sum to one.
pub fn normalize_weights<I>(raw: I) -> Result<MetricPlan, MetricError>
where
    I: IntoIterator<Item = (MetricKind, f64)>,
{
    let raw: Vec<(MetricKind, f64)> = raw.into_iter().collect();
    if raw.is_empty() {
        return Err(MetricError::EmptyPlan);
    }
    for (i, &(kind, weight)) in raw.iter().enumerate() {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(MetricError::InvalidWeight { kind, weight });
        }
        if raw[..i].iter().any(|&(k, _)| k == kind) {
            return Err(MetricError::DuplicateKind(kind));
        }
    }
    let total: f64 = raw.iter().map(|&(_, w)| w).sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(MetricError::DegenerateWeights);
    }
    let entries: Vec<PlanEntry> = raw
        .iter()
        .map(|&(metric, w)| PlanEntry {
            metric,
            weight: w / total,
        })
        .collect();
    // Subnormal inputs can underflow to zero after division.
    if entries.iter().any(|e| e.weight.is_nan() || e.weight <= 0.0) {
        return Err(MetricError::DegenerateWeights);
    }
    let sum: f64 = entries.iter().map(|e| e.weight).sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(MetricError::DegenerateWeights);
    }
    Ok(MetricPlan { entries })
}

/// Per-metric scores, each finite and within `[0, 1]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<MetricKind, f64>", into = "BTreeMap<MetricKind, f64>")]
pub struct MetricScores {
    values: BTreeMap<MetricKind, f64>,
}

impl TryFrom<BTreeMap<MetricKind, f64>> for MetricScores {
    type Error = MetricError;

    fn try_from(map: BTreeMap<MetricKind, f64>) -> Result<Self, Self::Error> {
        let mut scores = MetricScores::new();
        for (k, v) in map {
            scores.insert(k, v)?;
        }
        Ok(scores)
    }
}

impl From<MetricScores> for BTreeMap<MetricKind, f64> {
    fn from(scores: MetricScores) -> Self {
        scores.values
    }
}

impl MetricScores {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, kind: MetricKind, value: f64) -> Result<(), MetricError> {
        if !(value.is_finite() && (0.0..=1.0).contains(&value)) {
            return Err(MetricError::InvalidScore { kind, value });
        }
        self.values.insert(kind, value);
        Ok(())
    }

    pub fn with(mut self, kind: MetricKind, value: f64) -> Result<Self, MetricError> {
        self.insert(kind, value)?;
        Ok(self)
    }

    pub fn get(&self, kind: MetricKind) -> Option<f64> {
        self.values.get(&kind).copied()
    }

    pub fn kinds(&self) -> Vec<MetricKind> {
        self.values.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (MetricKind, f64)> + '_ {
        self.values.iter().map(|(k, v)| (*k, *v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Arithmetic mean per metric. All inputs must cover the same kinds.
    pub fn mean<'a, I>(all: I) -> Result<MetricScores, MetricError>
    where
        I: IntoIterator<Item = &'a MetricScores>,
    {
        let mut sums: BTreeMap<MetricKind, f64> = BTreeMap::new();
        let mut count = 0usize;
        let mut kinds: Option<Vec<MetricKind>> = None;
        for s in all {
            match &kinds {
                None => kinds = Some(s.kinds()),
                Some(expected) if *expected != s.kinds() => {
                    return Err(MetricError::PlanMismatch {
                        expected: expected.clone(),
                        found: s.kinds(),
                    })
                }
                Some(_) => {}
            }
            for (k, v) in s.iter() {
                *sums.entry(k).or_insert(0.0) += v;
            }
            count += 1;
        }
        if count == 0 {
            return Err(MetricError::NoItems);
        }
        let mut out = MetricScores::new();
        for (k, total) in sums {
            out.insert(k, (total / count as f64).clamp(0.0, 1.0))?;
        }
        Ok(out)
    }
}

/// Weighted sum of the plan's metrics.
pub fn fuse_scores(plan: &MetricPlan, scores: &MetricScores) -> Result<f64, MetricError> {
    let mut total = 0.0;
    for entry in plan.entries() {
        let value = scores
            .get(entry.metric)
            .ok_or(MetricError::MissingScore(entry.metric))?;
        if !value.is_finite() {
            return Err(MetricError::InvalidScore {
                kind: entry.metric,
                value,
            });
        }
        total += entry.weight * value;
    }
    Ok(total.clamp(0.0, 1.0))
}

/// A prompt together with its per-metric scores and fused fitness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPrompt {
    pub prompt: Prompt,
    pub scores: MetricScores,
    pub fused: f64,
}

impl ScoredPrompt {
    /// Fuses `scores` under `plan`; the scores must cover exactly the plan's kinds.
    pub fn new(prompt: Prompt, plan: &MetricPlan, scores: MetricScores) -> Result<Self, MetricError> {
        let mut expected: Vec<MetricKind> = plan.kinds().collect();
        expected.sort();
        if expected != scores.kinds() {
            return Err(MetricError::PlanMismatch {
                expected,
                found: scores.kinds(),
            });
        }
        let fused = fuse_scores(plan, &scores)?;
        Ok(ScoredPrompt {
            prompt,
            scores,
            fused,
        })
    }
}
