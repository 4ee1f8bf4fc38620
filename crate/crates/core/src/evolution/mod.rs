//! Evolutionary search over prompt text.
//!
//! Generation 0 combines randomly drawn thinking styles with the task
//! description. Each later generation picks parents by tournament, rewrites
//! them with a randomly drawn mutation strategy, scores the children and keeps
//! the best `population_size` of children plus (with elitism) the best prompt
//! seen so far. All randomness comes from one seeded [`SeededRng`], consumed
//! sequentially, so a run is reproducible given a deterministic provider.

mod engine;
mod library;
mod operators;
mod rng;
mod tournament;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::LlmError;
use crate::metrics::{MetricError, ScoredPrompt};

pub use engine::{EvolutionOutcome, Evolver};
pub use library::StrategyLibrary;
pub use rng::SeededRng;
pub use tournament::{tournament_select, tournament_select_index};

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error("invalid evolution config: {0}")]
    InvalidConfig(String),
    #[error("invalid strategy library: {0}")]
    InvalidLibrary(String),
    #[error("initialization slot {slot}: {source}")]
    Initialization {
        slot: usize,
        #[source]
        source: LlmError,
    },
    #[error("mutation of prompt `{parent}`: {source}")]
    Mutation {
        parent: String,
        #[source]
        source: LlmError,
    },
    #[error("empty LLM response while {0}")]
    EmptyResponse(String),
    #[error("tournament: {0}")]
    Tournament(String),
    #[error("generation {generation}: {source}")]
    Generation {
        generation: u32,
        #[source]
        source: Box<EvolutionError>,
    },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionConfig {
    pub population_size: usize,
    /// Number of evolution rounds after the initial population.
    pub generations: u32,
    pub tournament_size: usize,
    /// Stop as soon as the best fused score reaches this value.
    pub target_score: Option<f64>,
    pub seed: u64,
    pub elitism: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            population_size: 8,
            generations: 10,
            tournament_size: 3,
            target_score: None,
            seed: 42,
            elitism: true,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<(), EvolutionError> {
        let bad = |m: String| Err(EvolutionError::InvalidConfig(m));
        if self.population_size == 0 {
            return bad("population_size must be positive".into());
        }
        if self.tournament_size == 0 || self.tournament_size > self.population_size {
            return bad(format!(
                "tournament_size must be in 1..={}, got {}",
                self.population_size, self.tournament_size
            ));
        }
        if self.population_size >= 2 && self.tournament_size < 2 {
            return bad("tournament_size must be at least 2 when population_size >= 2".into());
        }
        if let Some(t) = self.target_score {
            if !(0.0..=1.0).contains(&t) {
                return bad(format!("target_score must be within [0, 1], got {t}"));
            }
        }
        Ok(())
    }
}

/// One generation's surviving population and its best member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationLog {
    pub generation: u32,
    pub population: Vec<ScoredPrompt>,
    pub best: ScoredPrompt,
}

impl GenerationLog {
    /// One JSON object per line, in generation order.
    pub fn to_jsonl(logs: &[GenerationLog]) -> Result<String, serde_json::Error> {
        let mut out = String::new();
        for log in logs {
            out.push_str(&serde_json::to_string(log)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_jsonl(text: &str) -> Result<Vec<GenerationLog>, serde_json::Error> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect()
    }
}
