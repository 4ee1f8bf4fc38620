//! Task-aware prompt optimization.
//!
//! The crate classifies a task from a dataset example, picks a weighted set of
//! evaluation metrics for it, and evolves candidate instructions through
//! LLM-driven mutation and tournament selection. Candidates are ranked by a
//! weighted sum of per-metric scores (similarity, diversity, fluency,
//! complexity), each mapped into `[0, 1]`.
//!
//! Module map:
//!
//! - [`metrics`]: individual metric scores and their fusion.
//! - [`selection`]: task classification and metric-plan selection.
//! - [`evolution`]: population initialization, mutation, tournament selection.
//! - [`llm`]: completion providers (HTTP, scripted mock) with caching and retry.
//! - [`backends`]: embedding and perplexity providers.
//! - [`harness`]: dataset loading, evaluation runs and ablations.
//! - [`pipeline`]: the end-to-end optimize flow used by the CLI.

pub mod backends;
pub mod evolution;
pub mod harness;
mod http;
pub mod llm;
pub mod metrics;
pub mod pipeline;
pub mod prompt;
pub mod selection;
pub mod templates;

pub use evolution::{EvolutionConfig, GenerationLog, StrategyLibrary};
pub use harness::{DatasetItem, EvalRecord, EvalReport};
pub use metrics::{MetricKind, MetricPlan, MetricScores, ScoredPrompt};
pub use prompt::Prompt;
pub use selection::{TaskProfile, TaskType};
