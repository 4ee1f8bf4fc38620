//! Dataset loading, evaluation runs and ablations.

mod ablation;
mod dataset;
mod eval;

use std::path::PathBuf;

use thiserror::Error;

use crate::metrics::MetricError;

pub use ablation::{run_ablation, AblationMode};
pub use dataset::{load_dataset, parse_dataset, split_dev, DatasetItem, DEFAULT_DEV_FRACTION};
pub use eval::{run_eval, EvalOutcome, EvalRecord, EvalReport, EvalSetup, ItemFailure, MAX_FAILURE_RATE};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("{}:{line}: {message}", path.display())]
    Dataset {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("dataset has no items")]
    NoItems,
    #[error("dataset needs at least 2 items to split into fitness and held-out parts, got {0}")]
    TooSmallToSplit(usize),
    #[error("{failed} of {total} items failed (limit is below {:.0}%); first failure: {first}", MAX_FAILURE_RATE * 100.0)]
    FailureRate {
        failed: usize,
        total: usize,
        first: String,
    },
    #[error("unknown ablation mode `{0}` (expected none, no_prompt_optimization or single_metric)")]
    UnknownMode(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
}
