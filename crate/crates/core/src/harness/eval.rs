use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DatasetItem, HarnessError};
use crate::llm::{CompletionProvider, RequestSettings};
use crate::metrics::{
    fuse_scores, score_output, MetricError, MetricKind, MetricPlan, MetricProviders, MetricScores,
};
use crate::prompt::compose_query;

/// Runs abort when this share of items (or more) fails.
pub const MAX_FAILURE_RATE: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub item_id: String,
    pub model_output: String,
    pub scores: MetricScores,
    pub fused: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemFailure {
    pub item_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: String,
    pub prompt: String,
    pub plan: MetricPlan,
    pub item_count: usize,
    pub failed_count: usize,
    pub mean_scores: MetricScores,
    pub mean_fused: f64,
    /// `100 * mean similarity`, when similarity is part of the plan.
    pub similarity_percentage: Option<f64>,
}

impl EvalReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "dataset      {}", self.dataset);
        let _ = writeln!(out, "prompt       {}", self.prompt.replace('\n', " "));
        let _ = writeln!(out, "items        {} scored, {} failed", self.item_count, self.failed_count);
        let _ = writeln!(out, "plan         {}", self.plan);
        let _ = writeln!(out);
        let _ = writeln!(out, "{:<12} {:>8} {:>8}", "metric", "weight", "mean");
        for entry in self.plan.entries() {
            let mean = self.mean_scores.get(entry.metric).unwrap_or(f64::NAN);
            let _ = writeln!(out, "{:<12} {:>8.4} {:>8.4}", entry.metric.as_str(), entry.weight, mean);
        }
        let _ = writeln!(out, "{:<12} {:>8} {:>8.4}", "fused", "", self.mean_fused);
        if let Some(p) = self.similarity_percentage {
            let _ = writeln!(out, "\nsimilarity   {p:.2}%");
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub report: EvalReport,
    pub records: Vec<EvalRecord>,
    pub failures: Vec<ItemFailure>,
}

/// The fixed parts of an evaluation run.
pub struct EvalSetup<'a> {
    pub dataset_name: &'a str,
    pub plan: &'a MetricPlan,
    pub llm: &'a dyn CompletionProvider,
    pub settings: &'a RequestSettings,
    pub providers: &'a MetricProviders,
}

fn eval_item(
    prompt: &str,
    item: &DatasetItem,
    setup: &EvalSetup<'_>,
) -> Result<EvalRecord, MetricError> {
    let output = setup
        .settings
        .ask(setup.llm, compose_query(prompt, &item.question))?;
    if output.is_empty() {
        return Err(MetricError::EmptyOutput {
            item: item.id.clone(),
        });
    }
    let scores = score_output(setup.plan, &output, &item.reference, setup.providers)?;
    let fused = fuse_scores(setup.plan, &scores)?;
    Ok(EvalRecord {
        item_id: item.id.clone(),
        model_output: output,
        scores,
        fused,
    })
}

/// Answers every item with `prompt`, scores each answer and aggregates.
///
/// Failed items are excluded from the means as long as they stay below
/// [`MAX_FAILURE_RATE`]; otherwise the run aborts.
pub fn run_eval(
    prompt: &str,
    items: &[DatasetItem],
    setup: &EvalSetup<'_>,
) -> Result<EvalOutcome, HarnessError> {
    if items.is_empty() {
        return Err(HarnessError::NoItems);
    }
    setup.providers.check_plan(setup.plan)?;
    let results: Vec<Result<EvalRecord, MetricError>> = items
        .par_iter()
        .map(|item| eval_item(prompt, item, setup))
        .collect();

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (item, result) in items.iter().zip(results) {
        match result {
            Ok(r) => records.push(r),
            Err(e) => {
                log::warn!("item {} failed: {e}", item.id);
                failures.push(ItemFailure {
                    item_id: item.id.clone(),
                    error: e.to_string(),
                });
            }
        }
    }
    if failures.len() as f64 >= MAX_FAILURE_RATE * items.len() as f64 && !failures.is_empty() {
        return Err(HarnessError::FailureRate {
            failed: failures.len(),
            total: items.len(),
            first: format!("{}: {}", failures[0].item_id, failures[0].error),
        });
    }

    let mean_scores = MetricScores::mean(records.iter().map(|r| &r.scores))?;
    let mean_fused = records.iter().map(|r| r.fused).sum::<f64>() / records.len() as f64;
    let report = EvalReport {
        dataset: setup.dataset_name.to_string(),
        prompt: prompt.to_string(),
        plan: setup.plan.clone(),
        item_count: records.len(),
        failed_count: failures.len(),
        similarity_percentage: mean_scores.get(MetricKind::Similarity).map(|s| 100.0 * s),
        mean_scores,
        mean_fused: mean_fused.clamp(0.0, 1.0),
    };
    Ok(EvalOutcome {
        report,
        records,
        failures,
    })
}
