use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{EvalReport, HarnessError};
use crate::pipeline::{run_pipeline, PipelineError, PipelineInputs};

/// Which component to disable, mirroring the usual ablation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationMode {
    /// Full pipeline.
    #[default]
    None,
    /// Skip evolution and evaluate the generic zero-shot prompt.
    NoPromptOptimization,
    /// Evolve and evaluate under a similarity-only plan.
    SingleMetric,
}

impl AblationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AblationMode::None => "none",
            AblationMode::NoPromptOptimization => "no_prompt_optimization",
            AblationMode::SingleMetric => "single_metric",
        }
    }
}

impl fmt::Display for AblationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AblationMode {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "none" | "full" => Ok(AblationMode::None),
            "no_prompt_optimization" | "no-prompt-optimization" => {
                Ok(AblationMode::NoPromptOptimization)
            }
            "single_metric" | "single-metric" => Ok(AblationMode::SingleMetric),
            other => Err(HarnessError::UnknownMode(other.to_string())),
        }
    }
}

/// Runs the pipeline with `mode` and returns the held-out report.
pub fn run_ablation(mode: AblationMode, inputs: &PipelineInputs) -> Result<EvalReport, PipelineError> {
    run_pipeline(inputs, mode).map(|o| o.eval.report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_modes() {
        assert_eq!("none".parse::<AblationMode>().unwrap(), AblationMode::None);
        assert_eq!(
            "no_prompt_optimization".parse::<AblationMode>().unwrap(),
            AblationMode::NoPromptOptimization
        );
        assert_eq!("single_metric".parse::<AblationMode>().unwrap(), AblationMode::SingleMetric);
        assert!(matches!(
            "w/o everything".parse::<AblationMode>(),
            Err(HarnessError::UnknownMode(_))
        ));
    }
}
