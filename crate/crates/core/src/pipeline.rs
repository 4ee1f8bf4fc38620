//! End-to-end optimize flow: classify, select metrics, evolve on the fitness
//! split, evaluate the winner on the held-out split.

use std::sync::Arc;

use thiserror::Error;

use crate::evolution::{EvolutionConfig, EvolutionError, Evolver, GenerationLog, StrategyLibrary};
use crate::harness::{
    run_eval, split_dev, AblationMode, DatasetItem, EvalOutcome, EvalSetup, HarnessError,
    DEFAULT_DEV_FRACTION,
};
use crate::llm::{CompletionProvider, RequestSettings};
use crate::metrics::{EvaluationContext, MetricKind, MetricPlan, MetricProviders, ScoredPrompt};
use crate::prompt::GENERIC_PROMPT;
use crate::selection::{classify_task, select_metrics, FallbackTable, TaskProfile, TaskSample};
use crate::templates::Templates;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error("invalid pipeline input: {0}")]
    InvalidInput(String),
}

/// Everything one pipeline run needs.
#[derive(Clone)]
pub struct PipelineInputs {
    pub dataset_name: String,
    pub items: Vec<DatasetItem>,
    pub llm: Arc<dyn CompletionProvider>,
    pub settings: RequestSettings,
    pub providers: MetricProviders,
    pub library: StrategyLibrary,
    pub templates: Templates,
    pub evolution: EvolutionConfig,
    pub fallback: FallbackTable,
    /// How many dataset examples the classifier and selector see.
    pub selection_examples: usize,
    /// Share of items used for fitness evaluation during evolution.
    pub dev_fraction: f64,
    /// Problem description for initialization; defaults to one derived from
    /// the detected task type.
    pub task_description: Option<String>,
}

impl PipelineInputs {
    /// Inputs with default library, templates, evolution settings and
    /// fallback table.
    pub fn new(
        dataset_name: impl Into<String>,
        items: Vec<DatasetItem>,
        llm: Arc<dyn CompletionProvider>,
        providers: MetricProviders,
    ) -> Self {
        PipelineInputs {
            dataset_name: dataset_name.into(),
            items,
            llm,
            settings: RequestSettings::default(),
            providers,
            library: StrategyLibrary::default(),
            templates: Templates::default(),
            evolution: EvolutionConfig::default(),
            fallback: FallbackTable::default(),
            selection_examples: 1,
            dev_fraction: DEFAULT_DEV_FRACTION,
            task_description: None,
        }
    }

    fn samples(&self, items: &[DatasetItem]) -> Vec<TaskSample> {
        items
            .iter()
            .take(self.selection_examples.max(1))
            .map(TaskSample::from)
            .collect()
    }

    /// Classifies the task and selects its metric plan from the first items.
    pub fn profile_and_plan(&self) -> Result<(TaskProfile, MetricPlan), PipelineError> {
        if self.items.is_empty() {
            return Err(HarnessError::NoItems.into());
        }
        let samples = self.samples(&self.items);
        let llm = self.llm.as_ref();
        let profile = classify_task(&samples, llm, &self.settings, &self.templates);
        let plan = select_metrics(
            &profile,
            &samples,
            llm,
            &self.settings,
            &self.templates,
            &self.fallback,
        );
        Ok((profile, plan))
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub mode: AblationMode,
    pub profile: TaskProfile,
    /// The plan used for both fitness and the final report.
    pub plan: MetricPlan,
    pub best_prompt: String,
    /// Best evolved prompt with its fitness-split scores; `None` when
    /// evolution is skipped.
    pub best: Option<ScoredPrompt>,
    pub logs: Vec<GenerationLog>,
    /// Held-out evaluation of `best_prompt`.
    pub eval: EvalOutcome,
}

/// Runs the optimize flow with one component optionally disabled.
pub fn run_pipeline(
    inputs: &PipelineInputs,
    mode: AblationMode,
) -> Result<PipelineOutcome, PipelineError> {
    inputs
        .templates
        .validate()
        .map_err(PipelineError::InvalidInput)?;
    let (dev, held_out) = split_dev(&inputs.items, inputs.dev_fraction)?;
    let (profile, selected) = inputs.profile_and_plan()?;
    let plan = match mode {
        AblationMode::SingleMetric => MetricPlan::single(MetricKind::Similarity),
        _ => selected,
    };
    log::info!("task {} ({:?}), plan {plan}", profile.task_type, profile.source);

    let (best_prompt, best, logs) = match mode {
        AblationMode::NoPromptOptimization => (GENERIC_PROMPT.to_string(), None, Vec::new()),
        AblationMode::None | AblationMode::SingleMetric => {
            let evolver = Evolver {
                llm: Arc::clone(&inputs.llm),
                settings: inputs.settings.clone(),
                templates: inputs.templates.clone(),
                library: inputs.library.clone(),
            };
            let context = EvaluationContext {
                items: dev,
                llm: Arc::clone(&inputs.llm),
                settings: inputs.settings.clone(),
                providers: inputs.providers.clone(),
            };
            let description = inputs
                .task_description
                .clone()
                .unwrap_or_else(|| profile.task_type.default_description().to_string());
            let outcome = evolver.evolve(&description, &plan, &context, &inputs.evolution)?;
            (outcome.best.prompt.text.clone(), Some(outcome.best), outcome.logs)
        }
    };

    let setup = EvalSetup {
        dataset_name: &inputs.dataset_name,
        plan: &plan,
        llm: inputs.llm.as_ref(),
        settings: &inputs.settings,
        providers: &inputs.providers,
    };
    let eval = run_eval(&best_prompt, &held_out, &setup)?;
    Ok(PipelineOutcome {
        mode,
        profile,
        plan,
        best_prompt,
        best,
        logs,
        eval,
    })
}
