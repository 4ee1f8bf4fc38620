use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use promptevo_core::evolution::GenerationLog;
use promptevo_core::harness::{load_dataset, run_eval, AblationMode, EvalOutcome, EvalSetup};
use promptevo_core::llm::CachedProvider;
use promptevo_core::metrics::{MetricKind, MetricPlan};
use promptevo_core::pipeline::{run_pipeline, PipelineInputs};
use promptevo_core::{DatasetItem, TaskProfile};
use serde::Serialize;

use crate::artifacts::Staged;
use crate::config::{ConfigError, RunConfig};

/// Failures split by exit code: configuration problems exit 2, the rest 1.
#[derive(Debug)]
pub enum CommandError {
    Config(ConfigError),
    Run(anyhow::Error),
}

impl From<ConfigError> for CommandError {
    fn from(e: ConfigError) -> Self {
        CommandError::Config(e)
    }
}

impl From<anyhow::Error> for CommandError {
    fn from(e: anyhow::Error) -> Self {
        CommandError::Run(e)
    }
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn jsonl<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut s = String::new();
    for r in rows {
        s.push_str(&serde_json::to_string(r)?);
        s.push('\n');
    }
    Ok(s)
}

struct Prepared {
    items: Vec<DatasetItem>,
    inputs: PipelineInputs,
    llm: std::sync::Arc<CachedProvider>,
}

fn prepare(cfg: &RunConfig) -> Result<Prepared, CommandError> {
    let items = load_dataset(cfg.dataset_path(), cfg.limit)
        .map_err(|e| CommandError::Config(ConfigError(e.to_string())))?;
    let limiter = cfg.limiter();
    let llm = cfg.llm(limiter.clone())?;
    let mut inputs = PipelineInputs::new(
        cfg.dataset_label(),
        items.clone(),
        llm.clone(),
        cfg.metric_providers(limiter),
    );
    inputs.settings = cfg.request_settings();
    inputs.library = cfg.library()?;
    inputs.templates = cfg.templates()?;
    inputs.evolution = cfg.evolution_config();
    inputs.fallback = cfg.fallback_table()?;
    inputs.selection_examples = cfg.selection_examples;
    inputs.dev_fraction = cfg.dev_fraction;
    inputs.task_description = cfg.task_description.clone();
    Ok(Prepared { items, inputs, llm })
}

fn stage_eval(staged: &mut Staged, eval: &EvalOutcome) -> Result<()> {
    staged.write("report.json", json(&eval.report)?)?;
    staged.write("report.txt", eval.report.to_table())?;
    staged.write("records.jsonl", jsonl(&eval.records)?)?;
    if !eval.failures.is_empty() {
        staged.write("failures.jsonl", jsonl(&eval.failures)?)?;
    }
    Ok(())
}

fn headline(eval: &EvalOutcome) -> String {
    match eval.report.similarity_percentage {
        Some(p) => format!("similarity {p:.2}%, fused {:.4}", eval.report.mean_fused),
        None => format!("fused {:.4}", eval.report.mean_fused),
    }
}

pub fn optimize(cfg: &RunConfig) -> Result<(), CommandError> {
    let prepared = prepare(cfg)?;
    let out = run_pipeline(&prepared.inputs, cfg.mode)
        .map_err(|e| anyhow!(e).context("optimize failed"))?;
    log::info!(
        "{} completion calls, {} cache hits",
        prepared.llm.inner_calls(),
        prepared.llm.hits()
    );

    let dest = cfg.output_dir();
    let write = || -> Result<PathBuf> {
        let mut staged = Staged::new(&dest)?;
        staged.write("config.toml", cfg.snapshot()?)?;
        staged.write("best_prompt.txt", format!("{}\n", out.best_prompt))?;
        staged.write("plan.json", json(&out.plan)?)?;
        staged.write("profile.json", json(&out.profile)?)?;
        staged.write("generations.jsonl", GenerationLog::to_jsonl(&out.logs)?)?;
        stage_eval(&mut staged, &out.eval)?;
        Ok(staged.commit()?)
    };
    let dir = write().with_context(|| format!("writing artifacts to {}", dest.display()))?;

    println!("mode: {}", cfg.mode);
    println!("task: {} ({:?})", out.profile.task_type, out.profile.source);
    println!("plan: {}", out.plan);
    println!("best prompt:\n{}", out.best_prompt);
    println!(
        "held-out ({} items): {}",
        out.eval.report.item_count,
        headline(&out.eval)
    );
    println!("artifacts: {}", dir.display());
    Ok(())
}

fn load_plan(path: &Path) -> Result<MetricPlan, CommandError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("plan file {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CommandError::Config(ConfigError(format!("plan file {}: {e}", path.display()))))
}

pub fn evaluate(
    cfg: &RunConfig,
    prompt_file: &Path,
    plan_file: Option<&Path>,
) -> Result<(), CommandError> {
    let prompt = std::fs::read_to_string(prompt_file)
        .map_err(|e| ConfigError(format!("prompt file {}: {e}", prompt_file.display())))?;
    let prompt = prompt.trim();
    if prompt.is_empty() {
        return Err(ConfigError(format!("prompt file {} is empty", prompt_file.display())).into());
    }
    let prepared = prepare(cfg)?;
    let (profile, plan): (Option<TaskProfile>, MetricPlan) = match plan_file {
        Some(p) => (None, load_plan(p)?),
        None if cfg.mode == AblationMode::SingleMetric => {
            (None, MetricPlan::single(MetricKind::Similarity))
        }
        None => {
            let (profile, plan) = prepared.inputs.profile_and_plan().map_err(|e| anyhow!(e))?;
            (Some(profile), plan)
        }
    };
    let inputs = &prepared.inputs;
    let setup = EvalSetup {
        dataset_name: &inputs.dataset_name,
        plan: &plan,
        llm: inputs.llm.as_ref(),
        settings: &inputs.settings,
        providers: &inputs.providers,
    };
    let eval = run_eval(prompt, &prepared.items, &setup)
        .map_err(|e| anyhow!(e).context("evaluate failed"))?;

    let dest = cfg.output_dir();
    let write = || -> Result<PathBuf> {
        let mut staged = Staged::new(&dest)?;
        staged.write("config.toml", cfg.snapshot()?)?;
        staged.write("plan.json", json(&plan)?)?;
        if let Some(p) = &profile {
            staged.write("profile.json", json(p)?)?;
        }
        stage_eval(&mut staged, &eval)?;
        Ok(staged.commit()?)
    };
    let dir = write().with_context(|| format!("writing artifacts to {}", dest.display()))?;
    print!("{}", eval.report.to_table());
    println!("artifacts: {}", dir.display());
    Ok(())
}

#[derive(Serialize)]
struct Classification<'a> {
    profile: &'a TaskProfile,
    plan: &'a MetricPlan,
}

pub fn classify(cfg: &RunConfig) -> Result<(), CommandError> {
    let prepared = prepare(cfg)?;
    let (profile, plan) = prepared.inputs.profile_and_plan().map_err(|e| anyhow!(e))?;
    let plan = if cfg.mode == AblationMode::SingleMetric {
        MetricPlan::single(MetricKind::Similarity)
    } else {
        plan
    };
    print!(
        "{}",
        json(&Classification {
            profile: &profile,
            plan: &plan,
        })?
    );
    Ok(())
}

/// Per-generation table of best and mean fused scores.
pub fn render_generations(logs: &[GenerationLog]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>10}  {:>10}  {:>10}  {:>10}  best prompt",
        "generation", "best", "mean", "size"
    );
    for log in logs {
        let mean = log.population.iter().map(|p| p.fused).sum::<f64>() / log.population.len().max(1) as f64;
        let text = log.best.prompt.text.replace('\n', " ");
        let short: String = text.chars().take(60).collect();
        let ellipsis = if text.chars().count() > 60 { "..." } else { "" };
        let _ = writeln!(
            out,
            "{:>10}  {:>10.4}  {:>10.4}  {:>10}  {} {short}{ellipsis}",
            log.generation,
            log.best.fused,
            mean,
            log.population.len(),
            log.best.prompt.id,
        );
    }
    out
}

pub fn report(path: &Path) -> Result<(), CommandError> {
    let file = if path.is_dir() {
        path.join("generations.jsonl")
    } else {
        path.to_path_buf()
    };
    let text = std::fs::read_to_string(&file)
        .map_err(|e| ConfigError(format!("generation log {}: {e}", file.display())))?;
    let logs = GenerationLog::from_jsonl(&text)
        .map_err(|e| anyhow!("{}: {e}", file.display()))?;
    if logs.is_empty() {
        println!("{} has no generations (evolution was skipped)", file.display());
    } else {
        print!("{}", render_generations(&logs));
    }
    if path.is_dir() {
        if let Ok(table) = std::fs::read_to_string(path.join("report.txt")) {
            println!();
            print!("{table}");
        }
    }
    Ok(())
}
