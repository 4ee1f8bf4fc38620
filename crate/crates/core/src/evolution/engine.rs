use std::sync::Arc;

use rayon::prelude::*;

use super::operators::prompt_id;
use super::tournament::{rank, tournament_select};
use super::{EvolutionConfig, EvolutionError, GenerationLog, SeededRng, StrategyLibrary};
use crate::llm::{CompletionProvider, RequestSettings};
use crate::metrics::{score_prompt, EvaluationContext, MetricPlan, ScoredPrompt};
use crate::prompt::Prompt;
use crate::templates::Templates;

/// Drives initialization, mutation and selection with one LLM.
#[derive(Clone)]
pub struct Evolver {
    pub llm: Arc<dyn CompletionProvider>,
    pub settings: RequestSettings,
    pub templates: Templates,
    pub library: StrategyLibrary,
}

#[derive(Debug, Clone)]
pub struct EvolutionOutcome {
    pub best: ScoredPrompt,
    pub logs: Vec<GenerationLog>,
}

fn best_of(population: &[ScoredPrompt]) -> &ScoredPrompt {
    population
        .iter()
        .min_by(|a, b| rank(a, b))
        .expect("population is never empty")
}

fn score_all(
    prompts: &[Prompt],
    plan: &MetricPlan,
    context: &EvaluationContext,
) -> Result<Vec<ScoredPrompt>, EvolutionError> {
    prompts
        .par_iter()
        .map(|p| score_prompt(p, plan, context).map_err(EvolutionError::from))
        .collect()
}

impl Evolver {
    pub fn new(llm: Arc<dyn CompletionProvider>, library: StrategyLibrary) -> Self {
        Evolver {
            llm,
            settings: RequestSettings::default(),
            templates: Templates::default(),
            library,
        }
    }

    /// Runs the search and returns the best prompt seen plus one log per
    /// generation (generation 0 is the initial population).
    pub fn evolve(
        &self,
        task_description: &str,
        plan: &MetricPlan,
        context: &EvaluationContext,
        config: &EvolutionConfig,
    ) -> Result<EvolutionOutcome, EvolutionError> {
        config.validate()?;
        context.providers.check_plan(plan)?;
        let at = |generation: u32| {
            move |e: EvolutionError| EvolutionError::Generation {
                generation,
                source: Box::new(e),
            }
        };
        let reached = |best: &ScoredPrompt| config.target_score.is_some_and(|t| best.fused >= t);

        let mut rng = SeededRng::new(config.seed);
        let initial = self
            .initialize_population(task_description, config.population_size, &mut rng)
            .map_err(at(0))?;
        let mut population = score_all(&initial, plan, context).map_err(at(0))?;
        population.sort_by(rank);
        let mut best = best_of(&population).clone();
        let mut logs = vec![GenerationLog {
            generation: 0,
            population: population.clone(),
            best: best.clone(),
        }];
        log::info!("generation 0: best {:.4} ({})", best.fused, best.prompt.id);

        for round in 1..=config.generations {
            if reached(&best) {
                break;
            }
            let mut children = Vec::with_capacity(config.population_size);
            for slot in 0..config.population_size {
                let parent = tournament_select(&population, config.tournament_size, &mut rng)
                    .map_err(at(round))?;
                let child = self
                    .mutate_prompt(&parent.prompt, prompt_id(round, slot), &mut rng)
                    .map_err(at(round))?;
                children.push(child);
            }
            let mut next = score_all(&children, plan, context).map_err(at(round))?;
            if config.elitism {
                next.push(best.clone());
            }
            next.sort_by(rank);
            next.truncate(config.population_size);
            population = next;

            let generation_best = best_of(&population).clone();
            if rank(&generation_best, &best).is_lt() {
                best = generation_best.clone();
            }
            log::info!(
                "generation {round}: best {:.4} ({}), overall {:.4}",
                generation_best.fused,
                generation_best.prompt.id,
                best.fused
            );
            logs.push(GenerationLog {
                generation: round,
                population: population.clone(),
                best: generation_best,
            });
        }
        Ok(EvolutionOutcome { best, logs })
    }
}
