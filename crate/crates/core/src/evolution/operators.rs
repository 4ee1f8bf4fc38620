use super::{EvolutionError, Evolver, SeededRng};
use crate::prompt::Prompt;
use crate::templates::render;

pub(crate) fn prompt_id(round: u32, slot: usize) -> String {
    format!("p{round:03}-{slot:03}")
}

impl Evolver {
    /// Builds generation 0: each slot draws a thinking style, asks the LLM to
    /// turn style plus task description into an instruction, and retries once
    /// with a fresh style when the result duplicates an earlier prompt.
    pub fn initialize_population(
        &self,
        task_description: &str,
        size: usize,
        rng: &mut SeededRng,
    ) -> Result<Vec<Prompt>, EvolutionError> {
        let styles = self.library.thinking_styles();
        let mut population: Vec<Prompt> = Vec::with_capacity(size);
        for slot in 0..size {
            let mut text = String::new();
            for attempt in 0..2 {
                let style = &styles[rng.index(styles.len())];
                let request = render(
                    &self.templates.initialization,
                    &[("style", style), ("task", task_description)],
                );
                text = self
                    .settings
                    .ask(self.llm.as_ref(), request)
                    .map_err(|source| EvolutionError::Initialization { slot, source })?;
                if text.is_empty() {
                    return Err(EvolutionError::EmptyResponse(format!(
                        "initializing slot {slot}"
                    )));
                }
                let duplicate = population.iter().any(|p| p.text == text);
                if !duplicate || attempt == 1 {
                    break;
                }
            }
            population.push(Prompt::seed(prompt_id(0, slot), text));
        }
        Ok(population)
    }

    /// Rewrites `parent` with one randomly drawn mutation strategy.
    pub fn mutate_prompt(
        &self,
        parent: &Prompt,
        child_id: String,
        rng: &mut SeededRng,
    ) -> Result<Prompt, EvolutionError> {
        let strategies = self.library.mutation_strategies();
        let strategy = &strategies[rng.index(strategies.len())];
        let request = render(
            &self.templates.mutation,
            &[("strategy", strategy), ("parent", &parent.text)],
        );
        let text = self
            .settings
            .ask(self.llm.as_ref(), request)
            .map_err(|source| EvolutionError::Mutation {
                parent: parent.id.clone(),
                source,
            })?;
        if text.is_empty() {
            return Err(EvolutionError::EmptyResponse(format!(
                "mutating prompt `{}`",
                parent.id
            )));
        }
        Ok(Prompt::child_of(parent, child_id, text, strategy.clone()))
    }
}
