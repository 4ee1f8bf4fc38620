use std::sync::Arc;

use rayon::prelude::*;

use super::complexity::{complexity_score, ComplexityConfig};
use super::diversity::{diversity_of_tokens, DEFAULT_NGRAM_ORDERS};
use super::fluency::fluency_score;
use super::similarity::similarity_score;
use super::text::tokenize;
use super::{MetricError, MetricKind, MetricPlan, MetricScores, ScoredPrompt};
use crate::backends::{Embedder, HashEmbedder, PerplexityProvider, RepetitionPerplexity};
use crate::harness::DatasetItem;
use crate::llm::{CompletionProvider, RequestSettings};
use crate::prompt::{compose_query, Prompt};

/// Everything needed to compute the four metrics.
#[derive(Clone)]
pub struct MetricProviders {
    pub embedder: Option<Arc<dyn Embedder>>,
    pub perplexity: Option<Arc<dyn PerplexityProvider>>,
    pub diversity_orders: Vec<usize>,
    pub complexity: ComplexityConfig,
}

impl MetricProviders {
    /// Deterministic offline providers with default settings.
    pub fn offline() -> Self {
        MetricProviders {
            embedder: Some(Arc::new(HashEmbedder::new())),
            perplexity: Some(Arc::new(RepetitionPerplexity)),
            diversity_orders: DEFAULT_NGRAM_ORDERS.to_vec(),
            complexity: ComplexityConfig::default(),
        }
    }

    /// Fails if a metric in `plan` has no provider.
    pub fn check_plan(&self, plan: &MetricPlan) -> Result<(), MetricError> {
        for kind in plan.kinds() {
            match kind {
                MetricKind::Similarity if self.embedder.is_none() => {
                    return Err(MetricError::MissingProvider("embedding", kind))
                }
                MetricKind::Fluency if self.perplexity.is_none() => {
                    return Err(MetricError::MissingProvider("perplexity", kind))
                }
                MetricKind::Diversity
                    if self.diversity_orders.is_empty() || self.diversity_orders.contains(&0) =>
                {
                    return Err(MetricError::InvalidOrders)
                }
                MetricKind::Complexity => self.complexity.validate()?,
                _ => {}
            }
        }
        Ok(())
    }

    fn diversity(&self, output: &str) -> Result<f64, MetricError> {
        // Outputs shorter than the largest order are scored on the orders they can fill.
        let tokens = tokenize(output);
        let usable: Vec<usize> = self
            .diversity_orders
            .iter()
            .copied()
            .filter(|&n| n <= tokens.len())
            .collect();
        if usable.is_empty() {
            return Err(MetricError::TextTooShort {
                tokens: tokens.len(),
                order: self.diversity_orders.iter().copied().min().unwrap_or(1),
            });
        }
        diversity_of_tokens(&tokens, &usable)
    }
}

/// Scores one model output against its reference for every metric in `plan`.
pub fn score_output(
    plan: &MetricPlan,
    output: &str,
    reference: &str,
    providers: &MetricProviders,
) -> Result<MetricScores, MetricError> {
    providers.check_plan(plan)?;
    let mut scores = MetricScores::new();
    for kind in plan.kinds() {
        let value = match kind {
            MetricKind::Similarity => {
                let embedder = providers
                    .embedder
                    .as_deref()
                    .ok_or(MetricError::MissingProvider("embedding", kind))?;
                similarity_score(output, reference, embedder)?
            }
            MetricKind::Diversity => providers.diversity(output)?,
            MetricKind::Fluency => {
                let ppl = providers
                    .perplexity
                    .as_deref()
                    .ok_or(MetricError::MissingProvider("perplexity", kind))?;
                fluency_score(output, ppl)?
            }
            MetricKind::Complexity => complexity_score(output, &providers.complexity)?,
        };
        scores.insert(kind, value)?;
    }
    Ok(scores)
}

/// Per-metric arithmetic mean over `(output, reference)` samples.
pub fn score_samples(
    plan: &MetricPlan,
    samples: &[(String, String)],
    providers: &MetricProviders,
) -> Result<MetricScores, MetricError> {
    if samples.is_empty() {
        return Err(MetricError::NoItems);
    }
    let per_item = samples
        .iter()
        .map(|(out, reference)| score_output(plan, out, reference, providers))
        .collect::<Result<Vec<_>, _>>()?;
    MetricScores::mean(&per_item)
}

/// The fitness-evaluation sample: items answered by the target model and the
/// metric providers used to score those answers.
#[derive(Clone)]
pub struct EvaluationContext {
    pub items: Vec<DatasetItem>,
    pub llm: Arc<dyn CompletionProvider>,
    pub settings: RequestSettings,
    pub providers: MetricProviders,
}

impl EvaluationContext {
    /// Runs `prompt_text` against every item, in item order.
    pub fn outputs(&self, prompt_text: &str) -> Result<Vec<String>, MetricError> {
        self.items
            .par_iter()
            .map(|item| {
                let output = self
                    .settings
                    .ask(self.llm.as_ref(), compose_query(prompt_text, &item.question))
                    .map_err(|e| MetricError::Item {
                        item: item.id.clone(),
                        source: Box::new(e.into()),
                    })?;
                if output.is_empty() {
                    return Err(MetricError::EmptyOutput {
                        item: item.id.clone(),
                    });
                }
                Ok(output)
            })
            .collect()
    }
}

/// Answers the context's items with `prompt`, scores the answers, averages per
/// metric and fuses under `plan`.
pub fn score_prompt(
    prompt: &Prompt,
    plan: &MetricPlan,
    context: &EvaluationContext,
) -> Result<ScoredPrompt, MetricError> {
    if context.items.is_empty() {
        return Err(MetricError::NoItems);
    }
    context.providers.check_plan(plan)?;
    let outputs = context.outputs(&prompt.text)?;
    let per_item = outputs
        .iter()
        .zip(&context.items)
        .map(|(out, item)| {
            score_output(plan, out, &item.reference, &context.providers).map_err(|e| {
                MetricError::Item {
                    item: item.id.clone(),
                    source: Box::new(e),
                }
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mean = MetricScores::mean(&per_item)?;
    ScoredPrompt::new(prompt.clone(), plan, mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{MockProvider, MockScript};
    use crate::metrics::normalize_weights;

    fn item(id: &str, q: &str, r: &str) -> DatasetItem {
        DatasetItem {
            id: id.into(),
            question: q.into(),
            reference: r.into(),
        }
    }

    #[test]
    fn identical_output_scores_one() {
        let plan = MetricPlan::single(MetricKind::Similarity);
        let s = score_samples(
            &plan,
            &[("six kittens".into(), "six kittens".into())],
            &MetricProviders::offline(),
        )
        .unwrap();
        assert!((s.get(MetricKind::Similarity).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn similarity_plus_diversity() {
        let plan =
            normalize_weights([(MetricKind::Similarity, 0.5), (MetricKind::Diversity, 0.5)]).unwrap();
        let providers = MetricProviders {
            diversity_orders: vec![2],
            ..MetricProviders::offline()
        };
        let scores =
            score_samples(&plan, &[("a b a b".into(), "a b a b".into())], &providers).unwrap();
        let scored = ScoredPrompt::new(Prompt::seed("p", "x"), &plan, scores).unwrap();
        assert!((scored.fused - 0.8333).abs() < 1e-3);
    }

    #[test]
    fn fluency_without_provider_fails() {
        let plan = MetricPlan::single(MetricKind::Fluency);
        let providers = MetricProviders {
            perplexity: None,
            ..MetricProviders::offline()
        };
        assert!(matches!(
            score_output(&plan, "text", "ref", &providers),
            Err(MetricError::MissingProvider("perplexity", MetricKind::Fluency))
        ));
    }

    #[test]
    fn short_outputs_use_feasible_orders() {
        let plan = MetricPlan::single(MetricKind::Diversity);
        let s = score_output(&plan, "6", "6", &MetricProviders::offline()).unwrap();
        assert_eq!(s.get(MetricKind::Diversity), Some(1.0));
        assert!(score_output(&plan, "!!", "6", &MetricProviders::offline()).is_err());
    }

    #[test]
    fn score_prompt_with_echo_model() {
        let ctx = EvaluationContext {
            items: vec![item("1", "q", "r")],
            llm: Arc::new(MockProvider::new(MockScript::new("the answer"))),
            settings: RequestSettings::default(),
            providers: MetricProviders::offline(),
        };
        let plan = MetricPlan::single(MetricKind::Similarity);
        let ctx_same = EvaluationContext {
            items: vec![item("1", "q", "the answer")],
            ..ctx.clone()
        };
        let scored = score_prompt(&Prompt::seed("p", "solve"), &plan, &ctx_same).unwrap();
        assert!((scored.fused - 1.0).abs() < 1e-12);
        let scored = score_prompt(&Prompt::seed("p", "solve"), &plan, &ctx).unwrap();
        assert_eq!(scored.fused, 0.0);
    }

    #[test]
    fn empty_output_is_an_error() {
        let ctx = EvaluationContext {
            items: vec![item("7", "q", "r")],
            llm: Arc::new(MockProvider::new(MockScript::new("   "))),
            settings: RequestSettings::default(),
            providers: MetricProviders::offline(),
        };
        let err = score_prompt(
            &Prompt::seed("p", "x"),
            &MetricPlan::single(MetricKind::Similarity),
            &ctx,
        )
        .unwrap_err();
        assert!(matches!(err, MetricError::EmptyOutput { ref item } if item == "7"));
    }
}
