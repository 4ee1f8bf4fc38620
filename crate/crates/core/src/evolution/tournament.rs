use std::cmp::Ordering;

use super::{EvolutionError, SeededRng};
use crate::metrics::ScoredPrompt;

/// Higher fused score wins; equal scores go to the lexicographically smaller id.
pub(crate) fn rank(a: &ScoredPrompt, b: &ScoredPrompt) -> Ordering {
    b.fused
        .partial_cmp(&a.fused)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.prompt.id.cmp(&b.prompt.id))
}

/// Draws `k` distinct members uniformly and returns the index of the winner.
pub fn tournament_select_index(
    population: &[ScoredPrompt],
    k: usize,
    rng: &mut SeededRng,
) -> Result<usize, EvolutionError> {
    if population.is_empty() {
        return Err(EvolutionError::Tournament("population is empty".into()));
    }
    if k == 0 || k > population.len() {
        return Err(EvolutionError::Tournament(format!(
            "tournament size {k} must be in 1..={}",
            population.len()
        )));
    }
    let contenders = rng.sample_distinct(population.len(), k);
    let winner = contenders
        .into_iter()
        .min_by(|&a, &b| rank(&population[a], &population[b]))
        .expect("k >= 1");
    Ok(winner)
}

pub fn tournament_select<'a>(
    population: &'a [ScoredPrompt],
    k: usize,
    rng: &mut SeededRng,
) -> Result<&'a ScoredPrompt, EvolutionError> {
    tournament_select_index(population, k, rng).map(|i| &population[i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{MetricKind, MetricPlan, MetricScores};
    use crate::prompt::Prompt;

    fn scored(id: &str, fused: f64) -> ScoredPrompt {
        let plan = MetricPlan::single(MetricKind::Similarity);
        let scores = MetricScores::new().with(MetricKind::Similarity, fused).unwrap();
        ScoredPrompt::new(Prompt::seed(id, id), &plan, scores).unwrap()
    }

    #[test]
    fn single_member() {
        let pop = vec![scored("a", 0.3)];
        let mut rng = SeededRng::new(0);
        assert_eq!(tournament_select(&pop, 1, &mut rng).unwrap().prompt.id, "a");
    }

    #[test]
    fn errors() {
        let mut rng = SeededRng::new(0);
        assert!(tournament_select(&[], 1, &mut rng).is_err());
        let pop = vec![scored("a", 0.3)];
        assert!(tournament_select(&pop, 2, &mut rng).is_err());
        assert!(tournament_select(&pop, 0, &mut rng).is_err());
    }

    #[test]
    fn ties_break_by_id() {
        let pop = vec![scored("b", 0.5), scored("a", 0.5), scored("c", 0.1)];
        let mut rng = SeededRng::new(9);
        for _ in 0..20 {
            assert_eq!(tournament_select(&pop, 3, &mut rng).unwrap().prompt.id, "a");
        }
    }
}
