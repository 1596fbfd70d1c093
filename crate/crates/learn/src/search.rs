//! Bounded random search over training hyperparameters.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::Norm;
use crate::train::TrainConfig;

/// Candidate values per hyperparameter; learning rates are drawn
/// log-uniformly from the given range.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchSpace {
    pub dims: Vec<usize>,
    pub epochs: Vec<usize>,
    pub batch_sizes: Vec<usize>,
    pub learning_rate_range: (f64, f64),
    pub num_negatives: Vec<usize>,
    pub margins: Vec<f64>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            dims: vec![16, 32, 64, 128],
            epochs: vec![10, 20, 40],
            batch_sizes: vec![32, 64, 128, 256],
            learning_rate_range: (1e-3, 1e-1),
            num_negatives: vec![1, 2, 5, 10],
            margins: vec![0.5, 1.0, 2.0],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trial {
    pub config: TrainConfig,
    pub objective: f64,
}

/// Runs `budget` random trials and returns the best configuration with the
/// full trial log. Higher objective wins; ties keep the earlier trial.
pub fn random_search(
    space: &SearchSpace,
    budget: usize,
    seed: u64,
    mut objective: impl FnMut(&TrainConfig) -> f64,
) -> (TrainConfig, Vec<Trial>) {
    assert!(budget >= 1, "at least one trial is required");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trials = Vec::with_capacity(budget);
    let mut best: Option<usize> = None;
    for index in 0..budget {
        let (lo, hi) = space.learning_rate_range;
        let learning_rate = (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp();
        let config = TrainConfig {
            dim: *space.dims.choose(&mut rng).expect("dims non-empty"),
            epochs: *space.epochs.choose(&mut rng).expect("epochs non-empty"),
            batch_size: *space.batch_sizes.choose(&mut rng).expect("batch sizes non-empty"),
            learning_rate,
            num_negatives: *space.num_negatives.choose(&mut rng).expect("negatives non-empty"),
            margin: *space.margins.choose(&mut rng).expect("margins non-empty"),
            seed,
            norm: Norm::L2,
        };
        let score = objective(&config);
        trials.push(Trial { config, objective: score });
        if best.map(|b| trials[b].objective < score).unwrap_or(true) {
            best = Some(index);
        }
    }
    (trials[best.expect("budget >= 1")].config.clone(), trials)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_trial_returns_that_trial() {
        let (best, trials) = random_search(&SearchSpace::default(), 1, 42, |_| 0.5);
        assert_eq!(trials.len(), 1);
        assert_eq!(best, trials[0].config);
    }

    #[test]
    fn better_objective_wins() {
        let mut scores = [0.2, 0.9].into_iter();
        let (best, trials) = random_search(&SearchSpace::default(), 2, 42, |_| scores.next().unwrap());
        assert_eq!(trials[1].objective, 0.9);
        assert_eq!(best, trials[1].config);
    }

    #[test]
    fn seeded_runs_sample_identical_trial_sequences() {
        let space = SearchSpace::default();
        let run = || {
            let (_, trials) = random_search(&space, 5, 7, |c| c.learning_rate);
            trials.into_iter().map(|t| t.config).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn trial_log_covers_the_budget() {
        let (_, trials) = random_search(&SearchSpace::default(), 8, 1, |_| 1.0);
        assert_eq!(trials.len(), 8);
    }
}
