//! Random forest over binary-labeled feature vectors: bagged CART trees with
//! Gini splits and square-root feature subsampling, plus out-of-bag accuracy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub num_trees: usize,
    pub min_samples_split: usize,
    /// Features considered per split; defaults to `sqrt(total features)`.
    pub max_features: Option<usize>,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig { num_trees: 75, min_samples_split: 2, max_features: None, seed: 42 }
    }
}

#[derive(Debug, Error)]
pub enum ForestError {
    #[error("training set is empty")]
    Empty,
    #[error("training set contains a single class; both labels are required")]
    SingleClass,
    #[error("feature vectors have inconsistent lengths")]
    RaggedFeatures,
    #[error("config: {0}")]
    BadConfig(&'static str),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf {
        negatives: u32,
        positives: u32,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    /// Positive-class frequency at the leaf this sample lands in.
    pub fn predict_proba(&self, features: &[f64]) -> f64 {
        let mut index = 0usize;
        loop {
            match &self.nodes[index] {
                Node::Leaf { negatives, positives } => {
                    let total = negatives + positives;
                    return if total == 0 { 0.5 } else { f64::from(*positives) / f64::from(total) };
                }
                Node::Split { feature, threshold, left, right } => {
                    index = if features[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub config: ForestConfig,
    trees: Vec<DecisionTree>,
    /// Accuracy over samples left out of each tree's bootstrap, when defined.
    pub oob_accuracy: Option<f64>,
}

impl RandomForest {
    pub fn fit(
        features: &[Vec<f64>],
        labels: &[bool],
        config: &ForestConfig,
    ) -> Result<Self, ForestError> {
        if features.is_empty() || features.len() != labels.len() {
            return Err(ForestError::Empty);
        }
        if config.num_trees == 0 {
            return Err(ForestError::BadConfig("at least one tree is required"));
        }
        if config.min_samples_split < 2 {
            return Err(ForestError::BadConfig("min_samples_split must be at least 2"));
        }
        let width = features[0].len();
        if features.iter().any(|f| f.len() != width) {
            return Err(ForestError::RaggedFeatures);
        }
        if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
            return Err(ForestError::SingleClass);
        }

        let max_features = config
            .max_features
            .unwrap_or_else(|| (width as f64).sqrt().floor().max(1.0) as usize)
            .min(width);

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut trees = Vec::with_capacity(config.num_trees);
        // oob_votes[i] = (correct votes, total votes) over trees missing i.
        let mut oob_votes = vec![(0u32, 0u32); features.len()];
        for _ in 0..config.num_trees {
            let mut in_bag = vec![false; features.len()];
            let bootstrap: Vec<usize> = (0..features.len())
                .map(|_| {
                    let i = rng.random_range(0..features.len());
                    in_bag[i] = true;
                    i
                })
                .collect();
            let mut builder = TreeBuilder {
                features,
                labels,
                min_samples_split: config.min_samples_split,
                max_features,
                width,
                nodes: Vec::new(),
            };
            builder.grow(bootstrap, &mut rng);
            let tree = DecisionTree { nodes: builder.nodes };
            for (i, bagged) in in_bag.iter().enumerate() {
                if !bagged {
                    let vote = tree.predict_proba(&features[i]) >= 0.5;
                    oob_votes[i].1 += 1;
                    if vote == labels[i] {
                        oob_votes[i].0 += 1;
                    }
                }
            }
            trees.push(tree);
        }

        let scored: Vec<f64> = oob_votes
            .iter()
            .filter(|(_, total)| *total > 0)
            .map(|(correct, total)| f64::from(*correct) / f64::from(*total))
            .collect();
        let oob_accuracy = if scored.is_empty() {
            None
        } else {
            Some(scored.iter().sum::<f64>() / scored.len() as f64)
        };

        Ok(RandomForest { config: config.clone(), trees, oob_accuracy })
    }

    /// Mean positive-class frequency across trees.
    pub fn predict_proba(&self, features: &[f64]) -> f64 {
        let total: f64 = self.trees.iter().map(|t| t.predict_proba(features)).sum();
        total / self.trees.len() as f64
    }

    /// Majority vote of the trees.
    pub fn predict(&self, features: &[f64]) -> bool {
        self.predict_proba(features) >= 0.5
    }

    pub fn num_trees(&self) -> usize {
        self.trees.len()
    }
}

struct TreeBuilder<'a> {
    features: &'a [Vec<f64>],
    labels: &'a [bool],
    min_samples_split: usize,
    max_features: usize,
    width: usize,
    nodes: Vec<Node>,
}

impl TreeBuilder<'_> {
    fn grow(&mut self, samples: Vec<usize>, rng: &mut ChaCha8Rng) -> usize {
        let positives = samples.iter().filter(|&&i| self.labels[i]).count() as u32;
        let negatives = samples.len() as u32 - positives;
        let node_index = self.nodes.len();

        if positives == 0 || negatives == 0 || samples.len() < self.min_samples_split {
            self.nodes.push(Node::Leaf { negatives, positives });
            return node_index;
        }
        let Some((feature, threshold)) = self.best_split(&samples, rng) else {
            self.nodes.push(Node::Leaf { negatives, positives });
            return node_index;
        };

        // Reserve the slot, then fill children.
        self.nodes.push(Node::Leaf { negatives, positives });
        let (left_samples, right_samples): (Vec<usize>, Vec<usize>) =
            samples.into_iter().partition(|&i| self.features[i][feature] <= threshold);
        let left = self.grow(left_samples, rng);
        let right = self.grow(right_samples, rng);
        self.nodes[node_index] = Node::Split { feature, threshold, left, right };
        node_index
    }

    /// Best Gini-gain split over a random feature subset; None when nothing
    /// improves purity.
    fn best_split(&self, samples: &[usize], rng: &mut ChaCha8Rng) -> Option<(usize, f64)> {
        let mut candidates: Vec<usize> = (0..self.width).collect();
        // Partial Fisher-Yates: the first max_features entries are the subset.
        for i in 0..self.max_features.min(self.width) {
            let j = rng.random_range(i..self.width);
            candidates.swap(i, j);
        }
        candidates.truncate(self.max_features);
        candidates.sort_unstable();

        let parent_gini = gini(
            samples.iter().filter(|&&i| self.labels[i]).count(),
            samples.len(),
        );
        let mut best: Option<(f64, usize, f64)> = None;
        for &feature in &candidates {
            let mut values: Vec<(f64, bool)> =
                samples.iter().map(|&i| (self.features[i][feature], self.labels[i])).collect();
            values.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
            let total = values.len();
            let total_pos = values.iter().filter(|(_, l)| *l).count();
            let mut left_pos = 0usize;
            for split_at in 1..total {
                if values[split_at - 1].1 {
                    left_pos += 1;
                }
                if values[split_at].0 == values[split_at - 1].0 {
                    continue;
                }
                let left_n = split_at;
                let right_n = total - split_at;
                let right_pos = total_pos - left_pos;
                let weighted = (left_n as f64 * gini(left_pos, left_n)
                    + right_n as f64 * gini(right_pos, right_n))
                    / total as f64;
                let gain = parent_gini - weighted;
                let threshold = (values[split_at - 1].0 + values[split_at].0) / 2.0;
                if gain > 1e-12 && best.map(|(g, _, _)| g < gain).unwrap_or(true) {
                    best = Some((gain, feature, threshold));
                }
            }
        }
        best.map(|(_, feature, threshold)| (feature, threshold))
    }
}

fn gini(positives: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = positives as f64 / total as f64;
    2.0 * p * (1.0 - p)
}
