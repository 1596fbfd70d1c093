//! Walk-based entity embeddings: uniform random walks over the graph,
//! tokenized as entity/predicate/object sequences, fed to a skip-gram model
//! with negative sampling.
//!
//! Every entity node starts `walks_per_entity` walks of at most `max_depth`
//! edge traversals. Literal and blank objects appear as opaque tokens and end
//! the walk (they have no outgoing edges). Entities without outgoing edges
//! contribute single-token walks and keep their seeded initialization.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use kghist_core::{EntityId, Object, Triple};
use kghist_pipeline::graph::KnowledgeGraphState;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub vector_size: usize,
    pub epochs: usize,
    pub max_depth: usize,
    pub walks_per_entity: usize,
    pub window_size: usize,
    pub negative_samples: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            vector_size: 50,
            epochs: 50,
            max_depth: 5,
            walks_per_entity: 50,
            window_size: 5,
            negative_samples: 5,
            learning_rate: 0.025,
            seed: 42,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Token {
    Entity(EntityId),
    Literal(String),
    Blank(String),
}

struct Vocab {
    tokens: Vec<Token>,
    index: BTreeMap<Token, usize>,
}

impl Vocab {
    fn intern(&mut self, token: Token) -> usize {
        if let Some(&i) = self.index.get(&token) {
            return i;
        }
        let i = self.tokens.len();
        self.tokens.push(token.clone());
        self.index.insert(token, i);
        i
    }
}

/// Generates the walk corpus over a graph state.
fn walk_corpus(
    state: &KnowledgeGraphState,
    config: &WalkConfig,
    vocab: &mut Vocab,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<usize>> {
    // Adjacency: subject -> [(predicate token, object token, object entity?)].
    let mut adjacency: BTreeMap<EntityId, Vec<(usize, usize, Option<EntityId>)>> = BTreeMap::new();
    let mut nodes: std::collections::BTreeSet<EntityId> = Default::default();
    for Triple { subject, predicate, object } in &state.triples {
        nodes.insert(*subject);
        let predicate_token = vocab.intern(Token::Entity(*predicate));
        let (object_token, next) = match object {
            Object::Entity(id) => {
                nodes.insert(*id);
                (vocab.intern(Token::Entity(*id)), Some(*id))
            }
            Object::Literal { lexical, .. } => {
                (vocab.intern(Token::Literal(lexical.clone())), None)
            }
            Object::Blank(label) => (vocab.intern(Token::Blank(label.clone())), None),
        };
        adjacency.entry(*subject).or_default().push((predicate_token, object_token, next));
    }

    let mut corpus = Vec::new();
    for node in &nodes {
        let start_token = vocab.intern(Token::Entity(*node));
        for _ in 0..config.walks_per_entity {
            let mut walk = vec![start_token];
            let mut current = *node;
            for _ in 0..config.max_depth {
                let Some(edges) = adjacency.get(&current) else { break };
                let (predicate_token, object_token, next) =
                    edges[rng.random_range(0..edges.len())];
                walk.push(predicate_token);
                walk.push(object_token);
                match next {
                    Some(entity) => current = entity,
                    None => break,
                }
            }
            corpus.push(walk);
        }
    }
    corpus
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Trains skip-gram-with-negative-sampling embeddings over the walk corpus
/// and returns vectors for every entity token (items and properties alike).
pub fn walk_embeddings(
    state: &KnowledgeGraphState,
    config: &WalkConfig,
) -> BTreeMap<EntityId, Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut vocab = Vocab { tokens: Vec::new(), index: BTreeMap::new() };
    let corpus = walk_corpus(state, config, &mut vocab, &mut rng);
    let vocab_size = vocab.tokens.len();
    let d = config.vector_size;
    if vocab_size == 0 {
        return BTreeMap::new();
    }

    let bound = 0.5 / d as f64;
    let mut input: Vec<f64> = (0..vocab_size * d).map(|_| rng.random_range(-bound..bound)).collect();
    let mut output: Vec<f64> = vec![0.0; vocab_size * d];

    for _ in 0..config.epochs {
        for walk in &corpus {
            for (center_pos, &center) in walk.iter().enumerate() {
                let lo = center_pos.saturating_sub(config.window_size);
                let hi = (center_pos + config.window_size).min(walk.len() - 1);
                for (context_pos, &context) in walk.iter().enumerate().take(hi + 1).skip(lo) {
                    if context_pos == center_pos {
                        continue;
                    }
                    // Positive pair plus sampled negatives.
                    let mut gradient_accum = vec![0.0; d];
                    {
                        let center_vec = &input[center * d..(center + 1) * d];
                        let targets = std::iter::once((context, 1.0)).chain(
                            (0..config.negative_samples)
                                .map(|_| (rng.random_range(0..vocab_size), 0.0)),
                        );
                        for (target, label) in targets {
                            let target_vec = &output[target * d..(target + 1) * d];
                            let dot: f64 =
                                center_vec.iter().zip(target_vec).map(|(a, b)| a * b).sum();
                            let gap = (label - sigmoid(dot)) * config.learning_rate;
                            for i in 0..d {
                                gradient_accum[i] += gap * target_vec[i];
                            }
                            let base = target * d;
                            // Safe: output updates use the pre-update center.
                            for i in 0..d {
                                output[base + i] += gap * center_vec[i];
                            }
                        }
                    }
                    let base = center * d;
                    for i in 0..d {
                        input[base + i] += gradient_accum[i];
                    }
                }
            }
        }
    }

    let mut result = BTreeMap::new();
    for (i, token) in vocab.tokens.iter().enumerate() {
        if let Token::Entity(id) = token {
            result.insert(*id, input[i * d..(i + 1) * d].to_vec());
        }
    }
    result
}
