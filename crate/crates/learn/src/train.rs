//! Margin-ranking training over positive triples and sampled corruptions.
//!
//! Plain seeded SGD: for every (positive, corruption) pair the loss is
//! `max(0, margin - score(positive) + score(corruption))`, and gradients flow
//! into the five parameter blocks the pair touches. Updates are applied
//! pair by pair in a deterministic order, so a fixed seed reproduces the
//! model bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use kghist_core::{EntityId, Object, Triple};

use crate::embedding::{EmbeddingModel, ModelKind, Norm};
use crate::sampler::{NegativeSampler, SamplerConfig, SamplerContext, SamplerError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub dim: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub num_negatives: usize,
    pub margin: f64,
    pub seed: u64,
    pub norm: Norm,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 64,
            epochs: 10,
            batch_size: 128,
            learning_rate: 0.01,
            num_negatives: 5,
            margin: 1.0,
            seed: 42,
            norm: Norm::L2,
        }
    }
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("no entity-valued triples to train on")]
    EmptyTrainingSet,
    #[error("loss became NaN at epoch {epoch}, batch {batch}")]
    NaNLoss { epoch: usize, batch: usize },
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Model(#[from] crate::embedding::ModelError),
}

#[derive(Clone, Debug, Default)]
pub struct TrainReport {
    /// Mean pair loss per epoch.
    pub epoch_losses: Vec<f64>,
}

/// Entity-valued triples of a graph state, the trainable subset.
pub fn entity_triples(triples: impl IntoIterator<Item = Triple>) -> Vec<Triple> {
    triples
        .into_iter()
        .filter(|t| matches!(t.object, Object::Entity(_)))
        .collect()
}

/// Trains a model of `kind` on `positives` with the given sampler.
///
/// The vocabulary covers the training triples plus everything in the sampler
/// context (its pool and removal sets), so fetched corruptions always score.
pub fn train(
    kind: ModelKind,
    positives: &[Triple],
    ctx: &SamplerContext,
    sampler_config: SamplerConfig,
    config: &TrainConfig,
) -> Result<(EmbeddingModel, TrainReport), TrainError> {
    let positives = entity_triples(positives.iter().cloned());
    if positives.is_empty() {
        return Err(TrainError::EmptyTrainingSet);
    }

    let mut entity_set: std::collections::BTreeSet<EntityId> = ctx.pool().iter().copied().collect();
    let mut relation_set: std::collections::BTreeSet<EntityId> = Default::default();
    for t in &positives {
        entity_set.insert(t.subject);
        if let Object::Entity(o) = &t.object {
            entity_set.insert(*o);
        }
        relation_set.insert(t.predicate);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = EmbeddingModel::init(
        kind,
        config.dim,
        config.norm,
        entity_set.into_iter().collect(),
        relation_set.into_iter().collect(),
        &mut rng,
    );
    let mut sampler = NegativeSampler::new(
        SamplerConfig { num_negatives: config.num_negatives, ..sampler_config },
        ctx,
    );

    let mut report = TrainReport::default();
    let mut order: Vec<usize> = (0..positives.len()).collect();
    for epoch in 0..config.epochs {
        // Fresh shuffle per epoch, same stream as initialization.
        for i in (1..order.len()).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        let mut epoch_loss = 0.0;
        let mut pairs = 0usize;
        for (batch_index, chunk) in order.chunks(config.batch_size.max(1)).enumerate() {
            let mut batch_loss = 0.0;
            for &positive_index in chunk {
                let positive = &positives[positive_index];
                let corruptions = sampler.corruptions_for(positive)?;
                for corruption in corruptions {
                    batch_loss += contrast_pair(&mut model, positive, &corruption, config)?;
                    pairs += 1;
                }
            }
            if !batch_loss.is_finite() || model.has_nan() {
                return Err(TrainError::NaNLoss { epoch, batch: batch_index });
            }
            epoch_loss += batch_loss;
        }
        report.epoch_losses.push(if pairs > 0 { epoch_loss / pairs as f64 } else { 0.0 });
    }
    Ok((model, report))
}

/// One margin-ranking update; returns the pair loss.
fn contrast_pair(
    model: &mut EmbeddingModel,
    positive: &Triple,
    corruption: &Triple,
    config: &TrainConfig,
) -> Result<f64, TrainError> {
    let lookup = |model: &EmbeddingModel, t: &Triple| -> Result<(usize, usize, usize), TrainError> {
        let Object::Entity(object) = &t.object else {
            return Err(TrainError::Model(crate::embedding::ModelError::NonEntityObject {
                object: t.object.clone(),
            }));
        };
        Ok((
            model.entity_id_index(t.subject)?,
            model.relation_id_index(t.predicate)?,
            model.entity_id_index(*object)?,
        ))
    };
    let (ps, pr, po) = lookup(model, positive)?;
    let (ns, nr, no) = lookup(model, corruption)?;

    let (pos_score, pos_gs, pos_gr, pos_go, pos_gbs, pos_gbo) = model.score_and_grad(ps, pr, po);
    let (neg_score, neg_gs, neg_gr, neg_go, neg_gbs, neg_gbo) = model.score_and_grad(ns, nr, no);
    let loss = (config.margin - pos_score + neg_score).max(0.0);
    if loss > 0.0 {
        let lr = config.learning_rate;
        // Ascend the positive score, descend the corruption score.
        model.nudge_entity(ps, &pos_gs, lr);
        model.nudge_relation(pr, &pos_gr, lr);
        model.nudge_entity(po, &pos_go, lr);
        model.nudge_bias(ps, pos_gbs, lr);
        model.nudge_bias(po, pos_gbo, lr);
        model.nudge_entity(ns, &neg_gs, -lr);
        model.nudge_relation(nr, &neg_gr, -lr);
        model.nudge_entity(no, &neg_go, -lr);
        model.nudge_bias(ns, neg_gbs, -lr);
        model.nudge_bias(no, neg_gbo, -lr);
    }
    Ok(loss)
}
