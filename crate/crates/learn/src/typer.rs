//! Supervised type prediction: triples labeled from the addition/removal
//! streams, concatenated walk embeddings as features, a random forest as the
//! classifier, and candidate ranking by positive-class log probability.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use kghist_core::{EntityId, Object, OpKind, Triple, TripleOperation};

use crate::forest::{ForestConfig, ForestError, RandomForest};
use crate::walks::WalkConfig;

/// One training instance: a triple and whether the history added (1) or
/// removed (0) it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledTriple {
    pub triple: Triple,
    pub label: bool,
    pub source_ordinal: u64,
}

/// Labels every operation: additions positive, removals negative, one
/// instance per operation in ordinal order.
pub fn label_from_history(ops: &[TripleOperation]) -> Vec<LabeledTriple> {
    let mut out: Vec<LabeledTriple> = ops
        .iter()
        .map(|op| LabeledTriple {
            triple: op.triple.clone(),
            label: op.kind == OpKind::Addition,
            source_ordinal: op.ordinal,
        })
        .collect();
    out.sort_by_key(|l| l.source_ordinal);
    out
}

/// Deduplicated view: one instance per distinct triple, keeping the
/// chronologically last label.
pub fn dedup_last_label(labeled: &[LabeledTriple]) -> Vec<LabeledTriple> {
    let mut last: BTreeMap<Triple, LabeledTriple> = BTreeMap::new();
    for instance in labeled {
        match last.get(&instance.triple) {
            Some(existing) if existing.source_ordinal > instance.source_ordinal => {}
            _ => {
                last.insert(instance.triple.clone(), instance.clone());
            }
        }
    }
    let mut out: Vec<LabeledTriple> = last.into_values().collect();
    out.sort_by_key(|l| l.source_ordinal);
    out
}

#[derive(Debug, Error)]
pub enum TyperError {
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error("no labeled instance has embeddings for all three components")]
    NothingEmbeddable,
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("typer model file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// A trained supervised typer: walk embeddings plus the forest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TyperModel {
    pub embeddings: BTreeMap<EntityId, Vec<f64>>,
    pub forest: RandomForest,
    pub walk_config: WalkConfig,
    /// Typing property used at ranking time.
    pub class_pointer: EntityId,
}

/// Concatenated subject, predicate, object embedding; None when any
/// component is missing from the embedding map.
pub fn feature_vector(
    embeddings: &BTreeMap<EntityId, Vec<f64>>,
    triple: &Triple,
) -> Option<Vec<f64>> {
    let Object::Entity(object) = &triple.object else {
        return None;
    };
    let s = embeddings.get(&triple.subject)?;
    let p = embeddings.get(&triple.predicate)?;
    let o = embeddings.get(object)?;
    let mut features = Vec::with_capacity(s.len() + p.len() + o.len());
    features.extend_from_slice(s);
    features.extend_from_slice(p);
    features.extend_from_slice(o);
    Some(features)
}

impl TyperModel {
    /// Trains the forest on every embeddable labeled instance.
    pub fn train(
        labeled: &[LabeledTriple],
        embeddings: BTreeMap<EntityId, Vec<f64>>,
        walk_config: WalkConfig,
        forest_config: &ForestConfig,
        class_pointer: EntityId,
    ) -> Result<Self, TyperError> {
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for instance in labeled {
            if let Some(f) = feature_vector(&embeddings, &instance.triple) {
                features.push(f);
                labels.push(instance.label);
            }
        }
        if features.is_empty() {
            return Err(TyperError::NothingEmbeddable);
        }
        let forest = RandomForest::fit(&features, &labels, forest_config)?;
        Ok(TyperModel { embeddings, forest, walk_config, class_pointer })
    }

    /// Log probability that `(entity, class_pointer, candidate)` is positive.
    /// Probabilities are clamped away from 0 and 1 before the log.
    pub fn log_probability(&self, entity: EntityId, candidate: EntityId) -> Option<f64> {
        let triple = Triple::new(entity, self.class_pointer, Object::Entity(candidate));
        let features = feature_vector(&self.embeddings, &triple)?;
        let p = self.forest.predict_proba(&features).clamp(1e-9, 1.0 - 1e-9);
        Some(p.ln())
    }

    /// Candidates ranked by descending log probability; equal scores order
    /// by ascending candidate id. Unembeddable candidates are skipped and
    /// reported in the second return value.
    pub fn rank_types(
        &self,
        entity: EntityId,
        candidates: &[EntityId],
    ) -> (Vec<(EntityId, f64)>, Vec<EntityId>) {
        let mut ranked = Vec::with_capacity(candidates.len());
        let mut skipped = Vec::new();
        for &candidate in candidates {
            match self.log_probability(entity, candidate) {
                Some(score) => ranked.push((candidate, score)),
                None => skipped.push(candidate),
            }
        }
        ranked.sort_by(|a, b| {
            b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0))
        });
        (ranked, skipped)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), TyperError> {
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text)
            .map_err(|source| TyperError::Io { path: path.to_path_buf(), source })
    }

    pub fn load(path: &std::path::Path) -> Result<Self, TyperError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| TyperError::Io { path: path.to_path_buf(), source })?;
        Ok(serde_json::from_str(&text)?)
    }
}
