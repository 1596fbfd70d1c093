//! Deterministic synthetic typed graphs for end-to-end learning checks.
//!
//! Entities are grouped into clusters; every cluster has a hub entity and a
//! signature relation, and members are typed with the cluster's class. A
//! quarter of the members have their type assertion held out for testing, so
//! a model that learns the relational signature can rank the held-out class
//! highly. Distractor classes are attached to filler entities to widen the
//! candidate set.
//!
//! With `near_miss_removals`, each held-out type assertion is also added and
//! then removed inside the training window. The removals are near misses:
//! they reappear as the true answers at test time, so a sampler that treats
//! removals as corruptions trains against the truth, while a sampler that
//! avoids generating them does not.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kghist_core::{EntityId, Object, OpKind, Timestamp, Triple, TripleOperation};

#[derive(Clone, Debug)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub entities: usize,
    pub classes: usize,
    pub distractor_classes: usize,
    pub held_out_fraction: f64,
    pub near_miss_removals: bool,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 42,
            entities: 200,
            classes: 10,
            distractor_classes: 30,
            held_out_fraction: 0.25,
            near_miss_removals: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticGraph {
    /// Ordinal-sorted training operations (additions, plus removals when
    /// near misses are enabled).
    pub train_ops: Vec<TripleOperation>,
    /// Held-out `(entity, new class)` pairs to rank at test time.
    pub test_cases: Vec<(EntityId, EntityId)>,
    /// Classes known for each entity at the end of training.
    pub known_classes: BTreeMap<EntityId, BTreeSet<EntityId>>,
    /// Every class that appears as a type object in training.
    pub candidate_classes: Vec<EntityId>,
    pub class_pointer: EntityId,
}

pub fn typed_graph(config: &SyntheticConfig) -> SyntheticGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let class_pointer = EntityId::property(31);
    let class_of = |cluster: usize| EntityId::item(10_000 + cluster as u64);
    let hub_of = |cluster: usize| EntityId::item(30_000 + cluster as u64);
    let signature_of = |cluster: usize| EntityId::property(1_000 + cluster as u64);
    let shared_relation = EntityId::property(50);

    let mut additions: Vec<Triple> = Vec::new();
    let mut removals: Vec<Triple> = Vec::new();
    let mut test_cases = Vec::new();
    let mut known_classes: BTreeMap<EntityId, BTreeSet<EntityId>> = BTreeMap::new();

    for index in 0..config.entities {
        let entity = EntityId::item(1 + index as u64);
        let cluster = index % config.classes;
        additions.push(Triple::new(
            entity,
            signature_of(cluster),
            Object::Entity(hub_of(cluster)),
        ));
        // A second, noisier signal shared across clusters.
        if rng.random_bool(0.8) {
            additions.push(Triple::new(entity, shared_relation, Object::Entity(hub_of(cluster))));
        }
        let held_out = rng.random_bool(config.held_out_fraction);
        if held_out {
            test_cases.push((entity, class_of(cluster)));
            known_classes.entry(entity).or_default();
            if config.near_miss_removals {
                // Added and then removed inside the training window; the
                // test split will re-add it.
                additions.push(Triple::new(entity, class_pointer, Object::Entity(class_of(cluster))));
                removals.push(Triple::new(entity, class_pointer, Object::Entity(class_of(cluster))));
            }
        } else {
            additions.push(Triple::new(entity, class_pointer, Object::Entity(class_of(cluster))));
            known_classes.entry(entity).or_default().insert(class_of(cluster));
        }
    }

    // Fillers keep distractor classes inside the candidate universe.
    for d in 0..config.distractor_classes {
        let filler = EntityId::item(5_000 + d as u64);
        let distractor = EntityId::item(20_000 + d as u64);
        let cluster = d % config.classes;
        additions.push(Triple::new(filler, class_pointer, Object::Entity(distractor)));
        additions.push(Triple::new(filler, signature_of(cluster), Object::Entity(hub_of(cluster))));
        known_classes.entry(filler).or_default().insert(distractor);
    }

    // Interleave into an operation stream: all additions first (shuffled),
    // then the near-miss removals at the end of the training window.
    for i in (1..additions.len()).rev() {
        let j = rng.random_range(0..=i);
        additions.swap(i, j);
    }
    let mut train_ops = Vec::with_capacity(additions.len() + removals.len());
    let mut ordinal = 0u64;
    for triple in additions {
        train_ops.push(TripleOperation {
            kind: OpKind::Addition,
            triple,
            revision_id: ordinal + 1,
            timestamp: Timestamp::from_unix_seconds(ordinal as i64 * 60),
            ordinal,
        });
        ordinal += 1;
    }
    for triple in removals {
        train_ops.push(TripleOperation {
            kind: OpKind::Removal,
            triple,
            revision_id: ordinal + 1,
            timestamp: Timestamp::from_unix_seconds(ordinal as i64 * 60),
            ordinal,
        });
        ordinal += 1;
    }

    let candidate_classes: Vec<EntityId> = train_ops
        .iter()
        .filter(|op| op.kind == OpKind::Addition && op.triple.predicate == class_pointer)
        .filter_map(|op| match &op.triple.object {
            Object::Entity(class) => Some(*class),
            _ => None,
        })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    SyntheticGraph { train_ops, test_cases, known_classes, candidate_classes, class_pointer }
}
