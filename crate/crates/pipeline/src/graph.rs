//! Graph materialization from operation streams and chronological splitting.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use kghist_core::{EntityId, Object, OpKind, Revision, Triple, TripleOperation};

use crate::Warning;

/// The set of simple-statement triples after applying a prefix of the
/// operation stream.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KnowledgeGraphState {
    pub triples: BTreeSet<Triple>,
    /// Ordinal of the last applied operation, if any were applied.
    pub horizon: Option<u64>,
}

impl KnowledgeGraphState {
    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    /// Instance-of membership: subject entity to the classes it is typed
    /// with, read from entity-valued triples of the class-pointer property.
    pub fn class_membership(&self, class_pointer: EntityId) -> BTreeMap<EntityId, BTreeSet<EntityId>> {
        let mut memberships: BTreeMap<EntityId, BTreeSet<EntityId>> = BTreeMap::new();
        for triple in &self.triples {
            if triple.predicate != class_pointer {
                continue;
            }
            if let Object::Entity(class) = &triple.object {
                memberships.entry(triple.subject).or_default().insert(*class);
            }
        }
        memberships
    }
}

#[derive(Debug, Default)]
pub struct MaterializeOutcome {
    pub state: KnowledgeGraphState,
    pub warnings: Vec<Warning>,
}

/// Applies the first `up_to` operations of an ordinal-sorted stream.
///
/// Additions insert into the triple set, removals delete from it. Removing a
/// triple that is not present is a recorded no-op, not an error: deleted
/// revisions can legitimately orphan removals.
pub fn materialize(ops: &[TripleOperation], up_to: usize) -> MaterializeOutcome {
    let mut out = MaterializeOutcome::default();
    for op in &ops[..up_to.min(ops.len())] {
        match op.kind {
            OpKind::Addition => {
                out.state.triples.insert(op.triple.clone());
            }
            OpKind::Removal => {
                if !out.state.triples.remove(&op.triple) {
                    out.warnings.push(Warning::new(format!(
                        "removal of absent triple {} at ordinal {} ignored",
                        op.triple, op.ordinal
                    )));
                }
            }
        }
        out.state.horizon = Some(op.ordinal);
    }
    out
}

/// Applies the whole stream.
pub fn materialize_all(ops: &[TripleOperation]) -> MaterializeOutcome {
    materialize(ops, ops.len())
}

/// Per-entity chronological split fractions.
///
/// Fractions are interpreted at per-mille resolution so that boundary
/// arithmetic is exact integer math rather than floating point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub valid_fraction: f64,
    pub test_fraction: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec { train_fraction: 0.70, valid_fraction: 0.15, test_fraction: 0.15 }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SplitSpecError {
    #[error("split fractions must be non-negative")]
    Negative,
    #[error("split fractions must sum to 1")]
    BadSum,
}

impl SplitSpec {
    pub fn new(train: f64, valid: f64) -> Result<Self, SplitSpecError> {
        let spec = SplitSpec {
            train_fraction: train,
            valid_fraction: valid,
            test_fraction: 1.0 - train - valid,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SplitSpecError> {
        if self.train_fraction < 0.0 || self.valid_fraction < 0.0 || self.test_fraction < 0.0 {
            return Err(SplitSpecError::Negative);
        }
        let sum = self.train_fraction + self.valid_fraction + self.test_fraction;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(SplitSpecError::BadSum);
        }
        Ok(())
    }

    fn train_mille(&self) -> u64 {
        (self.train_fraction * 1000.0).round() as u64
    }

    fn valid_end_mille(&self) -> u64 {
        ((self.train_fraction + self.valid_fraction) * 1000.0).round() as u64
    }
}

/// How many of an entity's `m` revisions land in each bucket.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SplitCounts {
    pub train: usize,
    pub valid: usize,
    pub test: usize,
}

/// Boundary rule: `train = max(1, floor(train_fraction * m))`, the validation
/// bucket ends at `floor((train_fraction + valid_fraction) * m)`, and the
/// test bucket takes the rest.
pub fn split_counts(m: usize, spec: &SplitSpec) -> SplitCounts {
    if m == 0 {
        return SplitCounts::default();
    }
    let m64 = m as u64;
    let train = ((m64 * spec.train_mille()) / 1000).max(1).min(m64) as usize;
    let valid_end = (((m64 * spec.valid_end_mille()) / 1000) as usize).clamp(train, m);
    SplitCounts { train, valid: valid_end - train, test: m - valid_end }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Bucket {
    Train,
    Valid,
    Test,
}

/// A chronological split of revisions and their extracted operations.
#[derive(Debug, Default)]
pub struct ChronologicalSplit {
    pub train_revisions: Vec<Revision>,
    pub valid_revisions: Vec<Revision>,
    pub test_revisions: Vec<Revision>,
    pub train_ops: Vec<TripleOperation>,
    pub valid_ops: Vec<TripleOperation>,
    pub test_ops: Vec<TripleOperation>,
}

impl ChronologicalSplit {
    /// Train and validation operations combined, in ordinal order; the
    /// stream models are trained on this union.
    pub fn train_valid_ops(&self) -> Vec<TripleOperation> {
        let mut ops: Vec<TripleOperation> =
            self.train_ops.iter().chain(self.valid_ops.iter()).cloned().collect();
        ops.sort_by_key(|op| op.ordinal);
        ops
    }
}

/// Splits every entity's revision chain chronologically and partitions the
/// operation stream accordingly.
///
/// Every entity keeps at least one training revision, so each entity's state
/// lineage is present in every bucket's view of the graph.
pub fn chronological_split(
    revisions: &[Revision],
    ops: &[TripleOperation],
    spec: &SplitSpec,
) -> ChronologicalSplit {
    let mut per_entity: BTreeMap<EntityId, Vec<&Revision>> = BTreeMap::new();
    for revision in revisions {
        per_entity.entry(revision.entity_id).or_default().push(revision);
    }

    let mut bucket_of_revision: BTreeMap<u64, Bucket> = BTreeMap::new();
    for chain in per_entity.values_mut() {
        chain.sort_by_key(|r| (r.timestamp, r.id));
        let counts = split_counts(chain.len(), spec);
        for (i, revision) in chain.iter().enumerate() {
            let bucket = if i < counts.train {
                Bucket::Train
            } else if i < counts.train + counts.valid {
                Bucket::Valid
            } else {
                Bucket::Test
            };
            bucket_of_revision.insert(revision.id, bucket);
        }
    }

    let mut split = ChronologicalSplit::default();
    for revision in revisions {
        match bucket_of_revision[&revision.id] {
            Bucket::Train => split.train_revisions.push(revision.clone()),
            Bucket::Valid => split.valid_revisions.push(revision.clone()),
            Bucket::Test => split.test_revisions.push(revision.clone()),
        }
    }
    for op in ops {
        match bucket_of_revision.get(&op.revision_id) {
            Some(Bucket::Train) => split.train_ops.push(op.clone()),
            Some(Bucket::Valid) => split.valid_ops.push(op.clone()),
            Some(Bucket::Test) | None => split.test_ops.push(op.clone()),
        }
    }
    split
}
