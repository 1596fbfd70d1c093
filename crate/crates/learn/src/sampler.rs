//! Negative sampling for embedding training.
//!
//! Four strategies:
//!
//! * `Basic` — replace the head or tail of each positive with a uniformly
//!   sampled entity, no filtering of any kind;
//! * `EditHistory` — fetch the triples that were removed from the graph and
//!   share the positive's anchor (same subject and predicate for tail-side
//!   corruption, same predicate and object for head-side), pad the set with
//!   random corruptions up to the requested count, shuffle, and take the
//!   first `n`;
//! * `EditHistoryNoWars` — like `EditHistory`, but removals whose triple was
//!   ever the subject of an edit war are excluded from the fetched set;
//! * `Inverse` — sample random corruptions but reject any candidate that
//!   belongs to the fetched removal set, re-drawing until an admissible
//!   candidate appears (bounded by a retry budget).
//!
//! Only entity-valued triples participate: the embedding space has no
//! representation for literal or blank objects, so the removal index and
//! corruption pool are restricted to entities.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use kghist_core::{EntityId, Object, OpKind, Triple, TripleOperation};
use kghist_pipeline::analytics::EditWarRecord;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplerKind {
    Basic,
    EditHistory,
    EditHistoryNoWars,
    Inverse,
}

impl SamplerKind {
    pub fn name(self) -> &'static str {
        match self {
            SamplerKind::Basic => "basic",
            SamplerKind::EditHistory => "edits",
            SamplerKind::EditHistoryNoWars => "edits-no-wars",
            SamplerKind::Inverse => "inverse",
        }
    }
}

impl std::str::FromStr for SamplerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "basic" => Ok(SamplerKind::Basic),
            "edits" => Ok(SamplerKind::EditHistory),
            "edits-no-wars" => Ok(SamplerKind::EditHistoryNoWars),
            "inverse" => Ok(SamplerKind::Inverse),
            other => Err(format!("unknown sampler {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CorruptSide {
    Head,
    Tail,
    #[default]
    Both,
}

#[derive(Clone, Debug)]
pub struct SamplerConfig {
    pub kind: SamplerKind,
    pub num_negatives: usize,
    pub corrupt_side: CorruptSide,
    pub seed: u64,
    pub max_reject_retries: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            kind: SamplerKind::Basic,
            num_negatives: 1,
            corrupt_side: CorruptSide::Both,
            seed: 42,
            max_reject_retries: 100,
        }
    }
}

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("entity pool too small to corrupt {triple}")]
    PoolTooSmall { triple: Triple },
    #[error("retry budget exhausted while corrupting {triple}: every candidate is in the removal set")]
    RetryBudgetExhausted { triple: Triple },
}

/// Removal index, edit-war set, and entity pool shared by the samplers.
#[derive(Clone, Debug, Default)]
pub struct SamplerContext {
    by_subject_predicate: BTreeMap<(EntityId, EntityId), Vec<Triple>>,
    by_predicate_object: BTreeMap<(EntityId, EntityId), Vec<Triple>>,
    war_set: BTreeSet<(EntityId, EntityId, Object)>,
    pool: Vec<EntityId>,
}

impl SamplerContext {
    /// Builds the context from an operation stream: removals feed the index,
    /// war records feed the war filter, and the pool is the set of entities
    /// seen anywhere in the stream (as subjects or entity objects).
    pub fn from_ops(ops: &[TripleOperation], wars: &[EditWarRecord]) -> Self {
        let mut ctx = SamplerContext {
            war_set: wars.iter().map(|w| (w.entity, w.property, w.value.clone())).collect(),
            ..Default::default()
        };
        let mut pool: BTreeSet<EntityId> = BTreeSet::new();
        for op in ops {
            let Object::Entity(object) = &op.triple.object else {
                continue;
            };
            pool.insert(op.triple.subject);
            pool.insert(*object);
            if op.kind == OpKind::Removal {
                ctx.by_subject_predicate
                    .entry((op.triple.subject, op.triple.predicate))
                    .or_default()
                    .push(op.triple.clone());
                ctx.by_predicate_object
                    .entry((op.triple.predicate, *object))
                    .or_default()
                    .push(op.triple.clone());
            }
        }
        ctx.pool = pool.into_iter().collect();
        ctx
    }

    pub fn with_pool(mut self, pool: Vec<EntityId>) -> Self {
        self.pool = pool;
        self
    }

    pub fn pool(&self) -> &[EntityId] {
        &self.pool
    }

    pub fn has_war(&self, triple: &Triple) -> bool {
        self.war_set.contains(&(triple.subject, triple.predicate, triple.object.clone()))
    }

    /// The removed triples that can corrupt `positive` on `side`, sorted and
    /// deduplicated; war-involved triples are dropped when `omit_edit_wars`.
    pub fn fetch_corruptions(
        &self,
        positive: &Triple,
        side: CorruptSide,
        omit_edit_wars: bool,
    ) -> Vec<Triple> {
        debug_assert!(!matches!(side, CorruptSide::Both), "fetch is per side");
        let candidates = match side {
            CorruptSide::Tail => {
                self.by_subject_predicate.get(&(positive.subject, positive.predicate))
            }
            CorruptSide::Head => {
                if let Object::Entity(object) = &positive.object {
                    self.by_predicate_object.get(&(positive.predicate, *object))
                } else {
                    None
                }
            }
            CorruptSide::Both => None,
        };
        let mut out: Vec<Triple> = candidates
            .map(Vec::as_slice)
            .unwrap_or_default()
            .iter()
            .filter(|t| !omit_edit_wars || !self.has_war(t))
            .cloned()
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

/// Stateful corruption generator; one instance drives a whole training run,
/// so identical seeds give identical corruption streams.
pub struct NegativeSampler<'a> {
    pub config: SamplerConfig,
    ctx: &'a SamplerContext,
    rng: ChaCha8Rng,
}

impl<'a> NegativeSampler<'a> {
    pub fn new(config: SamplerConfig, ctx: &'a SamplerContext) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        NegativeSampler { config, ctx, rng }
    }

    /// Exactly `num_negatives` corruptions of one positive triple.
    pub fn corruptions_for(&mut self, positive: &Triple) -> Result<Vec<Triple>, SamplerError> {
        let n = self.config.num_negatives;
        match self.config.kind {
            SamplerKind::Basic => (0..n).map(|_| self.random_corruption(positive)).collect(),
            SamplerKind::EditHistory => self.edit_history(positive, n, false),
            SamplerKind::EditHistoryNoWars => self.edit_history(positive, n, true),
            SamplerKind::Inverse => self.inverse(positive, n),
        }
    }

    /// Pairs every positive in the batch with its corruptions.
    pub fn corrupt_batch(
        &mut self,
        batch: &[Triple],
    ) -> Result<Vec<(usize, Triple)>, SamplerError> {
        let mut out = Vec::with_capacity(batch.len() * self.config.num_negatives);
        for (i, positive) in batch.iter().enumerate() {
            for corruption in self.corruptions_for(positive)? {
                out.push((i, corruption));
            }
        }
        Ok(out)
    }

    fn pick_side(&mut self) -> CorruptSide {
        match self.config.corrupt_side {
            CorruptSide::Head => CorruptSide::Head,
            CorruptSide::Tail => CorruptSide::Tail,
            CorruptSide::Both => {
                if self.rng.random_bool(0.5) {
                    CorruptSide::Head
                } else {
                    CorruptSide::Tail
                }
            }
        }
    }

    /// One uniformly random corruption: replaces exactly one side with a
    /// pool entity different from the original. No truth filtering.
    fn random_corruption(&mut self, positive: &Triple) -> Result<Triple, SamplerError> {
        let side = self.pick_side();
        self.random_corruption_on(positive, side)
    }

    fn random_corruption_on(
        &mut self,
        positive: &Triple,
        side: CorruptSide,
    ) -> Result<Triple, SamplerError> {
        let original = match side {
            CorruptSide::Head => Some(positive.subject),
            CorruptSide::Tail => match &positive.object {
                Object::Entity(id) => Some(*id),
                _ => None,
            },
            CorruptSide::Both => unreachable!("side picked before sampling"),
        };
        let pool = self.ctx.pool();
        let viable = match original {
            Some(original) => pool.iter().any(|e| *e != original),
            None => !pool.is_empty(),
        };
        if !viable {
            return Err(SamplerError::PoolTooSmall { triple: positive.clone() });
        }
        loop {
            let candidate = *pool.choose(&mut self.rng).expect("pool is non-empty");
            if Some(candidate) == original {
                continue;
            }
            return Ok(match side {
                CorruptSide::Head => Triple::new(candidate, positive.predicate, positive.object.clone()),
                _ => Triple::new(positive.subject, positive.predicate, Object::Entity(candidate)),
            });
        }
    }

    /// Fetch, pad with random corruptions until the set reaches `n`,
    /// shuffle, take the first `n`. With both sides enabled, each corruption
    /// slot picks its side first and the procedure runs once per side.
    ///
    /// In the no-wars variant the padding draws also reject war-involved
    /// triples: the contract is that no war triple is ever emitted, and a
    /// random draw can coincide with one.
    fn edit_history(
        &mut self,
        positive: &Triple,
        n: usize,
        omit_edit_wars: bool,
    ) -> Result<Vec<Triple>, SamplerError> {
        let mut slots_per_side = [0usize; 2]; // [head, tail]
        for _ in 0..n {
            match self.pick_side() {
                CorruptSide::Head => slots_per_side[0] += 1,
                _ => slots_per_side[1] += 1,
            }
        }
        let mut out = Vec::with_capacity(n);
        for (side, want) in [
            (CorruptSide::Head, slots_per_side[0]),
            (CorruptSide::Tail, slots_per_side[1]),
        ] {
            if want == 0 {
                continue;
            }
            let mut negatives = self.ctx.fetch_corruptions(positive, side, omit_edit_wars);
            let mut budget = self.config.max_reject_retries.max(1) * want.max(1);
            while negatives.len() < want {
                let candidate = self.random_corruption_on(positive, side)?;
                if omit_edit_wars && self.ctx.has_war(&candidate) {
                    budget -= 1;
                    if budget == 0 {
                        return Err(SamplerError::RetryBudgetExhausted {
                            triple: positive.clone(),
                        });
                    }
                    continue;
                }
                if !negatives.contains(&candidate) {
                    negatives.push(candidate);
                }
            }
            shuffle(&mut negatives, &mut self.rng);
            out.extend(negatives.into_iter().take(want));
        }
        Ok(out)
    }

    /// Random corruptions re-drawn until they fall outside the fetched
    /// removal set; the retry budget guards against a saturated pool.
    fn inverse(&mut self, positive: &Triple, n: usize) -> Result<Vec<Triple>, SamplerError> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let side = self.pick_side();
            let forbidden = self.ctx.fetch_corruptions(positive, side, false);
            let mut accepted = None;
            for _ in 0..=self.config.max_reject_retries {
                let candidate = self.random_corruption_on(positive, side)?;
                if !forbidden.contains(&candidate) {
                    accepted = Some(candidate);
                    break;
                }
            }
            match accepted {
                Some(candidate) => out.push(candidate),
                None => {
                    return Err(SamplerError::RetryBudgetExhausted { triple: positive.clone() })
                }
            }
        }
        Ok(out)
    }
}

fn shuffle(items: &mut [Triple], rng: &mut ChaCha8Rng) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use kghist_core::Timestamp;

    fn q(n: u64) -> EntityId {
        EntityId::item(n)
    }

    fn p31() -> EntityId {
        EntityId::property(31)
    }

    fn triple(s: u64, o: u64) -> Triple {
        Triple::new(q(s), p31(), Object::Entity(q(o)))
    }

    fn removal(s: u64, o: u64, ordinal: u64) -> TripleOperation {
        TripleOperation {
            kind: OpKind::Removal,
            triple: triple(s, o),
            revision_id: ordinal + 1,
            timestamp: Timestamp::from_unix_seconds(ordinal as i64),
            ordinal,
        }
    }

    fn addition(s: u64, o: u64, ordinal: u64) -> TripleOperation {
        TripleOperation {
            kind: OpKind::Addition,
            triple: triple(s, o),
            revision_id: ordinal + 1,
            timestamp: Timestamp::from_unix_seconds(ordinal as i64),
            ordinal,
        }
    }

    fn war(s: u64, o: u64) -> EditWarRecord {
        EditWarRecord {
            entity: q(s),
            property: p31(),
            value: Object::Entity(q(o)),
            add_ordinal: 0,
            remove_ordinal: 1,
            readd_ordinal: 2,
        }
    }

    #[test]
    fn fetch_matches_subject_and_predicate_on_tail_side() {
        let ops =
            vec![removal(1, 5, 0), removal(1, 6, 1), removal(2, 5, 2), addition(1, 7, 3)];
        let ctx = SamplerContext::from_ops(&ops, &[]);
        let fetched = ctx.fetch_corruptions(&triple(1, 7), CorruptSide::Tail, false);
        assert_eq!(fetched, vec![triple(1, 5), triple(1, 6)]);
    }

    #[test]
    fn fetch_omits_war_involved_triples() {
        let ops = vec![removal(1, 5, 0), removal(1, 6, 1)];
        let ctx = SamplerContext::from_ops(&ops, &[war(1, 5)]);
        let fetched = ctx.fetch_corruptions(&triple(1, 7), CorruptSide::Tail, true);
        assert_eq!(fetched, vec![triple(1, 6)]);
    }

    #[test]
    fn fetch_with_no_matching_removals_is_empty() {
        let ops = vec![removal(2, 5, 0)];
        let ctx = SamplerContext::from_ops(&ops, &[]);
        assert!(ctx.fetch_corruptions(&triple(1, 7), CorruptSide::Tail, false).is_empty());
    }

    #[test]
    fn fetch_on_head_side_matches_predicate_and_object() {
        let ops = vec![removal(1, 5, 0), removal(2, 5, 1), removal(3, 6, 2)];
        let ctx = SamplerContext::from_ops(&ops, &[]);
        let fetched = ctx.fetch_corruptions(&triple(9, 5), CorruptSide::Head, false);
        assert_eq!(fetched, vec![triple(1, 5), triple(2, 5)]);
    }

    #[test]
    fn basic_corruptions_differ_in_exactly_one_position() {
        let ops: Vec<TripleOperation> = (1..10).map(|i| addition(i, 50 + i, i)).collect();
        let ctx = SamplerContext::from_ops(&ops, &[]);
        let config = SamplerConfig {
            kind: SamplerKind::Basic,
            num_negatives: 4,
            ..Default::default()
        };
        let mut sampler = NegativeSampler::new(config, &ctx);
        let positive = triple(1, 51);
        for _ in 0..200 {
            for corruption in sampler.corruptions_for(&positive).unwrap() {
                let head_changed = corruption.subject != positive.subject;
                let tail_changed = corruption.object != positive.object;
                assert!(head_changed ^ tail_changed, "{corruption}");
                assert_eq!(corruption.predicate, positive.predicate);
            }
        }
    }

    #[test]
    fn tail_side_keeps_subjects_unchanged() {
        let ops: Vec<TripleOperation> = (1..10).map(|i| addition(i, 50 + i, i)).collect();
        let ctx = SamplerContext::from_ops(&ops, &[]);
        let config = SamplerConfig {
            kind: SamplerKind::Basic,
            num_negatives: 3,
            corrupt_side: CorruptSide::Tail,
            ..Default::default()
        };
        let mut sampler = NegativeSampler::new(config, &ctx);
        let positive = triple(1, 51);
        for _ in 0..50 {
            for corruption in sampler.corruptions_for(&positive).unwrap() {
                assert_eq!(corruption.subject, positive.subject);
            }
        }
    }

    #[test]
    fn fixed_seed_reproduces_the_corruption_sequence() {
        let ops: Vec<TripleOperation> = (1..20).map(|i| addition(i, 50 + i, i)).collect();
        let ctx = SamplerContext::from_ops(&ops, &[]);
        let config = SamplerConfig { kind: SamplerKind::Basic, num_negatives: 5, ..Default::default() };
        let run = || {
            let mut sampler = NegativeSampler::new(config.clone(), &ctx);
            sampler.corrupt_batch(&[triple(1, 51), triple(2, 52)]).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn pool_of_one_entity_errors() {
        let ops = vec![addition(1, 1, 0)];
        let ctx = SamplerContext::from_ops(&ops, &[]);
        assert_eq!(ctx.pool().len(), 1);
        let config = SamplerConfig {
            kind: SamplerKind::Basic,
            num_negatives: 1,
            corrupt_side: CorruptSide::Tail,
            ..Default::default()
        };
        let mut sampler = NegativeSampler::new(config, &ctx);
        assert!(matches!(
            sampler.corruptions_for(&triple(1, 1)),
            Err(SamplerError::PoolTooSmall { .. })
        ));
    }

    #[test]
    fn edit_history_uses_only_removals_when_fetched_set_is_big_enough() {
        let ops = vec![
            removal(1, 5, 0),
            removal(1, 6, 1),
            removal(1, 8, 2),
            removal(1, 9, 3),
            removal(1, 10, 4),
            addition(1, 7, 5),
            addition(2, 3, 6),
        ];
        let ctx = SamplerContext::from_ops(&ops, &[]);
        let fetched = ctx.fetch_corruptions(&triple(1, 7), CorruptSide::Tail, false);
        assert_eq!(fetched.len(), 5);
        let config = SamplerConfig {
            kind: SamplerKind::EditHistory,
            num_negatives: 3,
            corrupt_side: CorruptSide::Tail,
            ..Default::default()
        };
        let mut sampler = NegativeSampler::new(config, &ctx);
        for _ in 0..100 {
            let corruptions = sampler.corruptions_for(&triple(1, 7)).unwrap();
            assert_eq!(corruptions.len(), 3);
            for c in &corruptions {
                assert!(fetched.contains(c), "{c} not from the removal set");
            }
        }
    }

    #[test]
    fn edit_history_pads_with_random_corruptions() {
        let ops = vec![removal(1, 5, 0), addition(1, 7, 1), addition(2, 3, 2), addition(4, 9, 3)];
        let ctx = SamplerContext::from_ops(&ops, &[]);
        let config = SamplerConfig {
            kind: SamplerKind::EditHistory,
            num_negatives: 3,
            corrupt_side: CorruptSide::Tail,
            ..Default::default()
        };
        let mut sampler = NegativeSampler::new(config, &ctx);
        let mut saw_removal_candidate = false;
        for _ in 0..100 {
            let corruptions = sampler.corruptions_for(&triple(1, 7)).unwrap();
            assert_eq!(corruptions.len(), 3);
            saw_removal_candidate |= corruptions.contains(&triple(1, 5));
            // Padding corruptions still only vary the tail.
            for c in &corruptions {
                assert_eq!(c.subject, q(1));
                assert_eq!(c.predicate, p31());
            }
        }
        assert!(saw_removal_candidate, "the removal-set candidate should appear sometimes");
    }

    #[test]
    fn edit_history_with_empty_fetch_reduces_to_basic() {
        let ops = vec![addition(1, 7, 0), addition(2, 3, 1), addition(4, 9, 2)];
        let ctx = SamplerContext::from_ops(&ops, &[]);
        let config = SamplerConfig {
            kind: SamplerKind::EditHistory,
            num_negatives: 3,
            corrupt_side: CorruptSide::Tail,
            ..Default::default()
        };
        let mut sampler = NegativeSampler::new(config, &ctx);
        let corruptions = sampler.corruptions_for(&triple(1, 7)).unwrap();
        assert_eq!(corruptions.len(), 3);
        for c in corruptions {
            assert_ne!(c, triple(1, 7), "corruption must differ from the positive");
        }
    }

    #[test]
    fn no_wars_variant_never_emits_war_involved_removals() {
        let ops = vec![removal(1, 5, 0), removal(1, 6, 1), addition(1, 7, 2), addition(3, 4, 3)];
        let ctx = SamplerContext::from_ops(&ops, &[war(1, 5)]);
        let config = SamplerConfig {
            kind: SamplerKind::EditHistoryNoWars,
            num_negatives: 2,
            corrupt_side: CorruptSide::Tail,
            ..Default::default()
        };
        let mut sampler = NegativeSampler::new(config, &ctx);
        for _ in 0..200 {
            for c in sampler.corruptions_for(&triple(1, 7)).unwrap() {
                assert_ne!(c, triple(1, 5), "war-involved removal must never appear");
            }
        }
    }

    #[test]
    fn inverse_avoids_the_removal_set() {
        // Pool is {Q1, Q5, Q6, Q7}; removals forbid (Q1, P31, Q5).
        let ops = vec![removal(1, 5, 0), addition(1, 7, 1), addition(6, 6, 2)];
        let ctx = SamplerContext::from_ops(&ops, &[]);
        let config = SamplerConfig {
            kind: SamplerKind::Inverse,
            num_negatives: 2,
            corrupt_side: CorruptSide::Tail,
            ..Default::default()
        };
        let mut sampler = NegativeSampler::new(config, &ctx);
        for _ in 0..300 {
            for c in sampler.corruptions_for(&triple(1, 7)).unwrap() {
                assert_ne!(c, triple(1, 5), "forbidden corruption emitted");
            }
        }
    }

    #[test]
    fn inverse_with_single_admissible_candidate_always_picks_it() {
        // Pool {Q1, Q5, Q6}; corrupting (Q1, P31, Q7): tail candidates are
        // Q5 and Q6 (and Q1), but Q5 is forbidden... leaving Q6 or Q1.
        let ops = vec![removal(1, 5, 0), removal(1, 1, 1), addition(5, 6, 2)];
        let ctx = SamplerContext::from_ops(&ops, &[]);
        let config = SamplerConfig {
            kind: SamplerKind::Inverse,
            num_negatives: 1,
            corrupt_side: CorruptSide::Tail,
            ..Default::default()
        };
        let mut sampler = NegativeSampler::new(config, &ctx);
        let positive = Triple::new(q(1), p31(), Object::Entity(q(7)));
        for _ in 0..100 {
            let corruptions = sampler.corruptions_for(&positive).unwrap();
            assert_eq!(corruptions, vec![triple(1, 6)]);
        }
    }

    #[test]
    fn inverse_with_empty_removal_set_matches_basic_distribution() {
        let ops = vec![addition(1, 7, 0), addition(2, 3, 1), addition(4, 9, 2)];
        let ctx = SamplerContext::from_ops(&ops, &[]);
        let make = |kind| SamplerConfig {
            kind,
            num_negatives: 4,
            corrupt_side: CorruptSide::Tail,
            seed: 11,
            ..Default::default()
        };
        let mut inverse = NegativeSampler::new(make(SamplerKind::Inverse), &ctx);
        let mut basic = NegativeSampler::new(make(SamplerKind::Basic), &ctx);
        let positive = triple(1, 7);
        assert_eq!(
            inverse.corruptions_for(&positive).unwrap(),
            basic.corruptions_for(&positive).unwrap()
        );
    }

    #[test]
    fn inverse_errors_when_pool_is_saturated_by_removals() {
        // Pool {Q1, Q5}: both tail corruptions of (Q1, P31, Q7) are in the
        // removal set.
        let ops = vec![removal(1, 5, 0), removal(1, 1, 1)];
        let ctx = SamplerContext::from_ops(&ops, &[]);
        assert_eq!(ctx.pool(), &[q(1), q(5)]);
        let config = SamplerConfig {
            kind: SamplerKind::Inverse,
            num_negatives: 1,
            corrupt_side: CorruptSide::Tail,
            max_reject_retries: 50,
            ..Default::default()
        };
        let mut sampler = NegativeSampler::new(config, &ctx);
        let positive = Triple::new(q(1), p31(), Object::Entity(q(7)));
        assert!(matches!(
            sampler.corruptions_for(&positive),
            Err(SamplerError::RetryBudgetExhausted { .. })
        ));
    }

    #[test]
    fn literal_object_removals_are_not_indexed() {
        let literal_removal = TripleOperation {
            kind: OpKind::Removal,
            triple: Triple::new(
                q(1),
                p31(),
                Object::Literal { lexical: "x".into(), kind: kghist_core::LiteralKind::String },
            ),
            revision_id: 1,
            timestamp: Timestamp::from_unix_seconds(0),
            ordinal: 0,
        };
        let ctx = SamplerContext::from_ops(&[literal_removal], &[]);
        assert!(ctx.pool().is_empty());
        assert!(ctx.fetch_corruptions(&triple(1, 7), CorruptSide::Tail, false).is_empty());
    }
}
