//! Filtered-setting ranking and the MR / MRR / hits@k report.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use kghist_core::{EntityId, Object, OpKind};
use kghist_pipeline::graph::{materialize_all, ChronologicalSplit};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("true class {class} is not among the scored candidates")]
    TrueClassMissing { class: EntityId },
    #[error("true class {class} is already known; nothing to rank")]
    TrueClassKnown { class: EntityId },
    #[error("cannot build a report from zero ranking results")]
    EmptyResults,
}

/// The evaluation sample: entities that gained a class in the test split
/// which they did not have at the end of train + validation.
pub fn build_test_sample(
    split: &ChronologicalSplit,
    class_pointer: EntityId,
) -> BTreeSet<(EntityId, EntityId)> {
    let known = materialize_all(&split.train_valid_ops()).state;
    let known_classes = known.class_membership(class_pointer);
    let mut sample = BTreeSet::new();
    for op in &split.test_ops {
        if op.kind != OpKind::Addition || op.triple.predicate != class_pointer {
            continue;
        }
        let Object::Entity(class) = &op.triple.object else {
            continue;
        };
        let already = known_classes
            .get(&op.triple.subject)
            .map(|classes| classes.contains(class))
            .unwrap_or(false);
        if !already {
            sample.insert((op.triple.subject, *class));
        }
    }
    sample
}

/// Classes already true for each entity at the end of train + validation;
/// these are filtered out of candidate lists before ranking.
pub fn known_true_classes(
    split: &ChronologicalSplit,
    class_pointer: EntityId,
) -> BTreeMap<EntityId, BTreeSet<EntityId>> {
    materialize_all(&split.train_valid_ops()).state.class_membership(class_pointer)
}

/// Rank of the true class among the candidates after dropping known-true
/// ones. Ties are pessimistic: equal-scored competitors rank ahead of the
/// true class.
pub fn filtered_rank(
    scores: &BTreeMap<EntityId, f64>,
    true_class: EntityId,
    known_true: &BTreeSet<EntityId>,
) -> Result<usize, EvalError> {
    let Some(true_score) = scores.get(&true_class) else {
        return Err(EvalError::TrueClassMissing { class: true_class });
    };
    if known_true.contains(&true_class) {
        return Err(EvalError::TrueClassKnown { class: true_class });
    }
    let ahead = scores
        .iter()
        .filter(|(candidate, score)| {
            **candidate != true_class && !known_true.contains(candidate) && **score >= *true_score
        })
        .count();
    Ok(1 + ahead)
}

/// Mean rank, mean reciprocal rank, and hits@{1, 5, 10}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub mr: f64,
    pub mrr: f64,
    pub hits_at: BTreeMap<usize, f64>,
    pub n: usize,
}

pub const HITS_AT_KS: [usize; 3] = [1, 5, 10];

pub fn ranking_report(ranks: &[usize]) -> Result<RankingReport, EvalError> {
    if ranks.is_empty() {
        return Err(EvalError::EmptyResults);
    }
    let n = ranks.len();
    let mr = ranks.iter().map(|&r| r as f64).sum::<f64>() / n as f64;
    let mrr = ranks.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / n as f64;
    let hits_at = HITS_AT_KS
        .iter()
        .map(|&k| (k, ranks.iter().filter(|&&r| r <= k).count() as f64 / n as f64))
        .collect();
    Ok(RankingReport { mr, mrr, hits_at, n })
}

impl RankingReport {
    /// hits@1 outcome vector helper: true when the rank is 1.
    pub fn outcomes(ranks: &[usize]) -> Vec<bool> {
        ranks.iter().map(|&r| r == 1).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use kghist_core::{Timestamp, Triple, TripleOperation};
    use proptest::prelude::*;

    fn q(n: u64) -> EntityId {
        EntityId::item(n)
    }

    #[test]
    fn filtering_removes_known_true_competitors() {
        let scores: BTreeMap<EntityId, f64> =
            [(q(1), 3.0), (q(2), 2.0), (q(3), 1.0)].into_iter().collect();
        let known: BTreeSet<EntityId> = [q(1)].into_iter().collect();
        assert_eq!(filtered_rank(&scores, q(2), &known).unwrap(), 1);
    }

    #[test]
    fn rank_counts_higher_scored_candidates() {
        let scores: BTreeMap<EntityId, f64> = [(q(1), 3.0), (q(2), 2.0)].into_iter().collect();
        assert_eq!(filtered_rank(&scores, q(2), &BTreeSet::new()).unwrap(), 2);
    }

    #[test]
    fn ties_rank_pessimistically() {
        let scores: BTreeMap<EntityId, f64> =
            [(q(1), 2.0), (q(2), 2.0), (q(3), 2.0)].into_iter().collect();
        assert_eq!(filtered_rank(&scores, q(2), &BTreeSet::new()).unwrap(), 3);
    }

    #[test]
    fn missing_or_known_true_class_errors() {
        let scores: BTreeMap<EntityId, f64> = [(q(1), 1.0)].into_iter().collect();
        assert!(matches!(
            filtered_rank(&scores, q(9), &BTreeSet::new()),
            Err(EvalError::TrueClassMissing { .. })
        ));
        let known: BTreeSet<EntityId> = [q(1)].into_iter().collect();
        assert!(matches!(
            filtered_rank(&scores, q(1), &known),
            Err(EvalError::TrueClassKnown { .. })
        ));
    }

    #[test]
    fn report_matches_closed_forms() {
        let report = ranking_report(&[1, 2, 4]).unwrap();
        assert!((report.mrr - 7.0 / 12.0).abs() < 1e-12);
        assert!((report.mr - 7.0 / 3.0).abs() < 1e-12);

        let report = ranking_report(&[1, 6, 5]).unwrap();
        assert!((report.hits_at[&5] - 2.0 / 3.0).abs() < 1e-12);
        assert!((report.hits_at[&1] - 1.0 / 3.0).abs() < 1e-12);

        let report = ranking_report(&[1, 1, 1]).unwrap();
        assert!((report.mrr - 1.0).abs() < 1e-12);
        for k in HITS_AT_KS {
            assert!((report.hits_at[&k] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_results_error() {
        assert!(matches!(ranking_report(&[]), Err(EvalError::EmptyResults)));
    }

    /// Worst position of the true class over every candidate ordering that
    /// is consistent with descending scores.
    fn brute_force_rank(
        scores: &BTreeMap<EntityId, f64>,
        true_class: EntityId,
        known_true: &BTreeSet<EntityId>,
    ) -> usize {
        let candidates: Vec<EntityId> =
            scores.keys().filter(|c| !known_true.contains(c)).copied().collect();
        let mut worst = 0usize;
        let mut order: Vec<usize> = (0..candidates.len()).collect();
        permute(&mut order, 0, &mut |perm| {
            let sorted_desc = perm
                .windows(2)
                .all(|w| scores[&candidates[w[0]]] >= scores[&candidates[w[1]]]);
            if sorted_desc {
                let position = perm
                    .iter()
                    .position(|&i| candidates[i] == true_class)
                    .expect("true class among candidates")
                    + 1;
                worst = worst.max(position);
            }
        });
        worst
    }

    fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
        if k == items.len() {
            visit(items);
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permute(items, k + 1, visit);
            items.swap(k, i);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn filtered_rank_matches_permutation_oracle(
            raw_scores in prop::collection::vec(0u8..4, 2..7),
            known_mask in prop::collection::vec(any::<bool>(), 2..7),
        ) {
            let scores: BTreeMap<EntityId, f64> = raw_scores
                .iter()
                .enumerate()
                .map(|(i, &s)| (q(i as u64 + 1), f64::from(s)))
                .collect();
            // True class: the first candidate not masked as known.
            let known: BTreeSet<EntityId> = known_mask
                .iter()
                .zip(scores.keys())
                .filter(|(masked, _)| **masked)
                .map(|(_, id)| *id)
                .collect();
            let Some(true_class) = scores.keys().find(|c| !known.contains(c)).copied() else {
                return Ok(());
            };
            let fast = filtered_rank(&scores, true_class, &known).unwrap();
            let slow = brute_force_rank(&scores, true_class, &known);
            prop_assert_eq!(fast, slow);
        }

        #[test]
        fn hits_are_monotone_and_mrr_bounded(ranks in prop::collection::vec(1usize..30, 1..40)) {
            let report = ranking_report(&ranks).unwrap();
            prop_assert!(report.hits_at[&1] <= report.hits_at[&5]);
            prop_assert!(report.hits_at[&5] <= report.hits_at[&10]);
            prop_assert!(report.mr >= 1.0);
            prop_assert!(report.mrr > 0.0 && report.mrr <= 1.0);
            // Non-hit ranks are at least 2, so the reciprocal mean is capped.
            let h1 = report.hits_at[&1];
            prop_assert!(report.mrr <= h1 + (1.0 - h1) / 2.0 + 1e-12);
        }
    }

    fn op(kind: OpKind, s: u64, p: u64, o: u64, ordinal: u64) -> TripleOperation {
        TripleOperation {
            kind,
            triple: Triple::new(q(s), EntityId::property(p), Object::Entity(q(o))),
            revision_id: ordinal + 1,
            timestamp: Timestamp::from_unix_seconds(ordinal as i64),
            ordinal,
        }
    }

    #[test]
    fn test_sample_includes_new_classes_only() {
        let split = ChronologicalSplit {
            train_ops: vec![op(OpKind::Addition, 1, 31, 6, 0)],
            valid_ops: vec![],
            test_ops: vec![
                // New class for Q1: included.
                op(OpKind::Addition, 1, 31, 5, 1),
                // Re-added known class: excluded.
                op(OpKind::Addition, 1, 31, 6, 2),
                // Non-typing property: excluded.
                op(OpKind::Addition, 1, 21, 7, 3),
                // Removal: excluded.
                op(OpKind::Removal, 1, 31, 8, 4),
            ],
            ..Default::default()
        };
        let sample = build_test_sample(&split, EntityId::property(31));
        assert_eq!(sample.len(), 1);
        assert!(sample.contains(&(q(1), q(5))));
    }

    #[test]
    fn empty_test_split_gives_empty_sample() {
        let split = ChronologicalSplit::default();
        assert!(build_test_sample(&split, EntityId::property(31)).is_empty());
    }

    #[test]
    fn class_removed_during_validation_counts_as_new_again() {
        let split = ChronologicalSplit {
            train_ops: vec![op(OpKind::Addition, 1, 31, 5, 0)],
            valid_ops: vec![op(OpKind::Removal, 1, 31, 5, 1)],
            test_ops: vec![op(OpKind::Addition, 1, 31, 5, 2)],
            ..Default::default()
        };
        let sample = build_test_sample(&split, EntityId::property(31));
        assert!(sample.contains(&(q(1), q(5))));
    }
}
