//! PageRank power iteration and class importance scores.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use kghist_core::EntityId;

/// Directed graph over entity ids, with explicit isolated nodes.
#[derive(Clone, Debug, Default)]
pub struct RankGraph {
    pub nodes: BTreeSet<EntityId>,
    pub edges: BTreeSet<(EntityId, EntityId)>,
}

impl RankGraph {
    pub fn from_edges(edges: impl IntoIterator<Item = (EntityId, EntityId)>) -> Self {
        let mut graph = RankGraph::default();
        for (from, to) in edges {
            graph.nodes.insert(from);
            graph.nodes.insert(to);
            graph.edges.insert((from, to));
        }
        graph
    }

    pub fn add_node(&mut self, node: EntityId) {
        self.nodes.insert(node);
    }
}

/// Power-iteration PageRank. Scores sum to 1; dangling mass is spread
/// uniformly. An empty graph yields an empty map.
pub fn pagerank(
    graph: &RankGraph,
    damping: f64,
    iterations: usize,
) -> BTreeMap<EntityId, f64> {
    assert!(damping > 0.0 && damping < 1.0, "damping must be in (0, 1)");
    assert!(iterations >= 1, "need at least one iteration");

    let nodes: Vec<EntityId> = graph.nodes.iter().copied().collect();
    let n = nodes.len();
    if n == 0 {
        return BTreeMap::new();
    }
    let index: BTreeMap<EntityId, usize> = nodes.iter().copied().zip(0..).collect();

    let mut out_degree = vec![0usize; n];
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (from, to) in &graph.edges {
        let (f, t) = (index[from], index[to]);
        out_degree[f] += 1;
        incoming[t].push(f);
    }

    let mut scores = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for _ in 0..iterations {
        let dangling_mass: f64 = scores
            .iter()
            .zip(&out_degree)
            .filter(|(_, &d)| d == 0)
            .map(|(s, _)| *s)
            .sum();
        let base = (1.0 - damping) / n as f64 + damping * dangling_mass / n as f64;
        for (v, slot) in next.iter_mut().enumerate() {
            let inflow: f64 =
                incoming[v].iter().map(|&u| scores[u] / out_degree[u] as f64).sum();
            *slot = base + damping * inflow;
        }
        std::mem::swap(&mut scores, &mut next);
    }

    nodes.into_iter().zip(scores).collect()
}

/// A class and the aggregate importance of its instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub class_id: EntityId,
    pub score: f64,
    pub instance_count: u64,
}

/// How instance scores are aggregated into a class score.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Aggregation {
    #[default]
    Sum,
    Mean,
}

/// Aggregates instance scores per class, descending; ties break on the class
/// id. Instances without a score count toward `instance_count` with score 0.
pub fn class_rank(
    instance_of: &[(EntityId, EntityId)],
    scores: &BTreeMap<EntityId, f64>,
    aggregation: Aggregation,
) -> Vec<ClassScore> {
    let mut per_class: BTreeMap<EntityId, (f64, u64)> = BTreeMap::new();
    let mut seen: BTreeSet<(EntityId, EntityId)> = BTreeSet::new();
    for &(instance, class) in instance_of {
        if !seen.insert((instance, class)) {
            continue;
        }
        let entry = per_class.entry(class).or_insert((0.0, 0));
        entry.0 += scores.get(&instance).copied().unwrap_or(0.0);
        entry.1 += 1;
    }
    let mut out: Vec<ClassScore> = per_class
        .into_iter()
        .map(|(class_id, (sum, count))| ClassScore {
            class_id,
            score: match aggregation {
                Aggregation::Sum => sum,
                Aggregation::Mean => sum / count as f64,
            },
            instance_count: count,
        })
        .collect();
    out.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.class_id.cmp(&b.class_id))
    });
    out
}

/// Drops classes whose label contains `term`, e.g. housekeeping classes that
/// organize wiki content but are not conceptual classes.
pub fn filter_classes_by_label(
    ranking: Vec<ClassScore>,
    labels: &BTreeMap<EntityId, String>,
    term: &str,
) -> Vec<ClassScore> {
    ranking
        .into_iter()
        .filter(|c| labels.get(&c.class_id).map(|l| !l.contains(term)).unwrap_or(true))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: u64) -> EntityId {
        EntityId::item(n)
    }

    #[test]
    fn symmetric_two_node_graph_splits_evenly() {
        let graph = RankGraph::from_edges([(q(1), q(2)), (q(2), q(1))]);
        let scores = pagerank(&graph, 0.85, 50);
        assert!((scores[&q(1)] - 0.5).abs() < 1e-12);
        assert!((scores[&q(2)] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_node_without_edges_scores_one() {
        let mut graph = RankGraph::default();
        graph.add_node(q(1));
        let scores = pagerank(&graph, 0.85, 20);
        assert!((scores[&q(1)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_graph_gives_empty_map() {
        assert!(pagerank(&RankGraph::default(), 0.85, 10).is_empty());
    }

    #[test]
    fn scores_sum_to_one() {
        let graph = RankGraph::from_edges([
            (q(1), q(2)),
            (q(2), q(3)),
            (q(3), q(1)),
            (q(4), q(1)),
            (q(1), q(3)),
        ]);
        let scores = pagerank(&graph, 0.85, 100);
        let total: f64 = scores.values().sum();
        assert!((total - 1.0).abs() < 1e-9, "sum was {total}");
    }

    #[test]
    fn chain_matches_dense_matrix_oracle() {
        // 4-node chain 1 -> 2 -> 3 -> 4.
        let edges = [(q(1), q(2)), (q(2), q(3)), (q(3), q(4))];
        let graph = RankGraph::from_edges(edges);
        let iterations = 60;
        let damping = 0.85;
        let scores = pagerank(&graph, damping, iterations);

        // Dense transition-matrix power iteration, written independently.
        let n = 4;
        let mut matrix = vec![vec![0.0f64; n]; n]; // matrix[to][from]
        let out = [1.0, 1.0, 1.0, 0.0];
        matrix[1][0] = 1.0;
        matrix[2][1] = 1.0;
        matrix[3][2] = 1.0;
        let mut dense = vec![1.0 / n as f64; n];
        for _ in 0..iterations {
            let dangling: f64 =
                dense.iter().enumerate().filter(|(i, _)| out[*i] == 0.0).map(|(_, s)| s).sum();
            let mut next = vec![(1.0 - damping) / n as f64 + damping * dangling / n as f64; n];
            for (to, row) in matrix.iter().enumerate() {
                for (from, &weight) in row.iter().enumerate() {
                    if weight > 0.0 {
                        next[to] += damping * dense[from] / out[from];
                    }
                }
            }
            dense = next;
        }
        for (i, id) in [q(1), q(2), q(3), q(4)].iter().enumerate() {
            assert!((scores[id] - dense[i]).abs() < 1e-12, "node {id}");
        }
    }

    #[test]
    fn class_rank_sums_instance_scores() {
        let scores: BTreeMap<EntityId, f64> = [(q(1), 0.2), (q(2), 0.3)].into_iter().collect();
        let ranking = class_rank(&[(q(1), q(10)), (q(2), q(10))], &scores, Aggregation::Sum);
        assert_eq!(ranking.len(), 1);
        assert_eq!(ranking[0].class_id, q(10));
        assert!((ranking[0].score - 0.5).abs() < 1e-12);
        assert_eq!(ranking[0].instance_count, 2);
    }

    #[test]
    fn class_rank_with_no_instances_is_empty() {
        assert!(class_rank(&[], &BTreeMap::new(), Aggregation::Sum).is_empty());
    }

    #[test]
    fn unscored_instances_count_as_zero() {
        let scores: BTreeMap<EntityId, f64> = [(q(1), 0.4)].into_iter().collect();
        let ranking = class_rank(&[(q(1), q(10)), (q(2), q(10))], &scores, Aggregation::Sum);
        assert!((ranking[0].score - 0.4).abs() < 1e-12);
        assert_eq!(ranking[0].instance_count, 2);
    }

    #[test]
    fn label_filter_removes_matching_classes() {
        let scores: BTreeMap<EntityId, f64> = [(q(1), 0.4), (q(2), 0.6)].into_iter().collect();
        let ranking = class_rank(
            &[(q(1), q(10)), (q(2), q(11))],
            &scores,
            Aggregation::Sum,
        );
        let labels: BTreeMap<EntityId, String> = [
            (q(10), "Wikimedia category".to_owned()),
            (q(11), "human".to_owned()),
        ]
        .into_iter()
        .collect();
        let filtered = filter_classes_by_label(ranking, &labels, "Wikimedia");
        assert_eq!(filtered.len(), 1);
        assert_eq!(filtered[0].class_id, q(11));
    }

    #[test]
    fn aggregation_is_permutation_invariant() {
        let scores: BTreeMap<EntityId, f64> =
            [(q(1), 0.1), (q(2), 0.2), (q(3), 0.3)].into_iter().collect();
        let forward = [(q(1), q(10)), (q(2), q(10)), (q(3), q(10))];
        let backward = [(q(3), q(10)), (q(1), q(10)), (q(2), q(10))];
        let a = class_rank(&forward, &scores, Aggregation::Sum);
        let b = class_rank(&backward, &scores, Aggregation::Sum);
        assert_eq!(a, b);
    }
}
