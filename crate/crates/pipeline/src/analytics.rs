//! Edit analytics over revision histories: operation categories and their
//! transition graph, per-class operation statistics, most-removed properties,
//! and edit-war detection.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde_json::Value;
use thiserror::Error;

use kghist_core::patch::parse_pointer;
use kghist_core::{
    apply, EntityId, Object, OpKind, PatchOperation, Revision, TripleOperation,
};

use crate::extract::ExtractError;
use crate::Warning;

/// The kind of change one patch operation makes to an entity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OpCategory {
    CreateEntity,
    AddStatementGroup,
    AddStatement,
    AddQualifier,
    AddReference,
    RemoveStatementGroup,
    RemoveStatement,
    RemoveQualifier,
    RemoveReference,
    ReplaceStatement,
    ReplaceQualifier,
    ReplaceReference,
    ChangeRank,
    ChangeOrder,
    FingerprintChange,
}

impl OpCategory {
    pub fn name(self) -> &'static str {
        match self {
            OpCategory::CreateEntity => "create-entity",
            OpCategory::AddStatementGroup => "add-statement-group",
            OpCategory::AddStatement => "add-statement",
            OpCategory::AddQualifier => "add-qualifier",
            OpCategory::AddReference => "add-reference",
            OpCategory::RemoveStatementGroup => "remove-statement-group",
            OpCategory::RemoveStatement => "remove-statement",
            OpCategory::RemoveQualifier => "remove-qualifier",
            OpCategory::RemoveReference => "remove-reference",
            OpCategory::ReplaceStatement => "replace-statement",
            OpCategory::ReplaceQualifier => "replace-qualifier",
            OpCategory::ReplaceReference => "replace-reference",
            OpCategory::ChangeRank => "change-rank",
            OpCategory::ChangeOrder => "change-order",
            OpCategory::FingerprintChange => "fingerprint-change",
        }
    }
}

impl std::fmt::Display for OpCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Maps one patch operation to its category, given the entity document as it
/// was right before the operation.
///
/// Every operation of an entity's first revision (empty prior document)
/// counts as entity creation. Paths that fit no known shape fall back to
/// [`OpCategory::FingerprintChange`] with a warning.
pub fn categorize(op: &PatchOperation, prior_doc: &Value) -> (OpCategory, Option<Warning>) {
    let is_empty_doc = match prior_doc {
        Value::Object(map) => map.is_empty(),
        Value::Null => true,
        _ => false,
    };
    if is_empty_doc {
        return (OpCategory::CreateEntity, None);
    }

    let Ok(tokens) = parse_pointer(op.path()) else {
        return fallback(op, "unparseable pointer");
    };
    let head = tokens.first().map(String::as_str);
    match head {
        Some("labels") | Some("descriptions") | Some("aliases") => {
            (OpCategory::FingerprintChange, None)
        }
        Some("claims") => categorize_claims(op, &tokens),
        _ => fallback(op, "path outside the entity schema"),
    }
}

fn categorize_claims(op: &PatchOperation, tokens: &[String]) -> (OpCategory, Option<Warning>) {
    match tokens.len() {
        // Whole claims map or one statement group.
        1 | 2 => match op {
            PatchOperation::Add { .. } => (OpCategory::AddStatementGroup, None),
            PatchOperation::Remove { .. } => (OpCategory::RemoveStatementGroup, None),
            PatchOperation::Replace { .. } => (OpCategory::ReplaceStatement, None),
        },
        // One statement.
        3 => match op {
            PatchOperation::Add { .. } => (OpCategory::AddStatement, None),
            PatchOperation::Remove { .. } => (OpCategory::RemoveStatement, None),
            PatchOperation::Replace { .. } => (OpCategory::ReplaceStatement, None),
        },
        // Inside one statement.
        _ => match tokens[3].as_str() {
            // Mainsnak and statement-id rewrites are how index-wise diffs
            // express replacing one statement with another.
            "mainsnak" | "id" => (OpCategory::ReplaceStatement, None),
            "rank" => (OpCategory::ChangeRank, None),
            "qualifiers-order" | "statements-order" => (OpCategory::ChangeOrder, None),
            "qualifiers" => match op {
                PatchOperation::Add { .. } => (OpCategory::AddQualifier, None),
                PatchOperation::Remove { .. } => (OpCategory::RemoveQualifier, None),
                PatchOperation::Replace { .. } => (OpCategory::ReplaceQualifier, None),
            },
            "references" => match op {
                PatchOperation::Add { .. } => (OpCategory::AddReference, None),
                PatchOperation::Remove { .. } => (OpCategory::RemoveReference, None),
                PatchOperation::Replace { .. } => (OpCategory::ReplaceReference, None),
            },
            _ => fallback(op, "unknown statement field"),
        },
    }
}

fn fallback(op: &PatchOperation, reason: &str) -> (OpCategory, Option<Warning>) {
    (
        OpCategory::FingerprintChange,
        Some(Warning::new(format!(
            "path {:?} not classifiable ({reason}); counted as fingerprint-change",
            op.path()
        ))),
    )
}

pub type CategorySequences = BTreeMap<EntityId, Vec<OpCategory>>;

/// Per-entity category sequences, in revision order.
///
/// Rebuilds each entity's document by replaying diffs so that every
/// operation is categorized against its true prior state.
pub fn entity_category_sequences(
    revisions: &[Revision],
) -> Result<(CategorySequences, Vec<Warning>), ExtractError> {
    let mut sorted: Vec<&Revision> = revisions.iter().collect();
    sorted.sort_by_key(|r| (r.timestamp, r.id));

    let mut docs: HashMap<EntityId, Value> = HashMap::new();
    let mut sequences: BTreeMap<EntityId, Vec<OpCategory>> = BTreeMap::new();
    let mut warnings = Vec::new();

    for revision in sorted {
        let doc = docs
            .entry(revision.entity_id)
            .or_insert_with(|| Value::Object(Default::default()));
        let sequence = sequences.entry(revision.entity_id).or_default();
        // Every operation is categorized against the document as it stood
        // when the revision started.
        let revision_start = doc.clone();
        for op in &revision.entity_diff {
            let (category, warning) = categorize(op, &revision_start);
            sequence.push(category);
            if let Some(w) = warning {
                warnings.push(w);
            }
        }
        *doc = apply(doc, &revision.entity_diff)
            .map_err(|source| ExtractError::Apply { revision_id: revision.id, source })?;
    }
    Ok((sequences, warnings))
}

/// Counts of category occurrences and of consecutive category transitions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TransitionGraph {
    pub state_counts: BTreeMap<OpCategory, u64>,
    pub edge_counts: BTreeMap<(OpCategory, OpCategory), u64>,
}

impl TransitionGraph {
    pub fn total_transitions(&self) -> u64 {
        self.edge_counts.values().sum()
    }

    /// GraphViz rendering with edge weights.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph transitions {\n");
        for (category, count) in &self.state_counts {
            out.push_str(&format!("  \"{category}\" [count={count}];\n"));
        }
        for ((from, to), count) in &self.edge_counts {
            out.push_str(&format!("  \"{from}\" -> \"{to}\" [label={count}];\n"));
        }
        out.push_str("}\n");
        out
    }
}

/// Accumulates consecutive-category transitions across entities, then prunes
/// edges whose count is below `prune_fraction` of their source state's total
/// outgoing transitions.
pub fn transition_graph<'a>(
    sequences: impl IntoIterator<Item = &'a [OpCategory]>,
    prune_fraction: f64,
) -> TransitionGraph {
    assert!((0.0..1.0).contains(&prune_fraction), "prune fraction must be in [0, 1)");
    let mut graph = TransitionGraph::default();
    for sequence in sequences {
        for category in sequence {
            *graph.state_counts.entry(*category).or_default() += 1;
        }
        for pair in sequence.windows(2) {
            *graph.edge_counts.entry((pair[0], pair[1])).or_default() += 1;
        }
    }
    if prune_fraction > 0.0 {
        let mut outgoing: BTreeMap<OpCategory, u64> = BTreeMap::new();
        for ((from, _), count) in &graph.edge_counts {
            *outgoing.entry(*from).or_default() += count;
        }
        graph.edge_counts.retain(|(from, _), count| {
            (*count as f64) >= prune_fraction * outgoing[from] as f64
        });
    }
    graph
}

/// Mean per-instance operation counts for one class, split by patch kind.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassOperationStats {
    pub class_id: EntityId,
    pub instance_count: u64,
    pub mean_additions: f64,
    pub mean_removals: f64,
    pub mean_replacements: f64,
}

impl ClassOperationStats {
    pub fn mean_total(&self) -> f64 {
        self.mean_additions + self.mean_removals + self.mean_replacements
    }
}

/// Per-entity patch-kind counts across a revision set.
fn per_entity_op_counts(revisions: &[Revision]) -> BTreeMap<EntityId, (u64, u64, u64)> {
    let mut counts: BTreeMap<EntityId, (u64, u64, u64)> = BTreeMap::new();
    for revision in revisions {
        let entry = counts.entry(revision.entity_id).or_default();
        for op in &revision.entity_diff {
            match op {
                PatchOperation::Add { .. } => entry.0 += 1,
                PatchOperation::Remove { .. } => entry.1 += 1,
                PatchOperation::Replace { .. } => entry.2 += 1,
            }
        }
    }
    counts
}

/// Mean additions/removals/replacements per instance for every class, sorted
/// by total mean descending. A replacement counts once, not as its
/// removal-plus-addition expansion. Instances typed with several classes
/// count toward each of them.
pub fn class_operation_stats(
    revisions: &[Revision],
    class_membership: &BTreeMap<EntityId, BTreeSet<EntityId>>,
) -> Vec<ClassOperationStats> {
    let per_entity = per_entity_op_counts(revisions);
    let mut per_class: BTreeMap<EntityId, (u64, u64, u64, u64)> = BTreeMap::new();
    for (instance, classes) in class_membership {
        let (a, r, p) = per_entity.get(instance).copied().unwrap_or_default();
        for class in classes {
            let entry = per_class.entry(*class).or_default();
            entry.0 += a;
            entry.1 += r;
            entry.2 += p;
            entry.3 += 1;
        }
    }
    let mut out: Vec<ClassOperationStats> = per_class
        .into_iter()
        .filter(|(_, (_, _, _, n))| *n > 0)
        .map(|(class_id, (a, r, p, n))| ClassOperationStats {
            class_id,
            instance_count: n,
            mean_additions: a as f64 / n as f64,
            mean_removals: r as f64 / n as f64,
            mean_replacements: p as f64 / n as f64,
        })
        .collect();
    out.sort_by(|x, y| {
        y.mean_total()
            .partial_cmp(&x.mean_total())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.class_id.cmp(&y.class_id))
    });
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalyticsError {
    #[error("class {class} has no instances")]
    UnknownClass { class: EntityId },
}

/// Properties ranked by statement removals per instance of `class_id`.
///
/// A removal is a `remove` patch operation on a claims path (a statement or
/// a whole statement group counts once).
pub fn most_removed_properties(
    revisions: &[Revision],
    class_membership: &BTreeMap<EntityId, BTreeSet<EntityId>>,
    class_id: EntityId,
) -> Result<Vec<(EntityId, f64)>, AnalyticsError> {
    let instances: BTreeSet<EntityId> = class_membership
        .iter()
        .filter(|(_, classes)| classes.contains(&class_id))
        .map(|(instance, _)| *instance)
        .collect();
    if instances.is_empty() {
        return Err(AnalyticsError::UnknownClass { class: class_id });
    }

    let mut removal_counts: BTreeMap<EntityId, u64> = BTreeMap::new();
    for revision in revisions {
        if !instances.contains(&revision.entity_id) {
            continue;
        }
        for op in &revision.entity_diff {
            let PatchOperation::Remove { path } = op else {
                continue;
            };
            let Ok(tokens) = parse_pointer(path) else {
                continue;
            };
            if tokens.len() < 2 || tokens.len() > 3 || tokens[0] != "claims" {
                continue;
            }
            if let Ok(property) = tokens[1].parse::<EntityId>() {
                *removal_counts.entry(property).or_default() += 1;
            }
        }
    }

    let n = instances.len() as f64;
    let mut out: Vec<(EntityId, f64)> = removal_counts
        .into_iter()
        .map(|(property, count)| (property, count as f64 / n))
        .collect();
    out.sort_by(|a, b| {
        b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0))
    });
    Ok(out)
}

/// Report label for a property: its stored label, or the deleted-property
/// marker when no label survives.
pub fn property_display(property: EntityId, labels: &BTreeMap<EntityId, String>) -> String {
    match labels.get(&property) {
        Some(label) => label.clone(),
        None => format!("[deleted property]({property})"),
    }
}

/// One completed add -> remove/replace -> re-add cycle of a property value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EditWarRecord {
    pub entity: EntityId,
    pub property: EntityId,
    pub value: Object,
    pub add_ordinal: u64,
    pub remove_ordinal: u64,
    pub readd_ordinal: u64,
}

enum WarState {
    Present { add: u64 },
    Removed { add: u64, remove: u64 },
}

/// Detects edit wars in an ordinal-sorted operation stream.
///
/// One war is recorded per re-addition: a value that cycles
/// add -> remove -> add -> remove -> add yields two records. Replacements
/// appear in the stream as removal-plus-addition, so they participate
/// naturally. Repeated additions of a value already present, and removals of
/// a value already absent, are ignored.
pub fn detect_edit_wars(ops: &[TripleOperation]) -> Vec<EditWarRecord> {
    let mut states: HashMap<(EntityId, EntityId, Object), WarState> = HashMap::new();
    let mut wars = Vec::new();
    for op in ops {
        let key = (op.triple.subject, op.triple.predicate, op.triple.object.clone());
        match op.kind {
            OpKind::Addition => match states.get(&key) {
                None => {
                    states.insert(key, WarState::Present { add: op.ordinal });
                }
                Some(WarState::Present { .. }) => {}
                Some(WarState::Removed { add, remove }) => {
                    wars.push(EditWarRecord {
                        entity: key.0,
                        property: key.1,
                        value: key.2.clone(),
                        add_ordinal: *add,
                        remove_ordinal: *remove,
                        readd_ordinal: op.ordinal,
                    });
                    states.insert(key, WarState::Present { add: op.ordinal });
                }
            },
            OpKind::Removal => {
                if let Some(WarState::Present { add }) = states.get(&key) {
                    states.insert(
                        key.clone(),
                        WarState::Removed { add: *add, remove: op.ordinal },
                    );
                }
            }
        }
    }
    wars.sort_by_key(|w| w.readd_ordinal);
    wars
}

/// True when a triple's (subject, predicate, object) was ever the subject of
/// an edit war.
pub fn war_triples(wars: &[EditWarRecord]) -> BTreeSet<(EntityId, EntityId, Object)> {
    wars.iter().map(|w| (w.entity, w.property, w.value.clone())).collect()
}

/// War counts per property (descending) and mean wars per instance per class
/// (descending).
pub struct ConflictRankings {
    pub per_property: Vec<(EntityId, u64)>,
    pub per_class: Vec<(EntityId, f64)>,
}

pub fn conflict_rankings(
    wars: &[EditWarRecord],
    class_membership: &BTreeMap<EntityId, BTreeSet<EntityId>>,
) -> ConflictRankings {
    let mut per_property: BTreeMap<EntityId, u64> = BTreeMap::new();
    let mut wars_per_entity: BTreeMap<EntityId, u64> = BTreeMap::new();
    for war in wars {
        *per_property.entry(war.property).or_default() += 1;
        *wars_per_entity.entry(war.entity).or_default() += 1;
    }

    let mut per_class_totals: BTreeMap<EntityId, (u64, u64)> = BTreeMap::new();
    for (instance, classes) in class_membership {
        let count = wars_per_entity.get(instance).copied().unwrap_or(0);
        for class in classes {
            let entry = per_class_totals.entry(*class).or_default();
            entry.0 += count;
            entry.1 += 1;
        }
    }

    let mut per_property: Vec<(EntityId, u64)> = per_property.into_iter().collect();
    per_property.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut per_class: Vec<(EntityId, f64)> = per_class_totals
        .into_iter()
        .filter(|(_, (_, n))| *n > 0)
        .map(|(class, (total, n))| (class, total as f64 / n as f64))
        .collect();
    per_class.sort_by(|a, b| {
        b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0))
    });

    ConflictRankings { per_property, per_class }
}
