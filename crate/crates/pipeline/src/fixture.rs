//! Deterministic synthetic revision corpus.
//!
//! Generates a small wiki-style history: class and property pages plus a few
//! dozen instance pages, each with a scripted-random edit history covering
//! statement additions, value replacements, removals, qualifier and reference
//! creation, rank changes, fingerprint edits, unknown-value snaks, and
//! scripted edit wars. The same seed always yields byte-identical output.

use std::collections::VecDeque;

use rand_chacha::ChaCha8Rng;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

use kghist_core::{diff, EntityId, Revision, Timestamp};

#[derive(Clone, Debug)]
pub struct FixtureConfig {
    pub seed: u64,
    pub instance_count: usize,
    pub min_instance_revisions: usize,
    pub max_instance_revisions: usize,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        FixtureConfig {
            seed: 42,
            instance_count: 48,
            min_instance_revisions: 9,
            max_instance_revisions: 14,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FixtureRevision {
    pub id: u64,
    pub parent_id: Option<u64>,
    pub timestamp: Timestamp,
    pub username: String,
    pub comment: Option<String>,
    pub snapshot: Value,
}

#[derive(Clone, Debug)]
pub struct FixturePage {
    pub entity: EntityId,
    pub revisions: Vec<FixtureRevision>,
}

#[derive(Clone, Debug, Default)]
pub struct FixtureCorpus {
    pub pages: Vec<FixturePage>,
}

const CLASS_LABELS: [(u64, &str); 12] = [
    (100, "human"),
    (101, "taxon"),
    (102, "sovereign state"),
    (103, "big city"),
    (104, "Wikimedia category"),
    (105, "Wikimedia list article"),
    (106, "language"),
    (107, "chemical element"),
    (108, "mountain"),
    (109, "river"),
    (110, "company"),
    (111, "city"),
];

// P39 has no page on purpose: reports must render it as a deleted property.
const PROPERTY_LABELS: [(u64, &str); 9] = [
    (31, "instance of"),
    (21, "sex or gender"),
    (17, "country"),
    (569, "date of birth"),
    (570, "date of death"),
    (625, "coordinate location"),
    (735, "given name"),
    (856, "official website"),
    (1082, "population"),
];

const USERNAMES: [&str; 8] =
    ["Alice", "Bob", "Carol", "Dave", "Eve", "HistBot", "Trent", "192.168.7.25"];

/// One scripted mutation of a working entity document.
enum Edit {
    AddSimple { property: u64, datavalue: Value },
    AddQualified,
    AddReferenced { property: u64, datavalue: Value },
    AddSomeValue,
    AddType { class: u64 },
    ReplaceValue,
    RemoveStatement,
    Fingerprint,
    RankChange,
    WarAdd { value: u64 },
    WarRemove { value: u64 },
    WarReadd { value: u64 },
}

struct PageBuilder {
    entity: u64,
    doc: Value,
    statement_counter: u64,
    pending: VecDeque<Edit>,
    war_active: bool,
}

impl PageBuilder {
    fn new(entity: u64) -> Self {
        PageBuilder {
            entity,
            doc: json!({}),
            statement_counter: 0,
            pending: VecDeque::new(),
            war_active: false,
        }
    }

    fn next_statement_id(&mut self) -> String {
        self.statement_counter += 1;
        format!("Q{}$s{}", self.entity, self.statement_counter)
    }

    fn claims_mut(&mut self) -> &mut serde_json::Map<String, Value> {
        let doc = self.doc.as_object_mut().expect("document is an object");
        doc.entry("claims").or_insert_with(|| json!({}));
        doc.get_mut("claims").unwrap().as_object_mut().unwrap()
    }

    fn push_statement(&mut self, property: u64, statement: Value) {
        let claims = self.claims_mut();
        let key = format!("P{property}");
        let group = claims.entry(key).or_insert_with(|| json!([]));
        group.as_array_mut().unwrap().push(statement);
    }

    fn entity_statement(&mut self, property: u64, target: u64) -> Value {
        let id = self.next_statement_id();
        json!({
            "id": id,
            "mainsnak": {"snaktype": "value", "property": format!("P{property}"),
                         "datavalue": {"type": "wikibase-entityid", "value": format!("Q{target}")}},
            "rank": "normal"
        })
    }

    fn value_statement(&mut self, property: u64, datavalue: Value) -> Value {
        let id = self.next_statement_id();
        json!({
            "id": id,
            "mainsnak": {"snaktype": "value", "property": format!("P{property}"),
                         "datavalue": datavalue},
            "rank": "normal"
        })
    }


    /// All `(property, index, plain)` coordinates of current statements;
    /// `plain` marks value statements without qualifiers or references.
    fn statement_coordinates(&self) -> Vec<(String, usize, bool)> {
        let Some(claims) = self.doc.get("claims").and_then(Value::as_object) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for (prop, group) in claims {
            let Some(items) = group.as_array() else { continue };
            for (i, stmt) in items.iter().enumerate() {
                let has_value = stmt.pointer("/mainsnak/datavalue").is_some();
                let has_decor =
                    stmt.get("qualifiers").is_some() || stmt.get("references").is_some();
                out.push((prop.clone(), i, has_value && !has_decor));
            }
        }
        out
    }
}

/// Generates the corpus for a configuration; the default configuration is
/// the shipped test corpus.
pub fn generate(config: &FixtureConfig) -> FixtureCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut corpus = FixtureCorpus::default();

    // Property pages: one creation revision each.
    for (number, label) in PROPERTY_LABELS {
        corpus.pages.push(FixturePage {
            entity: EntityId::property(number),
            revisions: vec![snapshot_revision(json!({
                "id": format!("P{number}"),
                "labels": {"en": label},
            }))],
        });
    }

    // Class pages: creation plus an occasional description edit.
    for (number, label) in CLASS_LABELS {
        let creation = json!({
            "id": format!("Q{number}"),
            "labels": {"en": label},
        });
        let mut revisions = vec![snapshot_revision(creation.clone())];
        if number % 3 == 0 {
            let mut edited = creation;
            edited["descriptions"] = json!({"en": format!("the {label} class")});
            revisions.push(snapshot_revision(edited));
        }
        corpus.pages.push(FixturePage { entity: EntityId::item(number), revisions });
    }

    // Instance pages with scripted-random edit histories.
    for n in 1..=config.instance_count as u64 {
        let revision_count =
            rng.random_range(config.min_instance_revisions..=config.max_instance_revisions);
        corpus.pages.push(instance_page(n, revision_count, &mut rng));
    }

    assign_ids_and_timestamps(&mut corpus, &mut rng);
    corpus
}

fn snapshot_revision(snapshot: Value) -> FixtureRevision {
    // Ids and timestamps are assigned globally afterwards.
    FixtureRevision {
        id: 0,
        parent_id: None,
        timestamp: Timestamp::from_unix_seconds(0),
        username: String::new(),
        comment: None,
        snapshot,
    }
}

fn instance_page(n: u64, revision_count: usize, rng: &mut ChaCha8Rng) -> FixturePage {
    let mut builder = PageBuilder::new(n);

    // Creation: label plus one or two types.
    builder.doc = json!({
        "id": format!("Q{n}"),
        "labels": {"en": format!("entity {n}")},
    });
    let class_pool: Vec<u64> = CLASS_LABELS.iter().map(|(q, _)| *q).collect();
    let first_class = *class_pool.choose(rng).unwrap();
    let stmt = builder.entity_statement(31, first_class);
    builder.push_statement(31, stmt);
    if rng.random_bool(0.4) {
        let second = *class_pool.choose(rng).unwrap();
        if second != first_class {
            let stmt = builder.entity_statement(31, second);
            builder.push_statement(31, stmt);
        }
    }

    let mut revisions = vec![snapshot_revision(builder.doc.clone())];
    while revisions.len() < revision_count {
        let edit = builder.pending.pop_front().unwrap_or_else(|| sample_edit(&builder, rng));
        if apply_edit(&mut builder, edit, rng) {
            revisions.push(snapshot_revision(builder.doc.clone()));
        }
    }
    FixturePage { entity: EntityId::item(n), revisions }
}

fn sample_edit(builder: &PageBuilder, rng: &mut ChaCha8Rng) -> Edit {
    let roll = rng.random_range(0..100u32);
    match roll {
        0..=19 => {
            let (property, datavalue) = random_simple_value(builder.entity, rng);
            Edit::AddSimple { property, datavalue }
        }
        20..=28 => Edit::AddQualified,
        29..=37 => {
            let (property, datavalue) = random_simple_value(builder.entity, rng);
            Edit::AddReferenced { property, datavalue }
        }
        38..=49 => Edit::ReplaceValue,
        50..=60 => Edit::RemoveStatement,
        61..=72 => Edit::Fingerprint,
        73..=77 => Edit::RankChange,
        78..=81 => Edit::AddSomeValue,
        82..=91 => {
            let class = CLASS_LABELS[rng.random_range(0..CLASS_LABELS.len())].0;
            Edit::AddType { class }
        }
        _ => {
            // A war needs three revisions; only one war in flight at a time.
            if builder.war_active {
                Edit::Fingerprint
            } else {
                let value = if rng.random_bool(0.5) { 6581097 } else { 6581072 };
                Edit::WarAdd { value }
            }
        }
    }
}

fn random_simple_value(entity: u64, rng: &mut ChaCha8Rng) -> (u64, Value) {
    match rng.random_range(0..6u32) {
        0 => (17, json!({"type": "wikibase-entityid", "value": format!("Q{}", 102)})),
        1 => (735, json!({"type": "wikibase-entityid", "value": format!("Q{}", 200 + rng.random_range(0..40u64))})),
        2 => (1082, json!({"type": "quantity", "value": format!("{}", 1000 + rng.random_range(0..2_000_000u64))})),
        3 => (625, json!({"type": "globecoordinate",
                          "value": format!("Point({}.{} {}.{})", rng.random_range(-179..179i64), rng.random_range(0..99u32), rng.random_range(-89..89i64), rng.random_range(0..99u32))})),
        4 => (856, json!({"type": "string", "value": format!("https://example.org/{entity}/{}", rng.random_range(0..1000u32))})),
        _ => (569, json!({"type": "time", "value": format!("+19{:02}-0{}-1{}T00:00:00Z", rng.random_range(0..99u32), rng.random_range(1..9u32), rng.random_range(0..9u32))})),
    }
}

/// Applies one edit to the working document. Returns false when the edit was
/// impossible in the current state (nothing to remove, for example) and no
/// revision should be recorded.
fn apply_edit(builder: &mut PageBuilder, edit: Edit, rng: &mut ChaCha8Rng) -> bool {
    match edit {
        Edit::AddSimple { property, datavalue } => {
            if duplicate_value(builder, property, &datavalue) {
                return false;
            }
            let stmt = builder.value_statement(property, datavalue);
            builder.push_statement(property, stmt);
            true
        }
        Edit::AddQualified => {
            // Position held with a start-time qualifier; never simple.
            let mut stmt = builder.entity_statement(39, 300 + rng.random_range(0..20u64));
            stmt["qualifiers"] = json!([{
                "snaktype": "value", "property": "P580",
                "datavalue": {"type": "time", "value": "+2001-01-01T00:00:00Z"}
            }]);
            builder.push_statement(39, stmt);
            true
        }
        Edit::AddReferenced { property, datavalue } => {
            if duplicate_value(builder, property, &datavalue) {
                return false;
            }
            let mut stmt = builder.value_statement(property, datavalue);
            stmt["references"] = json!([[{
                "snaktype": "value", "property": "P856",
                "datavalue": {"type": "string", "value": "https://source.example.org"}
            }]]);
            builder.push_statement(property, stmt);
            true
        }
        Edit::AddType { class } => {
            let datavalue =
                json!({"type": "wikibase-entityid", "value": format!("Q{class}")});
            if duplicate_value(builder, 31, &datavalue) {
                return false;
            }
            let stmt = builder.entity_statement(31, class);
            builder.push_statement(31, stmt);
            true
        }
        Edit::AddSomeValue => {
            if builder.doc.pointer("/claims/P570").is_some() {
                return false;
            }
            let id = builder.next_statement_id();
            let stmt = json!({
                "id": id,
                "mainsnak": {"snaktype": "somevalue", "property": "P570"},
                "rank": "normal"
            });
            builder.push_statement(570, stmt);
            true
        }
        Edit::ReplaceValue => {
            // Replace the mainsnak value of a random simple statement.
            let simple: Vec<(String, usize, bool)> = builder
                .statement_coordinates()
                .into_iter()
                .filter(|(p, _, simple)| *simple && p != "P31" && p != "P570")
                .collect();
            let Some((prop, index, _)) = simple.choose(rng).cloned() else {
                return false;
            };
            let property: u64 = prop[1..].parse().unwrap();
            let (_, datavalue) = random_simple_value(builder.entity, rng);
            if duplicate_value(builder, property, &datavalue) {
                return false;
            }
            let slot = builder
                .doc
                .pointer_mut(&format!("/claims/{prop}/{index}/mainsnak/datavalue"))
                .expect("statement exists");
            let replacement = match slot.get("type").and_then(Value::as_str) {
                Some("wikibase-entityid") => {
                    json!({"type": "wikibase-entityid", "value": format!("Q{}", 200 + rng.random_range(40..90u64))})
                }
                Some("quantity") => {
                    json!({"type": "quantity", "value": format!("{}", 5_000_000 + rng.random_range(0..1_000_000u64))})
                }
                Some("time") => json!({"type": "time", "value": "+2000-01-01T00:00:00Z"}),
                Some("globecoordinate") => json!({"type": "globecoordinate", "value": "Point(0.0 0.0)"}),
                _ => json!({"type": "string", "value": format!("https://replaced.example.org/{}", rng.random_range(0..1000u32))}),
            };
            if *slot == replacement {
                return false;
            }
            *slot = replacement;
            true
        }
        Edit::RemoveStatement => {
            let coordinates = builder.statement_coordinates();
            let removable: Vec<_> =
                coordinates.iter().filter(|(p, _, _)| p != "P31").cloned().collect();
            let Some((prop, index, _)) = removable.choose(rng).cloned() else {
                return false;
            };
            let group = builder
                .doc
                .pointer_mut(&format!("/claims/{prop}"))
                .and_then(Value::as_array_mut)
                .expect("group exists");
            group.remove(index);
            if group.is_empty() {
                builder.claims_mut().remove(&prop);
            }
            true
        }
        Edit::Fingerprint => {
            let doc = builder.doc.as_object_mut().unwrap();
            match rng.random_range(0..3u32) {
                0 => {
                    doc.entry("descriptions").or_insert_with(|| json!({}))["en"] =
                        json!(format!("description {}", rng.random_range(0..100u32)));
                }
                1 => {
                    let aliases = doc.entry("aliases").or_insert_with(|| json!({}));
                    let list = aliases
                        .as_object_mut()
                        .unwrap()
                        .entry("en")
                        .or_insert_with(|| json!([]));
                    list.as_array_mut()
                        .unwrap()
                        .push(json!(format!("alias {}", rng.random_range(0..100u32))));
                }
                _ => {
                    doc["labels"]["en"] =
                        json!(format!("entity {} (v{})", builder.entity, rng.random_range(0..50u32)));
                }
            }
            true
        }
        Edit::RankChange => {
            let coordinates = builder.statement_coordinates();
            let Some((prop, index, _)) = coordinates.choose(rng).cloned() else {
                return false;
            };
            let slot = builder
                .doc
                .pointer_mut(&format!("/claims/{prop}/{index}/rank"))
                .expect("statements carry ranks");
            let new_rank = if slot == "normal" { json!("preferred") } else { json!("normal") };
            *slot = new_rank;
            true
        }
        Edit::WarAdd { value } => {
            if builder.doc.pointer("/claims/P21").is_some() {
                return false;
            }
            let stmt = builder.entity_statement(21, value);
            builder.push_statement(21, stmt);
            builder.war_active = true;
            builder.pending.push_back(Edit::WarRemove { value });
            builder.pending.push_back(Edit::WarReadd { value });
            true
        }
        Edit::WarRemove { value } => {
            let group = builder.claims_mut().remove("P21");
            debug_assert!(group.is_some(), "war removal follows war addition");
            let _ = value;
            true
        }
        Edit::WarReadd { value } => {
            let stmt = builder.entity_statement(21, value);
            builder.push_statement(21, stmt);
            builder.war_active = false;
            true
        }
    }
}

fn duplicate_value(builder: &PageBuilder, property: u64, datavalue: &Value) -> bool {
    let Some(group) = builder.doc.pointer(&format!("/claims/P{property}")) else {
        return false;
    };
    group
        .as_array()
        .map(|items| {
            items.iter().any(|stmt| {
                stmt.pointer("/mainsnak/datavalue").map(|dv| dv == datavalue).unwrap_or(false)
            })
        })
        .unwrap_or(false)
}

/// Assigns globally unique revision ids and interleaved timestamps: pages
/// advance round-robin so their histories overlap in time.
fn assign_ids_and_timestamps(corpus: &mut FixtureCorpus, rng: &mut ChaCha8Rng) {
    let mut schedule: Vec<(usize, usize)> = Vec::new();
    let max_revisions = corpus.pages.iter().map(|p| p.revisions.len()).max().unwrap_or(0);
    for round in 0..max_revisions {
        for (page_index, page) in corpus.pages.iter().enumerate() {
            if round < page.revisions.len() {
                schedule.push((page_index, round));
            }
        }
    }

    // 2021-01-01T00:00:00Z.
    let mut clock = Timestamp::parse("2021-01-01T00:00:00Z").unwrap().unix_seconds();
    let mut last_of_page: Vec<Option<u64>> = vec![None; corpus.pages.len()];
    for (id, (page_index, revision_index)) in (1_000u64..).zip(schedule) {
        clock += rng.random_range(120..5400i64);
        let revision = &mut corpus.pages[page_index].revisions[revision_index];
        revision.id = id;
        revision.parent_id = last_of_page[page_index];
        revision.timestamp = Timestamp::from_unix_seconds(clock);
        revision.username = USERNAMES[rng.random_range(0..USERNAMES.len())].to_owned();
        revision.comment = if rng.random_bool(0.3) {
            Some(format!("edit #{revision_index}"))
        } else {
            None
        };
        last_of_page[page_index] = Some(id);
    }
}

impl FixtureCorpus {
    pub fn revision_count(&self) -> usize {
        self.pages.iter().map(|p| p.revisions.len()).sum()
    }

    /// MediaWiki-style XML export of the corpus.
    pub fn to_xml(&self) -> String {
        let mut out = String::from("<mediawiki xml:lang=\"en\">\n");
        for page in &self.pages {
            out.push_str("  <page>\n");
            out.push_str(&format!("    <title>{}</title>\n    <ns>0</ns>\n", page.entity));
            for revision in &page.revisions {
                out.push_str("    <revision>\n");
                out.push_str(&format!("      <id>{}</id>\n", revision.id));
                if let Some(parent) = revision.parent_id {
                    out.push_str(&format!("      <parentid>{parent}</parentid>\n"));
                }
                out.push_str(&format!("      <timestamp>{}</timestamp>\n", revision.timestamp));
                if revision.username.contains('.') {
                    out.push_str(&format!(
                        "      <contributor><ip>{}</ip></contributor>\n",
                        revision.username
                    ));
                } else {
                    out.push_str(&format!(
                        "      <contributor><username>{}</username></contributor>\n",
                        revision.username
                    ));
                }
                if let Some(comment) = &revision.comment {
                    out.push_str(&format!("      <comment>{}</comment>\n", escape_xml(comment)));
                }
                out.push_str(&format!(
                    "      <text>{}</text>\n",
                    escape_xml(&revision.snapshot.to_string())
                ));
                out.push_str("    </revision>\n");
            }
            out.push_str("  </page>\n");
        }
        out.push_str("</mediawiki>\n");
        out
    }

    /// The corpus as diffed revision records, bypassing XML.
    pub fn to_records(&self) -> Vec<Revision> {
        let mut records = Vec::with_capacity(self.revision_count());
        for page in &self.pages {
            let mut previous = json!({});
            for revision in &page.revisions {
                records.push(Revision {
                    id: revision.id,
                    parent_id: revision.parent_id,
                    entity_id: page.entity,
                    timestamp: revision.timestamp,
                    username: revision.username.clone(),
                    comment: revision.comment.clone(),
                    entity_diff: diff(&previous, &revision.snapshot),
                });
                previous = revision.snapshot.clone();
            }
        }
        records.sort_by_key(|r| (r.timestamp, r.id));
        records
    }

    /// The corpus as JSON-lines revision records.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for record in self.to_records() {
            out.push_str(&serde_json::to_string(&record).expect("records serialize"));
            out.push('\n');
        }
        out
    }
}

fn escape_xml(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_corpus_is_big_enough() {
        let corpus = generate(&FixtureConfig::default());
        assert!(corpus.pages.len() >= 50, "{} pages", corpus.pages.len());
        assert!(corpus.revision_count() >= 500, "{} revisions", corpus.revision_count());
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate(&FixtureConfig::default());
        let b = generate(&FixtureConfig::default());
        assert_eq!(a.to_xml(), b.to_xml());
        assert_eq!(a.to_jsonl(), b.to_jsonl());
    }

    #[test]
    fn consecutive_snapshots_differ() {
        let corpus = generate(&FixtureConfig::default());
        for page in &corpus.pages {
            for pair in page.revisions.windows(2) {
                assert_ne!(pair[0].snapshot, pair[1].snapshot, "page {}", page.entity);
            }
        }
    }

    #[test]
    fn page_revisions_are_chronological_chains() {
        let corpus = generate(&FixtureConfig::default());
        for page in &corpus.pages {
            let mut previous: Option<&FixtureRevision> = None;
            for revision in &page.revisions {
                if let Some(prev) = previous {
                    assert!(revision.timestamp > prev.timestamp);
                    assert_eq!(revision.parent_id, Some(prev.id));
                } else {
                    assert_eq!(revision.parent_id, None);
                }
                previous = Some(revision);
            }
        }
    }

    #[test]
    fn corpus_contains_edit_wars_and_decorated_statements() {
        let corpus = generate(&FixtureConfig::default());
        let has_war_property = corpus.pages.iter().any(|p| {
            p.revisions.iter().any(|r| r.snapshot.pointer("/claims/P21").is_some())
        });
        let has_qualified = corpus.pages.iter().any(|p| {
            p.revisions
                .iter()
                .any(|r| r.snapshot.pointer("/claims/P39/0/qualifiers").is_some())
        });
        let has_somevalue = corpus.pages.iter().any(|p| {
            p.revisions.iter().any(|r| {
                r.snapshot.pointer("/claims/P570/0/mainsnak/snaktype")
                    == Some(&json!("somevalue"))
            })
        });
        assert!(has_war_property);
        assert!(has_qualified);
        assert!(has_somevalue);
    }
}
