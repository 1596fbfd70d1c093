//! Two-part file store for revision histories.
//!
//! A built store directory holds three files:
//!
//! * `entities.jsonl` — the final canonical JSON document of each entity, one
//!   per line, sorted by entity id;
//! * `revisions.jsonl` — every revision record in global `(timestamp, id)`
//!   order, one JSON object per line;
//! * `index.json` — byte offsets of each entity's snapshot line and revision
//!   lines, so readers can seek instead of scanning.
//!
//! All bytes are deterministic functions of the input records, which makes
//! re-ingestion idempotent and store files diffable.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use kghist_core::canon::canonical_json;
use kghist_core::{apply, EntityDocument, EntityId, PatchError, Revision};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("entity {entity} not found in store")]
    NotFound { entity: EntityId },
    #[error("entity {entity} has {count} revisions; index {index} is out of range")]
    RevisionOutOfRange { entity: EntityId, index: usize, count: usize },
    #[error("entity {entity}: revision {revision_id} does not apply: {source}")]
    CorruptChain {
        entity: EntityId,
        revision_id: u64,
        #[source]
        source: PatchError,
    },
    #[error("store record is not valid JSON: {0}")]
    Corrupt(#[from] serde_json::Error),
    #[error("entity {entity}: {reason}")]
    Document { entity: EntityId, reason: String },
}

/// Paths of the three store files.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoreLayout {
    pub entities_file: PathBuf,
    pub revisions_file: PathBuf,
    pub index_file: PathBuf,
}

impl StoreLayout {
    /// The standard layout inside one store directory.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        StoreLayout {
            entities_file: dir.join("entities.jsonl"),
            revisions_file: dir.join("revisions.jsonl"),
            index_file: dir.join("index.json"),
        }
    }
}

/// Corpus-level counts reported after a build.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreStats {
    pub entities: u64,
    pub revisions: u64,
    /// Total patch operations across all revision diffs.
    pub operations: u64,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct StoreIndex {
    entities: BTreeMap<String, EntityIndexEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EntityIndexEntry {
    snapshot_offset: u64,
    revision_offsets: Vec<u64>,
}

/// Writes the three store files from a set of revision records.
///
/// Records are sorted globally by `(timestamp, revision id)`; each entity's
/// final document is reconstructed by replaying its diff chain from the empty
/// document.
pub fn build_store(records: Vec<Revision>, layout: &StoreLayout) -> Result<StoreStats, StoreError> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source: std::io::Error| StoreError::Io { path, source }
    };

    let mut records = records;
    records.sort_by_key(|r| (r.timestamp, r.id));

    let mut stats = StoreStats::default();
    let mut index = StoreIndex::default();

    // Revisions file, tracking byte offsets per entity.
    let mut revisions_out = Vec::new();
    let mut per_entity: BTreeMap<EntityId, Vec<&Revision>> = BTreeMap::new();
    for record in &records {
        let offset = revisions_out.len() as u64;
        index
            .entities
            .entry(record.entity_id.to_string())
            .or_insert_with(|| EntityIndexEntry { snapshot_offset: 0, revision_offsets: vec![] })
            .revision_offsets
            .push(offset);
        let line = serde_json::to_string(record)?;
        revisions_out.extend_from_slice(line.as_bytes());
        revisions_out.push(b'\n');
        stats.revisions += 1;
        stats.operations += record.entity_diff.len() as u64;
        per_entity.entry(record.entity_id).or_default().push(record);
    }

    // Entities file: final reconstructed snapshot per entity, canonical form.
    let mut entities_out = Vec::new();
    for (entity, revisions) in &per_entity {
        let mut doc = Value::Object(Default::default());
        for revision in revisions {
            doc = apply(&doc, &revision.entity_diff).map_err(|source| StoreError::CorruptChain {
                entity: *entity,
                revision_id: revision.id,
                source,
            })?;
        }
        let entry = index
            .entities
            .get_mut(&entity.to_string())
            .expect("every entity has an index entry");
        entry.snapshot_offset = entities_out.len() as u64;
        entities_out.extend_from_slice(canonical_json(&doc).as_bytes());
        entities_out.push(b'\n');
        stats.entities += 1;
    }

    std::fs::write(&layout.revisions_file, &revisions_out)
        .map_err(io_err(&layout.revisions_file))?;
    std::fs::write(&layout.entities_file, &entities_out).map_err(io_err(&layout.entities_file))?;
    let index_json: Value = serde_json::to_value(&index)?;
    let mut index_out = canonical_json(&index_json).into_bytes();
    index_out.push(b'\n');
    std::fs::write(&layout.index_file, &index_out).map_err(io_err(&layout.index_file))?;

    Ok(stats)
}

/// Random-access reader over a built store.
pub struct StoreReader {
    layout: StoreLayout,
    index: StoreIndex,
}

impl StoreReader {
    pub fn open(layout: StoreLayout) -> Result<Self, StoreError> {
        let text = std::fs::read_to_string(&layout.index_file).map_err(|source| StoreError::Io {
            path: layout.index_file.clone(),
            source,
        })?;
        let index: StoreIndex = serde_json::from_str(&text)?;
        Ok(StoreReader { layout, index })
    }

    pub fn entity_ids(&self) -> Vec<EntityId> {
        self.index
            .entities
            .keys()
            .filter_map(|k| k.parse().ok())
            .collect()
    }

    pub fn revision_count(&self, entity: EntityId) -> Result<usize, StoreError> {
        let entry = self.entry(entity)?;
        Ok(entry.revision_offsets.len())
    }

    fn entry(&self, entity: EntityId) -> Result<&EntityIndexEntry, StoreError> {
        self.index
            .entities
            .get(&entity.to_string())
            .ok_or(StoreError::NotFound { entity })
    }

    fn read_line_at(&self, path: &Path, offset: u64) -> Result<String, StoreError> {
        let io = |source: std::io::Error| StoreError::Io { path: path.to_path_buf(), source };
        let mut file = File::open(path).map_err(io)?;
        file.seek(SeekFrom::Start(offset)).map_err(io)?;
        let mut reader = BufReader::new(file);
        let mut line = String::new();
        reader.read_line(&mut line).map_err(io)?;
        Ok(line)
    }

    /// The stored final snapshot of an entity, as raw canonical JSON.
    pub fn final_snapshot(&self, entity: EntityId) -> Result<Value, StoreError> {
        let entry = self.entry(entity)?;
        let line = self.read_line_at(&self.layout.entities_file, entry.snapshot_offset)?;
        Ok(serde_json::from_str(&line)?)
    }

    /// All revision records of an entity, in chronological order.
    pub fn revisions(&self, entity: EntityId) -> Result<Vec<Revision>, StoreError> {
        let entry = self.entry(entity)?;
        let mut out = Vec::with_capacity(entry.revision_offsets.len());
        for &offset in &entry.revision_offsets {
            let line = self.read_line_at(&self.layout.revisions_file, offset)?;
            out.push(serde_json::from_str(&line)?);
        }
        Ok(out)
    }

    /// Every revision record in the store, in global order.
    pub fn all_revisions(&self) -> Result<Vec<Revision>, StoreError> {
        let io = |source: std::io::Error| StoreError::Io {
            path: self.layout.revisions_file.clone(),
            source,
        };
        let mut file = File::open(&self.layout.revisions_file).map_err(io)?;
        let mut text = String::new();
        file.read_to_string(&mut text).map_err(io)?;
        let mut out = Vec::new();
        for line in text.lines() {
            if !line.trim().is_empty() {
                out.push(serde_json::from_str(line)?);
            }
        }
        Ok(out)
    }

    /// Reconstructs an entity's document as of revision `revision_index`
    /// (0-based within the entity's chain).
    pub fn entity_at(
        &self,
        entity: EntityId,
        revision_index: usize,
    ) -> Result<EntityDocument, StoreError> {
        let value = self.entity_json_at(entity, revision_index)?;
        EntityDocument::from_json(&value)
            .map_err(|e| StoreError::Document { entity, reason: e.to_string() })
    }

    /// As [`StoreReader::entity_at`], but returns the raw JSON document.
    pub fn entity_json_at(
        &self,
        entity: EntityId,
        revision_index: usize,
    ) -> Result<Value, StoreError> {
        let revisions = self.revisions(entity)?;
        if revision_index >= revisions.len() {
            return Err(StoreError::RevisionOutOfRange {
                entity,
                index: revision_index,
                count: revisions.len(),
            });
        }
        let mut doc = Value::Object(Default::default());
        for revision in &revisions[..=revision_index] {
            doc = apply(&doc, &revision.entity_diff).map_err(|source| StoreError::CorruptChain {
                entity,
                revision_id: revision.id,
                source,
            })?;
        }
        Ok(doc)
    }
}

/// Convenience wrapper used by the command-line `ingest` stage: builds the
/// store and writes nothing else.
pub fn get_entity_at(
    layout: &StoreLayout,
    entity: EntityId,
    revision_index: usize,
) -> Result<EntityDocument, StoreError> {
    StoreReader::open(layout.clone())?.entity_at(entity, revision_index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use kghist_core::{diff, Timestamp};
    use serde_json::json;

    fn revision(entity: &str, id: u64, parent: Option<u64>, ts: &str, before: &Value, after: &Value) -> Revision {
        Revision {
            id,
            parent_id: parent,
            entity_id: entity.parse().unwrap(),
            timestamp: Timestamp::parse(ts).unwrap(),
            username: "editor".into(),
            comment: None,
            entity_diff: diff(before, after),
        }
    }

    fn sample_records() -> Vec<Revision> {
        let empty = json!({});
        let q1_v1 = json!({"id": "Q1", "labels": {"en": "one"}});
        let q1_v2 = json!({"id": "Q1", "labels": {"en": "one", "fr": "un"}});
        let q1_v3 = json!({"id": "Q1", "labels": {"fr": "un"}});
        let q2_v1 = json!({"id": "Q2", "labels": {"en": "two"}});
        let q2_v2 = json!({"id": "Q2", "labels": {"en": "two!"}});
        let q2_v3 = json!({"id": "Q2"});
        vec![
            revision("Q1", 1, None, "2020-01-01T00:00:00Z", &empty, &q1_v1),
            revision("Q1", 3, Some(1), "2020-01-03T00:00:00Z", &q1_v1, &q1_v2),
            revision("Q1", 5, Some(3), "2020-01-05T00:00:00Z", &q1_v2, &q1_v3),
            revision("Q2", 2, None, "2020-01-02T00:00:00Z", &empty, &q2_v1),
            revision("Q2", 4, Some(2), "2020-01-04T00:00:00Z", &q2_v1, &q2_v2),
            revision("Q2", 6, Some(4), "2020-01-06T00:00:00Z", &q2_v2, &q2_v3),
        ]
    }

    #[test]
    fn build_reports_counts() {
        let dir = tempfile::tempdir().unwrap();
        let layout = StoreLayout::in_dir(dir.path());
        let stats = build_store(sample_records(), &layout).unwrap();
        assert_eq!(stats.entities, 2);
        assert_eq!(stats.revisions, 6);
        let expected_ops: u64 =
            sample_records().iter().map(|r| r.entity_diff.len() as u64).sum();
        assert_eq!(stats.operations, expected_ops);
    }

    #[test]
    fn empty_input_builds_empty_store() {
        let dir = tempfile::tempdir().unwrap();
        let layout = StoreLayout::in_dir(dir.path());
        let stats = build_store(vec![], &layout).unwrap();
        assert_eq!(stats, StoreStats::default());
        assert_eq!(std::fs::read(&layout.entities_file).unwrap(), b"");
    }

    #[test]
    fn snapshots_equal_reconstruction() {
        let dir = tempfile::tempdir().unwrap();
        let layout = StoreLayout::in_dir(dir.path());
        build_store(sample_records(), &layout).unwrap();
        let reader = StoreReader::open(layout).unwrap();
        for entity in reader.entity_ids() {
            let count = reader.revision_count(entity).unwrap();
            let reconstructed = reader.entity_json_at(entity, count - 1).unwrap();
            let snapshot = reader.final_snapshot(entity).unwrap();
            assert_eq!(canonical_json(&reconstructed), canonical_json(&snapshot));
        }
    }

    #[test]
    fn entity_at_first_and_last_revision() {
        let dir = tempfile::tempdir().unwrap();
        let layout = StoreLayout::in_dir(dir.path());
        build_store(sample_records(), &layout).unwrap();
        let reader = StoreReader::open(layout).unwrap();
        let q1: EntityId = "Q1".parse().unwrap();
        let first = reader.entity_json_at(q1, 0).unwrap();
        assert_eq!(first, json!({"id": "Q1", "labels": {"en": "one"}}));
        let last = reader.entity_json_at(q1, 2).unwrap();
        assert_eq!(last, json!({"id": "Q1", "labels": {"fr": "un"}}));
    }

    #[test]
    fn unknown_entity_is_not_found() {
        let dir = tempfile::tempdir().unwrap();
        let layout = StoreLayout::in_dir(dir.path());
        build_store(sample_records(), &layout).unwrap();
        let err = get_entity_at(&layout, "Q999999".parse().unwrap(), 0).unwrap_err();
        assert!(matches!(err, StoreError::NotFound { .. }));
    }

    #[test]
    fn out_of_range_revision_index_errors() {
        let dir = tempfile::tempdir().unwrap();
        let layout = StoreLayout::in_dir(dir.path());
        build_store(sample_records(), &layout).unwrap();
        let reader = StoreReader::open(layout).unwrap();
        let err = reader.entity_json_at("Q1".parse().unwrap(), 3).unwrap_err();
        assert!(matches!(err, StoreError::RevisionOutOfRange { index: 3, count: 3, .. }));
    }

    #[test]
    fn rebuilding_produces_identical_bytes() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let layout_a = StoreLayout::in_dir(dir_a.path());
        let layout_b = StoreLayout::in_dir(dir_b.path());
        build_store(sample_records(), &layout_a).unwrap();
        build_store(sample_records(), &layout_b).unwrap();
        for (a, b) in [
            (&layout_a.entities_file, &layout_b.entities_file),
            (&layout_a.revisions_file, &layout_b.revisions_file),
            (&layout_a.index_file, &layout_b.index_file),
        ] {
            assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
        }
    }
}
