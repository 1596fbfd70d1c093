//! End-to-end consistency of the fixture corpus: XML ingestion, store
//! duality, operation extraction against snapshot extraction, and
//! dynamic-export replay.

use std::io::BufReader;

use kghist_core::canon::canonical_json;
use kghist_core::Triple;
use kghist_pipeline::export::{export_dynamic, export_static, replay_dynamic};
use kghist_pipeline::extract::{document_triples, extract_triple_ops};
use kghist_pipeline::fixture::{generate, FixtureConfig};
use kghist_pipeline::graph::materialize_all;
use kghist_pipeline::ingest::ingest_xml_dump;
use kghist_pipeline::store::{build_store, StoreLayout, StoreReader};

#[test]
fn corpus_round_trips_through_xml_store_and_exports() {
    let corpus = generate(&FixtureConfig::default());
    let xml = corpus.to_xml();

    let outcome = ingest_xml_dump(BufReader::new(xml.as_bytes())).unwrap();
    assert_eq!(outcome.records.len(), corpus.revision_count());
    assert!(outcome.warnings.is_empty(), "{:?}", outcome.warnings);

    // Diff chains reproduce every intermediate snapshot, not just the final one.
    let dir = tempfile::tempdir().unwrap();
    let layout = StoreLayout::in_dir(dir.path());
    let stats = build_store(outcome.records.clone(), &layout).unwrap();
    assert_eq!(stats.entities as usize, corpus.pages.len());
    assert_eq!(stats.revisions as usize, corpus.revision_count());

    let reader = StoreReader::open(layout).unwrap();
    for page in &corpus.pages {
        for (i, revision) in page.revisions.iter().enumerate() {
            let rebuilt = reader.entity_json_at(page.entity, i).unwrap();
            assert_eq!(
                canonical_json(&rebuilt),
                canonical_json(&revision.snapshot),
                "{} revision {i}",
                page.entity
            );
        }
        let snapshot = reader.final_snapshot(page.entity).unwrap();
        let last = &page.revisions.last().unwrap().snapshot;
        assert_eq!(canonical_json(&snapshot), canonical_json(last));
    }

    // The operation stream materializes to exactly the triples of the final
    // snapshots.
    let extracted = extract_triple_ops(&outcome.records).unwrap();
    // Ordinals are a total order consistent with (timestamp, revision id).
    for pair in extracted.ops.windows(2) {
        assert!(pair[0].ordinal < pair[1].ordinal);
        assert!(
            (pair[0].timestamp, pair[0].revision_id) <= (pair[1].timestamp, pair[1].revision_id)
        );
        assert!(pair[0].chronological_key() < pair[1].chronological_key());
    }
    let materialized = materialize_all(&extracted.ops);
    assert!(materialized.warnings.is_empty(), "{:?}", materialized.warnings);
    let mut from_snapshots: Vec<Triple> = corpus
        .pages
        .iter()
        .flat_map(|p| document_triples(&p.revisions.last().unwrap().snapshot))
        .collect();
    from_snapshots.sort();
    from_snapshots.dedup();
    let from_stream: Vec<Triple> = materialized.state.triples.iter().cloned().collect();
    assert_eq!(from_stream, from_snapshots);

    // Dynamic replay rebuilds the static export byte for byte.
    let static_path = dir.path().join("static.nt");
    let dynamic_path = dir.path().join("dynamic.nt");
    let replayed_path = dir.path().join("replayed.nt");
    export_static(&materialized.state, &static_path).unwrap();
    export_dynamic(&extracted.ops, &outcome.records, &dynamic_path).unwrap();
    let replayed = replay_dynamic(&std::fs::read_to_string(&dynamic_path).unwrap()).unwrap();
    let replayed_state = materialize_all(&replayed);
    export_static(&replayed_state.state, &replayed_path).unwrap();
    assert_eq!(
        std::fs::read(&static_path).unwrap(),
        std::fs::read(&replayed_path).unwrap(),
        "dynamic replay must reproduce the static export"
    );
}

#[test]
fn xml_and_jsonl_ingestion_agree() {
    let corpus = generate(&FixtureConfig { instance_count: 8, ..FixtureConfig::default() });
    let from_xml = ingest_xml_dump(BufReader::new(corpus.to_xml().as_bytes())).unwrap();
    let jsonl = corpus.to_jsonl();
    let from_jsonl =
        kghist_pipeline::ingest::ingest_jsonl(BufReader::new(jsonl.as_bytes())).unwrap();
    let mut xml_records = from_xml.records;
    xml_records.sort_by_key(|r| (r.timestamp, r.id));
    assert_eq!(xml_records, from_jsonl.records);
}

#[test]
fn reingestion_is_idempotent() {
    let corpus = generate(&FixtureConfig { instance_count: 6, ..FixtureConfig::default() });
    let xml = corpus.to_xml();
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        let outcome = ingest_xml_dump(BufReader::new(xml.as_bytes())).unwrap();
        build_store(outcome.records, &StoreLayout::in_dir(dir.path())).unwrap();
    }
    for name in ["entities.jsonl", "revisions.jsonl", "index.json"] {
        assert_eq!(
            std::fs::read(dir_a.path().join(name)).unwrap(),
            std::fs::read(dir_b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}
