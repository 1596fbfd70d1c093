//! Triple-level operation extraction from revision diffs.
//!
//! Every statement carries the triple formed by its mainsnak; qualifiers,
//! references, ranks, and statement order are decoration and never influence
//! the triple. A revision's operations are the set difference between the
//! statement triples before and after its diff: removals first, then
//! additions, each side sorted. A value replacement therefore appears as the
//! removal of the old triple followed by the addition of the new one, and
//! edits that only touch decoration or the fingerprint produce nothing.
//!
//! Comparing whole-document states (rather than interpreting patch paths one
//! by one) keeps the stream correct under index-shifting array diffs, where
//! removing a statement from the middle of a group rewrites its successors
//! in place.
//!
//! Ordinals are assigned globally: revisions are processed in
//! `(timestamp, revision id)` order across all entities, and every extracted
//! operation gets the next ordinal.

use std::collections::{BTreeSet, HashMap};

use serde_json::Value;
use thiserror::Error;

use kghist_core::{
    apply, parse_entity_id, EntityId, Object, OpKind, Revision, Triple, TripleOperation,
};

use crate::Warning;

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("revision {revision_id}: diff is not interpretable against the reconstructed prior state: {source}")]
    Apply {
        revision_id: u64,
        #[source]
        source: kghist_core::PatchError,
    },
}

/// Extraction output: the global ordinal-sorted operation stream.
#[derive(Debug, Default)]
pub struct ExtractedOps {
    pub ops: Vec<TripleOperation>,
    pub warnings: Vec<Warning>,
}

/// Extracts the triple operation stream from a set of revision records.
///
/// Records may arrive in any order; they are processed in global
/// `(timestamp, revision id)` order and each entity's state is rebuilt from
/// the empty document as its diffs are replayed.
pub fn extract_triple_ops(revisions: &[Revision]) -> Result<ExtractedOps, ExtractError> {
    let mut sorted: Vec<&Revision> = revisions.iter().collect();
    sorted.sort_by_key(|r| (r.timestamp, r.id));

    let mut docs: HashMap<EntityId, (Value, BTreeSet<Triple>)> = HashMap::new();
    let mut out = ExtractedOps::default();
    let mut ordinal = 0u64;

    for revision in sorted {
        let (doc, triples) = docs
            .entry(revision.entity_id)
            .or_insert_with(|| (Value::Object(Default::default()), BTreeSet::new()));
        *doc = apply(doc, &revision.entity_diff)
            .map_err(|source| ExtractError::Apply { revision_id: revision.id, source })?;
        let next: BTreeSet<Triple> = entity_triples(revision.entity_id, doc).into_iter().collect();

        for triple in triples.difference(&next) {
            out.ops.push(TripleOperation {
                kind: OpKind::Removal,
                triple: triple.clone(),
                revision_id: revision.id,
                timestamp: revision.timestamp,
                ordinal,
            });
            ordinal += 1;
        }
        for triple in next.difference(triples) {
            out.ops.push(TripleOperation {
                kind: OpKind::Addition,
                triple: triple.clone(),
                revision_id: revision.id,
                timestamp: revision.timestamp,
                ordinal,
            });
            ordinal += 1;
        }
        *triples = next;
    }
    Ok(out)
}

/// The triple carried by a statement JSON, if any.
///
/// Value snaks map to entity or literal objects, somevalue snaks mint a
/// blank node whose label is a deterministic function of the subject,
/// property, and statement id, and novalue snaks carry nothing. Half-edited
/// statements (a value snak whose datavalue is missing) are tolerated and
/// carry nothing.
pub fn statement_triple(entity: EntityId, statement: &Value) -> Option<Triple> {
    let obj = statement.as_object()?;
    let mainsnak = obj.get("mainsnak")?.as_object()?;
    let property = parse_entity_id(mainsnak.get("property")?.as_str()?).ok()?;
    if !property.is_property() {
        return None;
    }
    let snaktype = mainsnak.get("snaktype").and_then(Value::as_str).unwrap_or("value");
    let object = match snaktype {
        "novalue" => return None,
        "somevalue" => {
            let stmt_id = obj.get("id").and_then(Value::as_str).unwrap_or("sv");
            Object::Blank(blank_label(entity, property, stmt_id))
        }
        _ => {
            let datavalue = mainsnak.get("datavalue")?.as_object()?;
            let ty = datavalue.get("type")?.as_str()?;
            let text = datavalue.get("value")?.as_str()?;
            match ty {
                "wikibase-entityid" => Object::Entity(parse_entity_id(text).ok()?),
                "string" => Object::Literal {
                    lexical: text.to_owned(),
                    kind: kghist_core::LiteralKind::String,
                },
                "quantity" => Object::Literal {
                    lexical: text.to_owned(),
                    kind: kghist_core::LiteralKind::Quantity,
                },
                "time" => Object::Literal {
                    lexical: text.to_owned(),
                    kind: kghist_core::LiteralKind::Time,
                },
                "globecoordinate" => Object::Literal {
                    lexical: text.to_owned(),
                    kind: kghist_core::LiteralKind::Coordinate,
                },
                _ => return None,
            }
        }
    };
    Some(Triple::new(entity, property, object))
}

/// Deterministic blank-node label for an unknown-value snak.
fn blank_label(entity: EntityId, property: EntityId, statement_id: &str) -> String {
    let sanitized: String =
        statement_id.chars().filter(|c| c.is_ascii_alphanumeric()).collect();
    format!("sv_{entity}_{property}_{sanitized}")
}

fn entity_triples(entity: EntityId, doc: &Value) -> Vec<Triple> {
    let Some(claims) = doc.get("claims").and_then(Value::as_object) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for group in claims.values() {
        let Some(items) = group.as_array() else { continue };
        out.extend(items.iter().filter_map(|s| statement_triple(entity, s)));
    }
    out
}

/// Extracts the statement triples of a full entity document.
///
/// This is the snapshot-side view of the same rules the stream extractor
/// applies revision by revision.
pub fn document_triples(doc: &Value) -> Vec<Triple> {
    let Some(id) = doc
        .as_object()
        .and_then(|obj| obj.get("id"))
        .and_then(Value::as_str)
        .and_then(|t| parse_entity_id(t).ok())
    else {
        return Vec::new();
    };
    entity_triples(id, doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use kghist_core::{diff, PatchOperation, Timestamp};
    use serde_json::json;

    fn entity_value_statement(stmt_id: &str, prop: &str, target: &str) -> Value {
        json!({
            "id": stmt_id,
            "mainsnak": {"snaktype": "value", "property": prop,
                         "datavalue": {"type": "wikibase-entityid", "value": target}},
            "rank": "normal"
        })
    }

    fn revision_from_docs(id: u64, ts: &str, before: &Value, after: &Value) -> Revision {
        Revision {
            id,
            parent_id: if id == 1 { None } else { Some(id - 1) },
            entity_id: "Q1".parse().unwrap(),
            timestamp: Timestamp::parse(ts).unwrap(),
            username: "e".into(),
            comment: None,
            entity_diff: diff(before, after),
        }
    }

    fn triple(s: &str, p: &str, o: &str) -> Triple {
        Triple::new(
            s.parse().unwrap(),
            p.parse().unwrap(),
            Object::Entity(o.parse().unwrap()),
        )
    }

    #[test]
    fn adding_a_statement_yields_one_addition() {
        let before = json!({"id": "Q1"});
        let after = json!({"id": "Q1", "claims": {"P31": [entity_value_statement("s1", "P31", "Q5")]}});
        let revs = vec![
            revision_from_docs(1, "2020-01-01T00:00:00Z", &json!({}), &before),
            revision_from_docs(2, "2020-01-02T00:00:00Z", &before, &after),
        ];
        let extracted = extract_triple_ops(&revs).unwrap();
        assert_eq!(extracted.ops.len(), 1);
        assert_eq!(extracted.ops[0].kind, OpKind::Addition);
        assert_eq!(extracted.ops[0].triple, triple("Q1", "P31", "Q5"));
        assert_eq!(extracted.ops[0].ordinal, 0);
    }

    #[test]
    fn replacing_a_value_yields_removal_then_addition() {
        let v1 = json!({"id": "Q1", "claims": {"P31": [entity_value_statement("s1", "P31", "Q5")]}});
        let v2 = json!({"id": "Q1", "claims": {"P31": [entity_value_statement("s1", "P31", "Q6")]}});
        let revs = vec![
            revision_from_docs(1, "2020-01-01T00:00:00Z", &json!({}), &v1),
            revision_from_docs(2, "2020-01-02T00:00:00Z", &v1, &v2),
        ];
        let extracted = extract_triple_ops(&revs).unwrap();
        let kinds: Vec<OpKind> = extracted.ops.iter().map(|o| o.kind).collect();
        assert_eq!(kinds, vec![OpKind::Addition, OpKind::Removal, OpKind::Addition]);
        assert_eq!(extracted.ops[1].triple, triple("Q1", "P31", "Q5"));
        assert_eq!(extracted.ops[2].triple, triple("Q1", "P31", "Q6"));
        assert_eq!(
            extracted.ops.iter().map(|o| o.ordinal).collect::<Vec<_>>(),
            vec![0, 1, 2]
        );
    }

    #[test]
    fn reference_only_edit_yields_nothing() {
        let simple = json!({"id": "Q1", "claims": {"P31": [entity_value_statement("s1", "P31", "Q5")]}});
        let mut referenced = simple.clone();
        referenced["claims"]["P31"][0]["references"] = json!([[{
            "snaktype": "value", "property": "P854",
            "datavalue": {"type": "string", "value": "https://example.org"}
        }]]);
        let revs = vec![
            revision_from_docs(1, "2020-01-01T00:00:00Z", &json!({}), &simple),
            revision_from_docs(2, "2020-01-02T00:00:00Z", &simple, &referenced),
        ];
        let extracted = extract_triple_ops(&revs).unwrap();
        // Only the creation addition; the reference edit is invisible.
        assert_eq!(extracted.ops.len(), 1);
        assert_eq!(extracted.ops[0].kind, OpKind::Addition);
    }

    #[test]
    fn qualifier_only_edit_yields_nothing() {
        let simple = json!({"id": "Q1", "claims": {"P39": [entity_value_statement("s1", "P39", "Q11696")]}});
        let mut qualified = simple.clone();
        qualified["claims"]["P39"][0]["qualifiers"] = json!([{
            "snaktype": "value", "property": "P580",
            "datavalue": {"type": "time", "value": "+2017-01-20T00:00:00Z"}
        }]);
        let revs = vec![
            revision_from_docs(1, "2020-01-01T00:00:00Z", &json!({}), &simple),
            revision_from_docs(2, "2020-01-02T00:00:00Z", &simple, &qualified),
        ];
        let extracted = extract_triple_ops(&revs).unwrap();
        assert_eq!(extracted.ops.len(), 1);
    }

    #[test]
    fn removing_a_middle_statement_removes_only_its_triple() {
        // Index-wise diffing rewrites the survivor in place; extraction must
        // still see exactly one removal.
        let both = json!({"id": "Q1", "claims": {"P735": [
            entity_value_statement("s1", "P735", "Q200"),
            entity_value_statement("s2", "P735", "Q201"),
        ]}});
        let second_only = json!({"id": "Q1", "claims": {"P735": [
            entity_value_statement("s2", "P735", "Q201"),
        ]}});
        let revs = vec![
            revision_from_docs(1, "2020-01-01T00:00:00Z", &json!({}), &both),
            revision_from_docs(2, "2020-01-02T00:00:00Z", &both, &second_only),
        ];
        let extracted = extract_triple_ops(&revs).unwrap();
        let last_ops: Vec<&TripleOperation> =
            extracted.ops.iter().filter(|o| o.revision_id == 2).collect();
        assert_eq!(last_ops.len(), 1);
        assert_eq!(last_ops[0].kind, OpKind::Removal);
        assert_eq!(last_ops[0].triple, triple("Q1", "P735", "Q200"));
    }

    #[test]
    fn somevalue_statements_mint_stable_blank_nodes() {
        let stmt = json!({
            "id": "Q1$b1",
            "mainsnak": {"snaktype": "somevalue", "property": "P570"}
        });
        let doc = json!({"id": "Q1", "claims": {"P570": [stmt]}});
        let revs = vec![
            revision_from_docs(1, "2020-01-01T00:00:00Z", &json!({}), &doc),
            revision_from_docs(2, "2020-01-02T00:00:00Z", &doc, &json!({"id": "Q1", "claims": {}})),
        ];
        let extracted = extract_triple_ops(&revs).unwrap();
        assert_eq!(extracted.ops.len(), 2);
        assert_eq!(extracted.ops[0].kind, OpKind::Addition);
        assert_eq!(extracted.ops[1].kind, OpKind::Removal);
        // Addition and removal refer to the same blank node.
        assert_eq!(extracted.ops[0].triple, extracted.ops[1].triple);
        assert!(matches!(extracted.ops[0].triple.object, Object::Blank(_)));
    }

    #[test]
    fn novalue_statements_carry_no_triples() {
        let stmt = json!({
            "id": "Q1$n1",
            "mainsnak": {"snaktype": "novalue", "property": "P40"}
        });
        let doc = json!({"id": "Q1", "claims": {"P40": [stmt]}});
        let revs = vec![revision_from_docs(1, "2020-01-01T00:00:00Z", &json!({}), &doc)];
        assert!(extract_triple_ops(&revs).unwrap().ops.is_empty());
    }

    #[test]
    fn rank_change_yields_nothing() {
        let v1 = json!({"id": "Q1", "claims": {"P31": [entity_value_statement("s1", "P31", "Q5")]}});
        let mut v2 = v1.clone();
        v2["claims"]["P31"][0]["rank"] = json!("preferred");
        let revs = vec![
            revision_from_docs(1, "2020-01-01T00:00:00Z", &json!({}), &v1),
            revision_from_docs(2, "2020-01-02T00:00:00Z", &v1, &v2),
        ];
        let extracted = extract_triple_ops(&revs).unwrap();
        assert_eq!(extracted.ops.len(), 1);
    }

    #[test]
    fn bad_diff_names_the_revision() {
        let rev = Revision {
            id: 77,
            parent_id: None,
            entity_id: "Q1".parse().unwrap(),
            timestamp: Timestamp::parse("2020-01-01T00:00:00Z").unwrap(),
            username: "e".into(),
            comment: None,
            entity_diff: vec![PatchOperation::Remove { path: "/claims/P31/4".into() }],
        };
        let err = extract_triple_ops(&[rev]).unwrap_err();
        let ExtractError::Apply { revision_id, .. } = err;
        assert_eq!(revision_id, 77);
    }

    #[test]
    fn ordinals_are_global_across_entities() {
        let q1 = json!({"id": "Q1", "claims": {"P31": [entity_value_statement("a", "P31", "Q5")]}});
        let q2 = json!({"id": "Q2", "claims": {"P31": [entity_value_statement("b", "P31", "Q5")]}});
        let r1 = revision_from_docs(1, "2020-01-01T00:00:00Z", &json!({}), &q1);
        let mut r2 = revision_from_docs(2, "2020-01-02T00:00:00Z", &json!({}), &q2);
        r2.entity_id = "Q2".parse().unwrap();
        r2.parent_id = None;
        let extracted = extract_triple_ops(&[r2.clone(), r1.clone()]).unwrap();
        // Processed chronologically even though passed out of order.
        assert_eq!(extracted.ops[0].triple.subject, "Q1".parse().unwrap());
        assert_eq!(extracted.ops[0].ordinal, 0);
        assert_eq!(extracted.ops[1].triple.subject, "Q2".parse().unwrap());
        assert_eq!(extracted.ops[1].ordinal, 1);
    }

    #[test]
    fn document_triples_match_stream_extraction() {
        let final_doc = json!({
            "id": "Q1",
            "labels": {"en": "x"},
            "claims": {
                "P31": [entity_value_statement("s1", "P31", "Q5")],
                "P21": [entity_value_statement("s2", "P21", "Q6581097")]
            }
        });
        let revs = vec![revision_from_docs(1, "2020-01-01T00:00:00Z", &json!({}), &final_doc)];
        let extracted = extract_triple_ops(&revs).unwrap();
        let mut from_stream: Vec<Triple> =
            extracted.ops.iter().map(|o| o.triple.clone()).collect();
        from_stream.sort();
        let mut from_doc = document_triples(&final_doc);
        from_doc.sort();
        assert_eq!(from_stream, from_doc);
    }
}
