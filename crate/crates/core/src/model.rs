//! Entities, snaks, statements, revisions, triples, and triple-level
//! operations.
//!
//! All types are immutable value objects and can be shared freely across
//! threads. Entity documents use ordered maps so that serialization is
//! deterministic.

use std::collections::BTreeMap;
use std::fmt;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;
use thiserror::Error;

use crate::timestamp::Timestamp;

/// Whether an entity is an item (`Q...`) or a property (`P...`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntityKind {
    Item,
    Property,
}

/// A structured entity identifier such as `Q42` or `P31`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId {
    pub kind: EntityKind,
    pub number: u64,
}

impl EntityId {
    pub fn item(number: u64) -> Self {
        EntityId { kind: EntityKind::Item, number }
    }

    pub fn property(number: u64) -> Self {
        EntityId { kind: EntityKind::Property, number }
    }

    pub fn is_property(&self) -> bool {
        self.kind == EntityKind::Property
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.kind {
            EntityKind::Item => 'Q',
            EntityKind::Property => 'P',
        };
        write!(f, "{prefix}{}", self.number)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid entity id {text:?}: expected `Q<n>` or `P<n>` with n >= 1")]
pub struct EntityIdParseError {
    pub text: String,
}

/// Parses the canonical text form of an entity id.
pub fn parse_entity_id(text: &str) -> Result<EntityId, EntityIdParseError> {
    let err = || EntityIdParseError { text: text.to_owned() };
    let mut chars = text.chars();
    let kind = match chars.next() {
        Some('Q') => EntityKind::Item,
        Some('P') => EntityKind::Property,
        _ => return Err(err()),
    };
    let rest = chars.as_str();
    if rest.is_empty() || rest.starts_with('0') || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err());
    }
    let number = rest.parse::<u64>().map_err(|_| err())?;
    if number == 0 {
        return Err(err());
    }
    Ok(EntityId { kind, number })
}

impl std::str::FromStr for EntityId {
    type Err = EntityIdParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_entity_id(s)
    }
}

impl Serialize for EntityId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EntityId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_entity_id(&text).map_err(de::Error::custom)
    }
}

/// The payload of a value snak.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DataValue {
    EntityId(EntityId),
    String(String),
    Quantity(String),
    Time(String),
    Coordinate(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SnakKind {
    Value,
    SomeValue,
    NoValue,
}

/// A property with either a known value, an unknown value, or no value.
///
/// `datavalue` is present exactly when `kind` is [`SnakKind::Value`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snak {
    pub kind: SnakKind,
    pub property: EntityId,
    pub datavalue: Option<DataValue>,
}

impl Snak {
    pub fn value(property: EntityId, datavalue: DataValue) -> Self {
        Snak { kind: SnakKind::Value, property, datavalue: Some(datavalue) }
    }

    pub fn some_value(property: EntityId) -> Self {
        Snak { kind: SnakKind::SomeValue, property, datavalue: None }
    }

    pub fn no_value(property: EntityId) -> Self {
        Snak { kind: SnakKind::NoValue, property, datavalue: None }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rank {
    Preferred,
    #[default]
    Normal,
    Deprecated,
}

/// One property-value claim of an entity, optionally qualified and referenced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Statement {
    pub mainsnak: Snak,
    pub rank: Rank,
    pub qualifiers: Vec<Snak>,
    pub references: Vec<Vec<Snak>>,
    pub statement_id: String,
}

impl Statement {
    /// True when the statement is just a property and a value, with no
    /// qualifiers and no references.
    pub fn is_simple(&self) -> bool {
        self.qualifiers.is_empty() && self.references.is_empty()
    }
}

/// Convenience wrapper for [`Statement::is_simple`].
pub fn is_simple_statement(statement: &Statement) -> bool {
    statement.is_simple()
}

/// The full content of an entity at one point of its history.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct EntityDocument {
    pub id: Option<EntityId>,
    pub labels: BTreeMap<String, String>,
    pub descriptions: BTreeMap<String, String>,
    pub aliases: BTreeMap<String, Vec<String>>,
    pub claims: BTreeMap<EntityId, Vec<Statement>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid entity document: {reason}")]
pub struct DocumentError {
    pub reason: String,
}

impl DocumentError {
    fn new(reason: impl Into<String>) -> Self {
        DocumentError { reason: reason.into() }
    }
}

impl EntityDocument {
    /// Parses the JSON shape stored in dumps and in the entity store.
    ///
    /// The expected layout is
    /// `{"id": "Q1", "labels": {lang: text}, "descriptions": {lang: text},
    /// "aliases": {lang: [text]}, "claims": {"P31": [statement, ...]}}`,
    /// where every key is optional.
    pub fn from_json(value: &Value) -> Result<Self, DocumentError> {
        let obj = value
            .as_object()
            .ok_or_else(|| DocumentError::new("document is not a JSON object"))?;
        let mut doc = EntityDocument::default();
        if let Some(id) = obj.get("id") {
            let text = id
                .as_str()
                .ok_or_else(|| DocumentError::new("`id` is not a string"))?;
            doc.id = Some(parse_entity_id(text).map_err(|e| DocumentError::new(e.to_string()))?);
        }
        if let Some(labels) = obj.get("labels") {
            doc.labels = parse_lang_map(labels, "labels")?;
        }
        if let Some(descriptions) = obj.get("descriptions") {
            doc.descriptions = parse_lang_map(descriptions, "descriptions")?;
        }
        if let Some(aliases) = obj.get("aliases") {
            let map = aliases
                .as_object()
                .ok_or_else(|| DocumentError::new("`aliases` is not an object"))?;
            for (lang, list) in map {
                let list = list
                    .as_array()
                    .ok_or_else(|| DocumentError::new(format!("aliases for {lang:?} are not an array")))?;
                let mut values = Vec::with_capacity(list.len());
                for item in list {
                    values.push(
                        item.as_str()
                            .ok_or_else(|| DocumentError::new("alias is not a string"))?
                            .to_owned(),
                    );
                }
                doc.aliases.insert(lang.clone(), values);
            }
        }
        if let Some(claims) = obj.get("claims") {
            let map = claims
                .as_object()
                .ok_or_else(|| DocumentError::new("`claims` is not an object"))?;
            for (prop, group) in map {
                let property =
                    parse_entity_id(prop).map_err(|e| DocumentError::new(e.to_string()))?;
                if !property.is_property() {
                    return Err(DocumentError::new(format!("claims key {prop:?} is not a property id")));
                }
                let group = group
                    .as_array()
                    .ok_or_else(|| DocumentError::new(format!("claims for {prop} are not an array")))?;
                let mut statements = Vec::with_capacity(group.len());
                for stmt in group {
                    let statement = parse_statement(stmt)?;
                    if statement.mainsnak.property != property {
                        return Err(DocumentError::new(format!(
                            "statement under {prop} has mainsnak property {}",
                            statement.mainsnak.property
                        )));
                    }
                    statements.push(statement);
                }
                doc.claims.insert(property, statements);
            }
        }
        Ok(doc)
    }
}

fn parse_lang_map(value: &Value, field: &str) -> Result<BTreeMap<String, String>, DocumentError> {
    let map = value
        .as_object()
        .ok_or_else(|| DocumentError::new(format!("`{field}` is not an object")))?;
    let mut out = BTreeMap::new();
    for (lang, text) in map {
        let text = text
            .as_str()
            .ok_or_else(|| DocumentError::new(format!("{field} entry for {lang:?} is not a string")))?;
        out.insert(lang.clone(), text.to_owned());
    }
    Ok(out)
}

fn parse_statement(value: &Value) -> Result<Statement, DocumentError> {
    let obj = value
        .as_object()
        .ok_or_else(|| DocumentError::new("statement is not an object"))?;
    let mainsnak = obj
        .get("mainsnak")
        .ok_or_else(|| DocumentError::new("statement has no mainsnak"))?;
    let mainsnak = parse_snak(mainsnak)?;
    let rank = match obj.get("rank").and_then(Value::as_str) {
        None => Rank::Normal,
        Some("normal") => Rank::Normal,
        Some("preferred") => Rank::Preferred,
        Some("deprecated") => Rank::Deprecated,
        Some(other) => return Err(DocumentError::new(format!("unknown rank {other:?}"))),
    };
    let mut qualifiers = Vec::new();
    if let Some(list) = obj.get("qualifiers") {
        let list = list
            .as_array()
            .ok_or_else(|| DocumentError::new("`qualifiers` is not an array"))?;
        for snak in list {
            qualifiers.push(parse_snak(snak)?);
        }
    }
    let mut references = Vec::new();
    if let Some(list) = obj.get("references") {
        let list = list
            .as_array()
            .ok_or_else(|| DocumentError::new("`references` is not an array"))?;
        for reference in list {
            let snaks = reference
                .as_array()
                .ok_or_else(|| DocumentError::new("reference is not an array of snaks"))?;
            references.push(snaks.iter().map(parse_snak).collect::<Result<Vec<_>, _>>()?);
        }
    }
    let statement_id = obj
        .get("id")
        .and_then(Value::as_str)
        .unwrap_or_default()
        .to_owned();
    Ok(Statement { mainsnak, rank, qualifiers, references, statement_id })
}

fn parse_snak(value: &Value) -> Result<Snak, DocumentError> {
    let obj = value
        .as_object()
        .ok_or_else(|| DocumentError::new("snak is not an object"))?;
    let property = obj
        .get("property")
        .and_then(Value::as_str)
        .ok_or_else(|| DocumentError::new("snak has no property"))?;
    let property = parse_entity_id(property).map_err(|e| DocumentError::new(e.to_string()))?;
    let kind = match obj.get("snaktype").and_then(Value::as_str) {
        Some("value") | None => SnakKind::Value,
        Some("somevalue") => SnakKind::SomeValue,
        Some("novalue") => SnakKind::NoValue,
        Some(other) => return Err(DocumentError::new(format!("unknown snaktype {other:?}"))),
    };
    let datavalue = match kind {
        SnakKind::Value => {
            let dv = obj
                .get("datavalue")
                .ok_or_else(|| DocumentError::new("value snak has no datavalue"))?;
            Some(parse_datavalue(dv)?)
        }
        SnakKind::SomeValue | SnakKind::NoValue => {
            if obj.get("datavalue").is_some() {
                return Err(DocumentError::new("somevalue/novalue snak carries a datavalue"));
            }
            None
        }
    };
    Ok(Snak { kind, property, datavalue })
}

fn parse_datavalue(value: &Value) -> Result<DataValue, DocumentError> {
    let obj = value
        .as_object()
        .ok_or_else(|| DocumentError::new("datavalue is not an object"))?;
    let ty = obj
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| DocumentError::new("datavalue has no type"))?;
    let text = obj
        .get("value")
        .and_then(Value::as_str)
        .ok_or_else(|| DocumentError::new("datavalue has no string value"))?;
    match ty {
        "wikibase-entityid" => Ok(DataValue::EntityId(
            parse_entity_id(text).map_err(|e| DocumentError::new(e.to_string()))?,
        )),
        "string" => Ok(DataValue::String(text.to_owned())),
        "quantity" => Ok(DataValue::Quantity(text.to_owned())),
        "time" => Ok(DataValue::Time(text.to_owned())),
        "globecoordinate" => Ok(DataValue::Coordinate(text.to_owned())),
        other => Err(DocumentError::new(format!("unsupported datavalue type {other:?}"))),
    }
}

/// One RFC 6902 operation; only `add`, `remove`, and `replace` exist here.
///
/// `copy`, `move`, and `test` are rejected on input. The wire form uses the
/// RFC's lowercase `"op"`, `"path"`, `"value"` keys, in that order.
#[derive(Clone, Debug, PartialEq)]
pub enum PatchOperation {
    Add { path: String, value: Value },
    Remove { path: String },
    Replace { path: String, value: Value },
}

impl PatchOperation {
    pub fn path(&self) -> &str {
        match self {
            PatchOperation::Add { path, .. }
            | PatchOperation::Remove { path }
            | PatchOperation::Replace { path, .. } => path,
        }
    }
}

// Serialization goes through a plain wire struct rather than an internally
// tagged enum: serde's tag buffering would re-parse JSON numbers and lose
// their exact decimal lexical forms.
#[derive(Serialize, Deserialize)]
struct PatchOperationWire {
    op: String,
    path: String,
    // `null` is a legal patch value and must stay distinct from "no value".
    #[serde(default, deserialize_with = "present_value", skip_serializing_if = "Option::is_none")]
    value: Option<Value>,
}

fn present_value<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Option<Value>, D::Error> {
    Value::deserialize(deserializer).map(Some)
}

impl Serialize for PatchOperation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let wire = match self {
            PatchOperation::Add { path, value } => PatchOperationWire {
                op: "add".into(),
                path: path.clone(),
                value: Some(value.clone()),
            },
            PatchOperation::Remove { path } => {
                PatchOperationWire { op: "remove".into(), path: path.clone(), value: None }
            }
            PatchOperation::Replace { path, value } => PatchOperationWire {
                op: "replace".into(),
                path: path.clone(),
                value: Some(value.clone()),
            },
        };
        wire.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PatchOperation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = PatchOperationWire::deserialize(deserializer)?;
        match (wire.op.as_str(), wire.value) {
            ("add", Some(value)) => Ok(PatchOperation::Add { path: wire.path, value }),
            ("replace", Some(value)) => Ok(PatchOperation::Replace { path: wire.path, value }),
            ("remove", None) => Ok(PatchOperation::Remove { path: wire.path }),
            ("add" | "replace", None) => {
                Err(de::Error::custom(format!("`{}` operation requires a value", wire.op)))
            }
            ("remove", Some(_)) => Err(de::Error::custom("`remove` operation takes no value")),
            (other, _) => Err(de::Error::custom(format!("unsupported patch op {other:?}"))),
        }
    }
}

/// One edit made to one entity: metadata plus the diff against the previous
/// revision of that entity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Revision {
    pub id: u64,
    #[serde(default)]
    pub parent_id: Option<u64>,
    pub entity_id: EntityId,
    pub timestamp: Timestamp,
    pub username: String,
    #[serde(default)]
    pub comment: Option<String>,
    pub entity_diff: Vec<PatchOperation>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChainError {
    #[error("first revision {id} of {entity} has a parent id")]
    UnexpectedParent { entity: EntityId, id: u64 },
    #[error("revision {id} of {entity} has no parent id but is not the first revision")]
    MissingParent { entity: EntityId, id: u64 },
    #[error("revision {id} of {entity} declares parent {declared} but follows revision {actual}")]
    BrokenLink { entity: EntityId, id: u64, declared: u64, actual: u64 },
    #[error("revision {id} of {entity} is timestamped before its predecessor")]
    NonMonotoneTimestamp { entity: EntityId, id: u64 },
    #[error("revision {id} belongs to {found} but the chain is for {entity}")]
    MixedEntities { entity: EntityId, id: u64, found: EntityId },
}

/// Checks that a revision sequence forms a well-linked, chronologically
/// ordered chain for a single entity.
pub fn validate_revision_chain(revisions: &[Revision]) -> Result<(), ChainError> {
    let Some(first) = revisions.first() else {
        return Ok(());
    };
    let entity = first.entity_id;
    if first.parent_id.is_some() {
        return Err(ChainError::UnexpectedParent { entity, id: first.id });
    }
    for window in revisions.windows(2) {
        let (prev, cur) = (&window[0], &window[1]);
        if cur.entity_id != entity {
            return Err(ChainError::MixedEntities { entity, id: cur.id, found: cur.entity_id });
        }
        match cur.parent_id {
            None => return Err(ChainError::MissingParent { entity, id: cur.id }),
            Some(declared) if declared != prev.id => {
                return Err(ChainError::BrokenLink { entity, id: cur.id, declared, actual: prev.id })
            }
            Some(_) => {}
        }
        if cur.timestamp < prev.timestamp {
            return Err(ChainError::NonMonotoneTimestamp { entity, id: cur.id });
        }
    }
    Ok(())
}

/// What a triple points at: another entity, a literal, or a blank node.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Object {
    Entity(EntityId),
    Literal { lexical: String, kind: LiteralKind },
    Blank(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LiteralKind {
    String,
    Quantity,
    Time,
    Coordinate,
}

impl fmt::Display for Object {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Object::Entity(id) => write!(f, "{id}"),
            Object::Literal { lexical, .. } => write!(f, "{lexical:?}"),
            Object::Blank(label) => write!(f, "_:{label}"),
        }
    }
}

/// A subject-predicate-object triple over the entity vocabulary.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub subject: EntityId,
    pub predicate: EntityId,
    pub object: Object,
}

impl Triple {
    pub fn new(subject: EntityId, predicate: EntityId, object: Object) -> Self {
        Triple { subject, predicate, object }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {} {})", self.subject, self.predicate, self.object)
    }
}

/// Whether an operation adds a triple to the graph or removes one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Addition,
    Removal,
}

/// A timestamped triple addition or removal derived from a revision diff.
///
/// Ordinals give the global application order; they follow the
/// `(timestamp, revision id)` order of the revisions operations came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleOperation {
    pub kind: OpKind,
    pub triple: Triple,
    pub revision_id: u64,
    pub timestamp: Timestamp,
    pub ordinal: u64,
}

impl TripleOperation {
    /// Sort key consistent with the global ordinal order.
    pub fn chronological_key(&self) -> (Timestamp, u64, u64) {
        (self.timestamp, self.revision_id, self.ordinal)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn parses_items_and_properties() {
        assert_eq!(parse_entity_id("Q42").unwrap(), EntityId::item(42));
        assert_eq!(parse_entity_id("P31").unwrap(), EntityId::property(31));
    }

    #[test]
    fn rejects_bad_ids() {
        for text in ["X42", "Q", "P", "Q0", "Q-1", "Q1.5", "q42", "Q042", ""] {
            let err = parse_entity_id(text).unwrap_err();
            assert!(err.to_string().contains(text), "error should name {text:?}");
        }
    }

    #[test]
    fn id_round_trips_through_display() {
        for text in ["Q1", "Q42", "P31", "P6"] {
            assert_eq!(parse_entity_id(text).unwrap().to_string(), text);
        }
    }

    #[test]
    fn simple_statement_requires_no_qualifiers_or_references() {
        let snak = Snak::value(EntityId::property(31), DataValue::EntityId(EntityId::item(5)));
        let mut stmt = Statement {
            mainsnak: snak.clone(),
            rank: Rank::Normal,
            qualifiers: vec![],
            references: vec![],
            statement_id: "s1".into(),
        };
        assert!(is_simple_statement(&stmt));
        stmt.qualifiers.push(Snak::some_value(EntityId::property(585)));
        assert!(!is_simple_statement(&stmt));
        stmt.qualifiers.clear();
        stmt.references.push(vec![snak]);
        assert!(!is_simple_statement(&stmt));
    }

    #[test]
    fn patch_operation_serializes_rfc6902_keys() {
        let add = PatchOperation::Add { path: "/labels/fr".into(), value: json!("A") };
        assert_eq!(
            serde_json::to_string(&add).unwrap(),
            r#"{"op":"add","path":"/labels/fr","value":"A"}"#
        );
        let remove = PatchOperation::Remove { path: "/a".into() };
        assert_eq!(serde_json::to_string(&remove).unwrap(), r#"{"op":"remove","path":"/a"}"#);
    }

    #[test]
    fn patch_operation_rejects_unsupported_ops() {
        for op in ["copy", "move", "test"] {
            let text = format!(r#"{{"op":"{op}","path":"/a"}}"#);
            assert!(serde_json::from_str::<PatchOperation>(&text).is_err(), "{op}");
        }
    }

    #[test]
    fn document_parses_claims_and_fingerprint() {
        let doc = EntityDocument::from_json(&json!({
            "id": "Q1",
            "labels": {"en": "thing"},
            "descriptions": {"en": "a thing"},
            "aliases": {"en": ["it"]},
            "claims": {
                "P31": [{
                    "id": "Q1$s1",
                    "mainsnak": {"snaktype": "value", "property": "P31",
                                 "datavalue": {"type": "wikibase-entityid", "value": "Q5"}},
                    "rank": "normal"
                }]
            }
        }))
        .unwrap();
        assert_eq!(doc.id, Some(EntityId::item(1)));
        assert_eq!(doc.labels["en"], "thing");
        let stmts = &doc.claims[&EntityId::property(31)];
        assert_eq!(stmts.len(), 1);
        assert!(stmts[0].is_simple());
        assert_eq!(
            stmts[0].mainsnak.datavalue,
            Some(DataValue::EntityId(EntityId::item(5)))
        );
    }

    #[test]
    fn snak_datavalue_presence_follows_the_kind() {
        // Value snaks require a datavalue.
        let err = EntityDocument::from_json(&json!({
            "claims": {"P31": [{"mainsnak": {"snaktype": "value", "property": "P31"}}]}
        }))
        .unwrap_err();
        assert!(err.to_string().contains("datavalue"));
        // Somevalue/novalue snaks must not carry one.
        let err = EntityDocument::from_json(&json!({
            "claims": {"P31": [{"mainsnak": {"snaktype": "somevalue", "property": "P31",
                "datavalue": {"type": "string", "value": "x"}}}]}
        }))
        .unwrap_err();
        assert!(err.to_string().contains("somevalue"));
    }

    #[test]
    fn document_rejects_mismatched_claim_property() {
        let err = EntityDocument::from_json(&json!({
            "claims": {
                "P31": [{
                    "mainsnak": {"snaktype": "value", "property": "P21",
                                 "datavalue": {"type": "wikibase-entityid", "value": "Q5"}}
                }]
            }
        }))
        .unwrap_err();
        assert!(err.to_string().contains("P21"));
    }

    #[test]
    fn chain_validation_accepts_well_formed_history() {
        let revs = vec![
            revision(1, None, "2020-01-01T00:00:00Z"),
            revision(2, Some(1), "2020-01-02T00:00:00Z"),
            revision(3, Some(2), "2020-01-02T00:00:00Z"),
        ];
        assert!(validate_revision_chain(&revs).is_ok());
    }

    #[test]
    fn chain_validation_rejects_broken_links_and_time_travel() {
        let revs = vec![
            revision(1, None, "2020-01-01T00:00:00Z"),
            revision(3, Some(2), "2020-01-02T00:00:00Z"),
        ];
        assert!(matches!(validate_revision_chain(&revs), Err(ChainError::BrokenLink { .. })));

        let revs = vec![
            revision(1, None, "2020-01-02T00:00:00Z"),
            revision(2, Some(1), "2020-01-01T00:00:00Z"),
        ];
        assert!(matches!(
            validate_revision_chain(&revs),
            Err(ChainError::NonMonotoneTimestamp { .. })
        ));

        let revs = vec![revision(1, Some(7), "2020-01-01T00:00:00Z")];
        assert!(matches!(
            validate_revision_chain(&revs),
            Err(ChainError::UnexpectedParent { .. })
        ));
    }

    fn revision(id: u64, parent_id: Option<u64>, ts: &str) -> Revision {
        Revision {
            id,
            parent_id,
            entity_id: EntityId::item(1),
            timestamp: Timestamp::parse(ts).unwrap(),
            username: "editor".into(),
            comment: None,
            entity_diff: vec![],
        }
    }
}
