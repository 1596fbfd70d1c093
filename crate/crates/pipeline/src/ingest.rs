//! Ingestion of revision dumps into diff-chain revision records.
//!
//! Two input formats are supported: a MediaWiki-style XML history export
//! whose `<text>` payloads hold full entity JSON snapshots, and a pre-diffed
//! JSON-lines interchange format with one revision record per line.
//!
//! XML ingestion turns snapshot histories into diff chains: each revision's
//! `entity_diff` is the patch from the previous snapshot (the first revision
//! is diffed against the empty document `{}`). Pages are processed one at a
//! time, so memory use is bounded by a single page's revisions.

use std::io::BufRead;

use quick_xml::events::Event;
use quick_xml::Reader;
use serde_json::Value;
use thiserror::Error;

use kghist_core::{diff, parse_entity_id, EntityId, PatchOperation, Revision, Timestamp};

use crate::Warning;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed XML at byte offset {offset}: {source}")]
    Xml {
        offset: u64,
        #[source]
        source: quick_xml::Error,
    },
    #[error("revision {revision_id}: <text> payload is empty")]
    EmptyText { revision_id: u64 },
    #[error("revision {revision_id}: <text> payload is not valid JSON: {source}")]
    InvalidEntityJson {
        revision_id: u64,
        #[source]
        source: serde_json::Error,
    },
    #[error("page {page:?}: {what}")]
    PageField { page: String, what: String },
    #[error("line {line}: {reason}")]
    JsonlSchema { line: usize, reason: String },
    #[error("I/O error reading input: {0}")]
    Io(#[from] std::io::Error),
}

/// Ingestion output: validated revision records plus any repair warnings.
#[derive(Debug, Default)]
pub struct IngestOutcome {
    pub records: Vec<Revision>,
    pub warnings: Vec<Warning>,
}

// ---------------------------------------------------------------------------
// XML dump ingestion
// ---------------------------------------------------------------------------

#[derive(Default)]
struct RawRevision {
    id: Option<u64>,
    parent_id: Option<u64>,
    timestamp: Option<Timestamp>,
    username: Option<String>,
    comment: Option<String>,
    text: Option<String>,
}

#[derive(Default)]
struct RawPage {
    title: Option<String>,
    revisions: Vec<RawRevision>,
}

/// Streaming reader over `<page>` elements of a history dump.
///
/// Each iterator item is the fully diffed record batch for one page.
pub struct XmlDumpReader<R: BufRead> {
    reader: Reader<R>,
    buf: Vec<u8>,
    done: bool,
}

impl<R: BufRead> XmlDumpReader<R> {
    pub fn new(input: R) -> Self {
        let mut reader = Reader::from_reader(input);
        reader.config_mut().trim_text(true);
        XmlDumpReader { reader, buf: Vec::new(), done: false }
    }

    fn xml_err(&self, source: quick_xml::Error) -> IngestError {
        IngestError::Xml { offset: self.reader.buffer_position(), source }
    }

    fn read_page(&mut self) -> Result<Option<RawPage>, IngestError> {
        // Scan forward to the next <page> start.
        loop {
            self.buf.clear();
            match self.reader.read_event_into(&mut self.buf) {
                Ok(Event::Start(e)) if e.local_name().as_ref() == b"page" => break,
                Ok(Event::Eof) => return Ok(None),
                Ok(_) => {}
                Err(e) => return Err(self.xml_err(e)),
            }
        }

        let mut page = RawPage::default();
        let mut revision: Option<RawRevision> = None;
        let mut in_contributor = false;
        // Path of the element whose text content we are waiting for.
        let mut capture: Option<&'static str> = None;
        let mut text_buf = String::new();

        loop {
            self.buf.clear();
            match self.reader.read_event_into(&mut self.buf) {
                Ok(Event::Start(e)) => {
                    let name = e.local_name();
                    let name = name.as_ref();
                    match name {
                        b"revision" => {
                            revision = Some(RawRevision::default());
                            in_contributor = false;
                        }
                        b"contributor" => in_contributor = true,
                        b"title" if revision.is_none() => capture = Some("title"),
                        b"id" if revision.is_some() => capture = Some("id"),
                        b"parentid" => capture = Some("parentid"),
                        b"timestamp" => capture = Some("timestamp"),
                        b"username" if in_contributor => capture = Some("username"),
                        b"ip" if in_contributor => capture = Some("ip"),
                        b"comment" => capture = Some("comment"),
                        b"text" => {
                            capture = Some("text");
                            // An empty <text/> still counts as present-but-empty.
                            if let Some(rev) = revision.as_mut() {
                                rev.text.get_or_insert_with(String::new);
                            }
                        }
                        _ => capture = None,
                    }
                    text_buf.clear();
                }
                Ok(Event::Empty(e)) => {
                    if e.local_name().as_ref() == b"text" {
                        if let Some(rev) = revision.as_mut() {
                            rev.text.get_or_insert_with(String::new);
                        }
                    }
                }
                Ok(Event::Text(t)) => {
                    if capture.is_some() {
                        let offset = self.reader.buffer_position();
                        let decoded = t
                            .unescape()
                            .map_err(|source| IngestError::Xml { offset, source })?;
                        text_buf.push_str(&decoded);
                    }
                }
                Ok(Event::End(e)) => {
                    let name = e.local_name();
                    let name = name.as_ref();
                    match name {
                        b"page" => return Ok(Some(page)),
                        b"revision" => {
                            if let Some(rev) = revision.take() {
                                page.revisions.push(rev);
                            }
                        }
                        b"contributor" => in_contributor = false,
                        _ => {
                            if let Some(field) = capture.take() {
                                self.store_field(field, &text_buf, &mut page, &mut revision)?;
                            }
                            text_buf.clear();
                        }
                    }
                }
                Ok(Event::Eof) => {
                    return Err(self.xml_err(
                        quick_xml::errors::IllFormedError::MissingEndTag("page".into()).into(),
                    ))
                }
                Ok(_) => {}
                Err(e) => return Err(self.xml_err(e)),
            }
        }
    }

    fn store_field(
        &self,
        field: &'static str,
        text: &str,
        page: &mut RawPage,
        revision: &mut Option<RawRevision>,
    ) -> Result<(), IngestError> {
        let numeric = |text: &str| -> Result<u64, IngestError> {
            text.trim().parse::<u64>().map_err(|_| IngestError::PageField {
                page: page_name(page),
                what: format!("<{field}> is not a number: {text:?}"),
            })
        };
        match field {
            "title" => page.title = Some(text.trim().to_owned()),
            _ => {
                let Some(rev) = revision.as_mut() else {
                    return Ok(());
                };
                match field {
                    "id" => rev.id = Some(numeric(text)?),
                    "parentid" => rev.parent_id = Some(numeric(text)?),
                    "timestamp" => {
                        rev.timestamp = Some(Timestamp::parse(text.trim()).map_err(|e| {
                            IngestError::PageField { page: page_name(page), what: e.to_string() }
                        })?)
                    }
                    "username" | "ip" => rev.username = Some(text.to_owned()),
                    "comment" => rev.comment = Some(text.to_owned()),
                    "text" => rev.text = Some(text.to_owned()),
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

fn page_name(page: &RawPage) -> String {
    page.title.clone().unwrap_or_else(|| "<untitled>".to_owned())
}

impl<R: BufRead> Iterator for XmlDumpReader<R> {
    type Item = Result<IngestOutcome, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.read_page() {
            Ok(Some(page)) => Some(diff_page(page)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

/// Converts one page's snapshot history into diffed revision records.
fn diff_page(page: RawPage) -> Result<IngestOutcome, IngestError> {
    let title = page.title.clone().ok_or_else(|| IngestError::PageField {
        page: page_name(&page),
        what: "missing <title>".to_owned(),
    })?;
    let entity_id = parse_entity_id(&title).map_err(|e| IngestError::PageField {
        page: title.clone(),
        what: e.to_string(),
    })?;

    let mut revisions = Vec::with_capacity(page.revisions.len());
    for raw in page.revisions {
        let id = raw.id.ok_or_else(|| IngestError::PageField {
            page: title.clone(),
            what: "revision missing <id>".to_owned(),
        })?;
        let timestamp = raw.timestamp.ok_or_else(|| IngestError::PageField {
            page: title.clone(),
            what: format!("revision {id} missing <timestamp>"),
        })?;
        let text = raw.text.ok_or_else(|| IngestError::PageField {
            page: title.clone(),
            what: format!("revision {id} missing <text>"),
        })?;
        if text.trim().is_empty() {
            return Err(IngestError::EmptyText { revision_id: id });
        }
        let snapshot: Value = serde_json::from_str(&text)
            .map_err(|source| IngestError::InvalidEntityJson { revision_id: id, source })?;
        revisions.push((id, raw.parent_id, timestamp, raw.username, raw.comment, snapshot));
    }

    let mut warnings = Vec::new();

    // Chronological order wins over document order and over declared parent
    // links; equal timestamps fall back to the revision id.
    let mut sorted = revisions;
    let before: Vec<u64> = sorted.iter().map(|r| r.0).collect();
    sorted.sort_by_key(|r| (r.2, r.0));
    let after: Vec<u64> = sorted.iter().map(|r| r.0).collect();
    if before != after {
        warnings.push(Warning::new(format!(
            "page {title}: revisions were out of chronological order; reordered by (timestamp, id)"
        )));
    }

    let mut records = Vec::with_capacity(sorted.len());
    let mut previous = Value::Object(Default::default());
    let mut previous_id: Option<u64> = None;
    for (id, declared_parent, timestamp, username, comment, snapshot) in sorted {
        if declared_parent != previous_id {
            warnings.push(Warning::new(format!(
                "page {title}: revision {id} declares parent {declared_parent:?} but follows \
                 {previous_id:?}; chain repaired by timestamp order"
            )));
        }
        let entity_diff: Vec<PatchOperation> = diff(&previous, &snapshot);
        records.push(Revision {
            id,
            parent_id: previous_id,
            entity_id,
            timestamp,
            username: username.unwrap_or_default(),
            comment,
            entity_diff,
        });
        previous = snapshot;
        previous_id = Some(id);
    }

    Ok(IngestOutcome { records, warnings })
}

/// Parses a full XML dump, concatenating every page's records.
pub fn ingest_xml_dump<R: BufRead>(input: R) -> Result<IngestOutcome, IngestError> {
    let mut outcome = IngestOutcome::default();
    for page in XmlDumpReader::new(input) {
        let page = page?;
        outcome.records.extend(page.records);
        outcome.warnings.extend(page.warnings);
    }
    Ok(outcome)
}

// ---------------------------------------------------------------------------
// JSON-lines ingestion
// ---------------------------------------------------------------------------

/// Parses the pre-diffed JSON-lines revision format: one record per line with
/// keys `id`, `parent_id`, `entity_id`, `timestamp`, `username`, `comment`,
/// and `entity_diff`.
pub fn ingest_jsonl<R: BufRead>(input: R) -> Result<IngestOutcome, IngestError> {
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for (number, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Revision = serde_json::from_str(&line)
            .map_err(|e| IngestError::JsonlSchema { line: number + 1, reason: e.to_string() })?;
        records.push(record);
    }

    // Per-entity chronological order is required downstream; repair with a
    // stable global sort when an entity's records arrive out of order.
    let mut disordered: Vec<EntityId> = Vec::new();
    let mut last_seen: std::collections::BTreeMap<EntityId, (Timestamp, u64)> = Default::default();
    for record in &records {
        let key = (record.timestamp, record.id);
        if let Some(previous) = last_seen.get(&record.entity_id) {
            if key < *previous && !disordered.contains(&record.entity_id) {
                disordered.push(record.entity_id);
            }
        }
        last_seen.insert(record.entity_id, key);
    }
    if !disordered.is_empty() {
        let names: Vec<String> = disordered.iter().map(|id| id.to_string()).collect();
        warnings.push(Warning::new(format!(
            "records out of chronological order for {}; reordered by (timestamp, id)",
            names.join(", ")
        )));
        records.sort_by_key(|r| (r.timestamp, r.id));
    }

    Ok(IngestOutcome { records, warnings })
}
