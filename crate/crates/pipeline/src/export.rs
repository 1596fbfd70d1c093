//! N-Triples export of the static graph and of the revision/operation
//! history, plus the replay path that rebuilds the operation stream from a
//! history export.
//!
//! Entities are minted under `http://kg.local/entity/`, and the history
//! vocabulary lives under `http://kg.local/hist#` (prefix `wdh:`):
//!
//! * per revision `R`: `R wdh:revisionOf <entity>`,
//!   `R wdh:parentRevision <prev>`, `R wdh:timestamp "<ISO 8601>"`,
//!   `R wdh:author "<username>"`;
//! * per operation `O`: `R wdh:hasOperation O`,
//!   `O wdh:opType wdh:Addition|wdh:Removal`, `O wdh:subject`,
//!   `O wdh:predicate`, `O wdh:object`, `O wdh:ordinal "<n>"`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use kghist_core::{EntityId, Object, OpKind, Revision, Timestamp, Triple, TripleOperation};

use crate::graph::KnowledgeGraphState;

pub const ENTITY_NS: &str = "http://kg.local/entity/";
pub const HIST_NS: &str = "http://kg.local/hist#";

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed N-Triples: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: history triple is incomplete or inconsistent: {reason}")]
    Replay { line: usize, reason: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExportError + '_ {
    move |source| ExportError::Io { path: path.to_path_buf(), source }
}

pub fn entity_iri(id: EntityId) -> String {
    format!("{ENTITY_NS}{id}")
}

fn revision_iri(id: u64) -> String {
    format!("{HIST_NS}rev{id}")
}

fn operation_iri(ordinal: u64) -> String {
    format!("{HIST_NS}op{ordinal}")
}

fn hist(term: &str) -> String {
    format!("{HIST_NS}{term}")
}

fn format_iri(iri: &str) -> String {
    format!("<{iri}>")
}

fn escape_literal(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            other => out.push(other),
        }
    }
    out
}

fn format_literal(text: &str) -> String {
    format!("\"{}\"", escape_literal(text))
}

fn format_object(object: &Object) -> String {
    match object {
        Object::Entity(id) => format_iri(&entity_iri(*id)),
        Object::Literal { lexical, .. } => format_literal(lexical),
        Object::Blank(label) => format!("_:{label}"),
    }
}

fn triple_line(subject: &str, predicate: &str, object: &str) -> String {
    format!("{subject} {predicate} {object} .")
}

/// Writes the static graph as sorted N-Triples; returns the line count.
pub fn export_static(state: &KnowledgeGraphState, path: &Path) -> Result<usize, ExportError> {
    let lines = static_lines(state);
    let mut text = lines.join("\n");
    if !text.is_empty() {
        text.push('\n');
    }
    std::fs::write(path, text).map_err(io_err(path))?;
    Ok(lines.len())
}

fn static_lines(state: &KnowledgeGraphState) -> Vec<String> {
    let mut lines: Vec<String> = state
        .triples
        .iter()
        .map(|t| {
            triple_line(
                &format_iri(&entity_iri(t.subject)),
                &format_iri(&entity_iri(t.predicate)),
                &format_object(&t.object),
            )
        })
        .collect();
    lines.sort_unstable();
    lines
}

/// Writes the revision/operation history as N-Triples; returns the line
/// count. Replaying the file in ordinal order rebuilds the static graph.
pub fn export_dynamic(
    ops: &[TripleOperation],
    revisions: &[Revision],
    path: &Path,
) -> Result<usize, ExportError> {
    let mut by_revision: BTreeMap<u64, Vec<&TripleOperation>> = BTreeMap::new();
    for op in ops {
        by_revision.entry(op.revision_id).or_default().push(op);
    }

    let mut sorted: Vec<&Revision> = revisions.iter().collect();
    sorted.sort_by_key(|r| (r.timestamp, r.id));

    let mut lines = Vec::new();
    for revision in sorted {
        let rev = format_iri(&revision_iri(revision.id));
        lines.push(triple_line(
            &rev,
            &format_iri(&hist("revisionOf")),
            &format_iri(&entity_iri(revision.entity_id)),
        ));
        if let Some(parent) = revision.parent_id {
            lines.push(triple_line(
                &rev,
                &format_iri(&hist("parentRevision")),
                &format_iri(&revision_iri(parent)),
            ));
        }
        lines.push(triple_line(
            &rev,
            &format_iri(&hist("timestamp")),
            &format_literal(&revision.timestamp.to_string()),
        ));
        lines.push(triple_line(
            &rev,
            &format_iri(&hist("author")),
            &format_literal(&revision.username),
        ));
        for op in by_revision.get(&revision.id).map(Vec::as_slice).unwrap_or_default() {
            let node = format_iri(&operation_iri(op.ordinal));
            let op_type = match op.kind {
                OpKind::Addition => hist("Addition"),
                OpKind::Removal => hist("Removal"),
            };
            lines.push(triple_line(&rev, &format_iri(&hist("hasOperation")), &node));
            lines.push(triple_line(&node, &format_iri(&hist("opType")), &format_iri(&op_type)));
            lines.push(triple_line(
                &node,
                &format_iri(&hist("subject")),
                &format_iri(&entity_iri(op.triple.subject)),
            ));
            lines.push(triple_line(
                &node,
                &format_iri(&hist("predicate")),
                &format_iri(&entity_iri(op.triple.predicate)),
            ));
            lines.push(triple_line(
                &node,
                &format_iri(&hist("object")),
                &format_object(&op.triple.object),
            ));
            lines.push(triple_line(
                &node,
                &format_iri(&hist("ordinal")),
                &format_literal(&op.ordinal.to_string()),
            ));
        }
    }

    let mut text = lines.join("\n");
    if !text.is_empty() {
        text.push('\n');
    }
    std::fs::write(path, text).map_err(io_err(path))?;
    Ok(lines.len())
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Term {
    Iri(String),
    Blank(String),
    Literal(String),
}

fn parse_term(text: &str, line: usize) -> Result<(Term, &str), ExportError> {
    let err = |reason: &str| ExportError::Parse { line, reason: reason.to_owned() };
    let text = text.trim_start();
    if let Some(rest) = text.strip_prefix('<') {
        let end = rest.find('>').ok_or_else(|| err("unterminated IRI"))?;
        return Ok((Term::Iri(rest[..end].to_owned()), &rest[end + 1..]));
    }
    if let Some(rest) = text.strip_prefix("_:") {
        let end = rest.find(|c: char| c.is_whitespace()).unwrap_or(rest.len());
        return Ok((Term::Blank(rest[..end].to_owned()), &rest[end..]));
    }
    if let Some(rest) = text.strip_prefix('"') {
        let mut value = String::new();
        let mut chars = rest.char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '"' => return Ok((Term::Literal(value), &rest[i + 1..])),
                '\\' => match chars.next() {
                    Some((_, 'n')) => value.push('\n'),
                    Some((_, 'r')) => value.push('\r'),
                    Some((_, 't')) => value.push('\t'),
                    Some((_, '"')) => value.push('"'),
                    Some((_, '\\')) => value.push('\\'),
                    _ => return Err(err("bad literal escape")),
                },
                other => value.push(other),
            }
        }
        return Err(err("unterminated literal"));
    }
    Err(err("expected IRI, blank node, or literal"))
}

fn parse_line(text: &str, line: usize) -> Result<Option<(Term, String, Term)>, ExportError> {
    let trimmed = text.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let err = |reason: &str| ExportError::Parse { line, reason: reason.to_owned() };
    let (subject, rest) = parse_term(trimmed, line)?;
    let (predicate, rest) = parse_term(rest, line)?;
    let Term::Iri(predicate) = predicate else {
        return Err(err("predicate must be an IRI"));
    };
    let (object, rest) = parse_term(rest, line)?;
    if rest.trim() != "." {
        return Err(err("line must end with `.`"));
    }
    Ok(Some((subject, predicate, object)))
}

fn parse_entity_iri(iri: &str, line: usize) -> Result<EntityId, ExportError> {
    iri.strip_prefix(ENTITY_NS)
        .and_then(|id| id.parse().ok())
        .ok_or_else(|| ExportError::Replay { line, reason: format!("not an entity IRI: {iri}") })
}

#[derive(Default)]
struct PartialOp {
    kind: Option<OpKind>,
    subject: Option<EntityId>,
    predicate: Option<EntityId>,
    object: Option<Object>,
    revision_id: Option<u64>,
    line: usize,
}

/// Parses a history export back into its ordinal-sorted operation stream.
pub fn replay_dynamic(text: &str) -> Result<Vec<TripleOperation>, ExportError> {
    let mut ops: BTreeMap<u64, PartialOp> = BTreeMap::new();
    let mut revision_timestamps: BTreeMap<u64, Timestamp> = BTreeMap::new();

    let op_ordinal = |iri: &str, line: usize| -> Result<Option<u64>, ExportError> {
        match iri.strip_prefix(HIST_NS).and_then(|r| r.strip_prefix("op")) {
            Some(digits) => digits
                .parse()
                .map(Some)
                .map_err(|_| ExportError::Replay { line, reason: format!("bad op node {iri}") }),
            None => Ok(None),
        }
    };
    let rev_id = |iri: &str, line: usize| -> Result<Option<u64>, ExportError> {
        match iri.strip_prefix(HIST_NS).and_then(|r| r.strip_prefix("rev")) {
            Some(digits) => digits
                .parse()
                .map(Some)
                .map_err(|_| ExportError::Replay { line, reason: format!("bad rev node {iri}") }),
            None => Ok(None),
        }
    };

    for (number, raw) in text.lines().enumerate() {
        let line = number + 1;
        let Some((subject, predicate, object)) = parse_line(raw, line)? else {
            continue;
        };
        let Term::Iri(subject_iri) = &subject else {
            return Err(ExportError::Replay { line, reason: "blank subject".into() });
        };
        let Some(verb) = predicate.strip_prefix(HIST_NS) else {
            continue;
        };
        match verb {
            "timestamp" => {
                if let (Some(rev), Term::Literal(text)) = (rev_id(subject_iri, line)?, &object) {
                    let ts = Timestamp::parse(text)
                        .map_err(|e| ExportError::Replay { line, reason: e.to_string() })?;
                    revision_timestamps.insert(rev, ts);
                }
            }
            "hasOperation" => {
                let rev = rev_id(subject_iri, line)?
                    .ok_or_else(|| ExportError::Replay { line, reason: "bad revision node".into() })?;
                let Term::Iri(node) = &object else {
                    return Err(ExportError::Replay { line, reason: "operation must be an IRI".into() });
                };
                let ordinal = op_ordinal(node, line)?
                    .ok_or_else(|| ExportError::Replay { line, reason: "bad operation node".into() })?;
                let slot = ops.entry(ordinal).or_default();
                slot.revision_id = Some(rev);
                slot.line = line;
            }
            "opType" | "subject" | "predicate" | "object" | "ordinal" => {
                let Some(ordinal) = op_ordinal(subject_iri, line)? else {
                    continue;
                };
                let slot = ops.entry(ordinal).or_default();
                slot.line = line;
                match (verb, &object) {
                    ("opType", Term::Iri(iri)) => {
                        slot.kind = match iri.strip_prefix(HIST_NS) {
                            Some("Addition") => Some(OpKind::Addition),
                            Some("Removal") => Some(OpKind::Removal),
                            _ => {
                                return Err(ExportError::Replay {
                                    line,
                                    reason: format!("unknown op type {iri}"),
                                })
                            }
                        };
                    }
                    ("subject", Term::Iri(iri)) => slot.subject = Some(parse_entity_iri(iri, line)?),
                    ("predicate", Term::Iri(iri)) => {
                        slot.predicate = Some(parse_entity_iri(iri, line)?)
                    }
                    ("object", Term::Iri(iri)) => {
                        slot.object = Some(Object::Entity(parse_entity_iri(iri, line)?))
                    }
                    ("object", Term::Blank(label)) => {
                        slot.object = Some(Object::Blank(label.clone()))
                    }
                    ("object", Term::Literal(text)) => {
                        slot.object = Some(Object::Literal {
                            lexical: text.clone(),
                            kind: kghist_core::LiteralKind::String,
                        })
                    }
                    ("ordinal", Term::Literal(_)) => {}
                    _ => {
                        return Err(ExportError::Replay {
                            line,
                            reason: format!("unexpected object for wdh:{verb}"),
                        })
                    }
                }
            }
            _ => {}
        }
    }

    let mut out = Vec::with_capacity(ops.len());
    for (ordinal, partial) in ops {
        let line = partial.line;
        let missing = |what: &str| ExportError::Replay {
            line,
            reason: format!("operation {ordinal} is missing {what}"),
        };
        let revision_id = partial.revision_id.ok_or_else(|| missing("a hasOperation link"))?;
        let timestamp = revision_timestamps
            .get(&revision_id)
            .copied()
            .ok_or_else(|| missing("its revision timestamp"))?;
        out.push(TripleOperation {
            kind: partial.kind.ok_or_else(|| missing("opType"))?,
            triple: Triple::new(
                partial.subject.ok_or_else(|| missing("subject"))?,
                partial.predicate.ok_or_else(|| missing("predicate"))?,
                partial.object.ok_or_else(|| missing("object"))?,
            ),
            revision_id,
            timestamp,
            ordinal,
        });
    }
    Ok(out)
}
