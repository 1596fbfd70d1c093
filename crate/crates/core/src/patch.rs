//! RFC 6902 JSON Patch: diff computation, patch application, and document
//! reconstruction from diff chains.
//!
//! The differ recurses key-wise into objects and index-wise into arrays,
//! emitting a `replace` at the deepest differing subtree and trailing
//! `add`/`remove` operations for length changes. It guarantees the round-trip
//! law `apply(a, diff(a, b)) == b` and the empty-diff law
//! `diff(a, b) == [] <=> a == b`; it does not promise minimal patches.

use serde_json::Value;
use thiserror::Error;

use crate::model::PatchOperation;

/// Why a single patch operation failed to apply.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PatchErrorKind {
    #[error("path is not a valid JSON pointer")]
    InvalidPointer,
    #[error("path does not resolve to an existing location")]
    PathNotFound,
    #[error("parent of the target location does not exist")]
    MissingParent,
    #[error("array index is out of bounds or malformed")]
    BadArrayIndex,
    #[error("the document root cannot be removed")]
    RootRemoval,
}

/// A patch application failure, carrying the index of the failing operation.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("patch operation {index} at {path:?} failed: {kind}")]
pub struct PatchError {
    pub index: usize,
    pub path: String,
    pub kind: PatchErrorKind,
}

/// A reconstruction failure, carrying the index of the failing revision.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("revision {revision} failed to apply: {source}")]
pub struct ReconstructError {
    pub revision: usize,
    #[source]
    pub source: PatchError,
}

/// Computes a patch that rewrites `before` into `after`.
pub fn diff(before: &Value, after: &Value) -> Vec<PatchOperation> {
    let mut ops = Vec::new();
    diff_at(before, after, String::new(), &mut ops);
    ops
}

fn diff_at(before: &Value, after: &Value, path: String, ops: &mut Vec<PatchOperation>) {
    if before == after {
        return;
    }
    match (before, after) {
        (Value::Object(a), Value::Object(b)) => {
            let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
            keys.sort_unstable();
            keys.dedup();
            for key in keys {
                let child = format!("{path}/{}", escape_token(key));
                match (a.get(key), b.get(key)) {
                    (Some(old), Some(new)) => diff_at(old, new, child, ops),
                    (Some(_), None) => ops.push(PatchOperation::Remove { path: child }),
                    (None, Some(new)) => {
                        ops.push(PatchOperation::Add { path: child, value: new.clone() })
                    }
                    (None, None) => unreachable!("key from union of both maps"),
                }
            }
        }
        (Value::Array(a), Value::Array(b)) => {
            let shared = a.len().min(b.len());
            for i in 0..shared {
                diff_at(&a[i], &b[i], format!("{path}/{i}"), ops);
            }
            for (i, item) in b.iter().enumerate().skip(shared) {
                ops.push(PatchOperation::Add { path: format!("{path}/{i}"), value: item.clone() });
            }
            // Trailing removals go from the back so earlier indices stay valid.
            for i in (shared..a.len()).rev() {
                ops.push(PatchOperation::Remove { path: format!("{path}/{i}") });
            }
        }
        _ => ops.push(PatchOperation::Replace { path, value: after.clone() }),
    }
}

/// Applies a patch to a document, returning the patched copy.
pub fn apply(doc: &Value, patch: &[PatchOperation]) -> Result<Value, PatchError> {
    let mut current = doc.clone();
    for (index, op) in patch.iter().enumerate() {
        apply_one(&mut current, op).map_err(|kind| PatchError {
            index,
            path: op.path().to_owned(),
            kind,
        })?;
    }
    Ok(current)
}

/// Applies the first `up_to` patches of a revision chain to `base`.
pub fn reconstruct(
    base: &Value,
    patches: &[Vec<PatchOperation>],
    up_to: usize,
) -> Result<Value, ReconstructError> {
    let mut current = base.clone();
    for (revision, patch) in patches.iter().take(up_to).enumerate() {
        current = apply(&current, patch).map_err(|source| ReconstructError { revision, source })?;
    }
    Ok(current)
}

fn apply_one(doc: &mut Value, op: &PatchOperation) -> Result<(), PatchErrorKind> {
    let tokens = parse_pointer(op.path())?;
    match op {
        PatchOperation::Add { value, .. } => add(doc, &tokens, value.clone()),
        PatchOperation::Replace { value, .. } => replace(doc, &tokens, value.clone()),
        PatchOperation::Remove { .. } => remove(doc, &tokens),
    }
}

fn add(doc: &mut Value, tokens: &[String], value: Value) -> Result<(), PatchErrorKind> {
    let Some((last, parents)) = tokens.split_last() else {
        *doc = value;
        return Ok(());
    };
    match navigate(doc, parents)? {
        Value::Object(map) => {
            map.insert(last.clone(), value);
            Ok(())
        }
        Value::Array(items) => {
            if last == "-" {
                items.push(value);
                return Ok(());
            }
            let index = parse_array_index(last)?;
            if index > items.len() {
                return Err(PatchErrorKind::BadArrayIndex);
            }
            items.insert(index, value);
            Ok(())
        }
        _ => Err(PatchErrorKind::MissingParent),
    }
}

fn replace(doc: &mut Value, tokens: &[String], value: Value) -> Result<(), PatchErrorKind> {
    let Some((last, parents)) = tokens.split_last() else {
        *doc = value;
        return Ok(());
    };
    match navigate(doc, parents)? {
        Value::Object(map) => match map.get_mut(last) {
            Some(slot) => {
                *slot = value;
                Ok(())
            }
            None => Err(PatchErrorKind::PathNotFound),
        },
        Value::Array(items) => {
            let index = parse_array_index(last)?;
            match items.get_mut(index) {
                Some(slot) => {
                    *slot = value;
                    Ok(())
                }
                None => Err(PatchErrorKind::BadArrayIndex),
            }
        }
        _ => Err(PatchErrorKind::PathNotFound),
    }
}

fn remove(doc: &mut Value, tokens: &[String]) -> Result<(), PatchErrorKind> {
    let Some((last, parents)) = tokens.split_last() else {
        return Err(PatchErrorKind::RootRemoval);
    };
    match navigate(doc, parents)? {
        Value::Object(map) => {
            if map.remove(last).is_none() {
                return Err(PatchErrorKind::PathNotFound);
            }
            Ok(())
        }
        Value::Array(items) => {
            let index = parse_array_index(last)?;
            if index >= items.len() {
                return Err(PatchErrorKind::BadArrayIndex);
            }
            items.remove(index);
            Ok(())
        }
        _ => Err(PatchErrorKind::PathNotFound),
    }
}

fn navigate<'a>(doc: &'a mut Value, tokens: &[String]) -> Result<&'a mut Value, PatchErrorKind> {
    let mut current = doc;
    for token in tokens {
        current = match current {
            Value::Object(map) => map.get_mut(token).ok_or(PatchErrorKind::MissingParent)?,
            Value::Array(items) => {
                let index = parse_array_index(token).map_err(|_| PatchErrorKind::MissingParent)?;
                items.get_mut(index).ok_or(PatchErrorKind::MissingParent)?
            }
            _ => return Err(PatchErrorKind::MissingParent),
        };
    }
    Ok(current)
}

/// Splits an RFC 6901 pointer into unescaped reference tokens.
pub fn parse_pointer(path: &str) -> Result<Vec<String>, PatchErrorKind> {
    if path.is_empty() {
        return Ok(Vec::new());
    }
    if !path.starts_with('/') {
        return Err(PatchErrorKind::InvalidPointer);
    }
    path[1..].split('/').map(unescape_token).collect()
}

/// Escapes a single reference token (`~` -> `~0`, `/` -> `~1`).
pub fn escape_token(token: &str) -> String {
    token.replace('~', "~0").replace('/', "~1")
}

fn unescape_token(token: &str) -> Result<String, PatchErrorKind> {
    let mut out = String::with_capacity(token.len());
    let mut chars = token.chars();
    while let Some(c) = chars.next() {
        if c != '~' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('0') => out.push('~'),
            Some('1') => out.push('/'),
            _ => return Err(PatchErrorKind::InvalidPointer),
        }
    }
    Ok(out)
}

fn parse_array_index(token: &str) -> Result<usize, PatchErrorKind> {
    if token.is_empty() || (token.len() > 1 && token.starts_with('0')) {
        return Err(PatchErrorKind::BadArrayIndex);
    }
    if !token.bytes().all(|b| b.is_ascii_digit()) {
        return Err(PatchErrorKind::BadArrayIndex);
    }
    token.parse().map_err(|_| PatchErrorKind::BadArrayIndex)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn diff_of_identical_documents_is_empty() {
        let doc = json!({"labels": {"en": "A"}, "claims": {"P31": [1, 2]}});
        assert!(diff(&doc, &doc).is_empty());
    }

    #[test]
    fn diff_emits_add_for_new_map_key() {
        let before = json!({"labels": {"en": "A"}});
        let after = json!({"labels": {"en": "A", "fr": "A"}});
        assert_eq!(
            diff(&before, &after),
            vec![PatchOperation::Add { path: "/labels/fr".into(), value: json!("A") }]
        );
    }

    #[test]
    fn diff_replaces_at_deepest_differing_subtree() {
        let before = json!({"a": {"b": {"c": 1}}});
        let after = json!({"a": {"b": {"c": 2}}});
        assert_eq!(
            diff(&before, &after),
            vec![PatchOperation::Replace { path: "/a/b/c".into(), value: json!(2) }]
        );
    }

    #[test]
    fn diff_handles_array_growth_and_shrink() {
        let before = json!([1, 2, 3]);
        let after = json!([1, 9]);
        let patch = diff(&before, &after);
        assert_eq!(apply(&before, &patch).unwrap(), after);

        let grown = json!([1, 2, 3, 4, 5]);
        let patch = diff(&before, &grown);
        assert_eq!(apply(&before, &patch).unwrap(), grown);
    }

    #[test]
    fn apply_empty_patch_is_identity() {
        let doc = json!({"a": 1});
        assert_eq!(apply(&doc, &[]).unwrap(), doc);
    }

    #[test]
    fn apply_remove_deletes_key() {
        let doc = json!({"a": 1});
        let out = apply(&doc, &[PatchOperation::Remove { path: "/a".into() }]).unwrap();
        assert_eq!(out, json!({}));
        // The input document is untouched.
        assert_eq!(doc, json!({"a": 1}));
    }

    #[test]
    fn apply_remove_of_absent_key_fails_with_index() {
        let err = apply(&json!({}), &[PatchOperation::Remove { path: "/a".into() }]).unwrap_err();
        assert_eq!(err.index, 0);
        assert_eq!(err.kind, PatchErrorKind::PathNotFound);
    }

    #[test]
    fn apply_add_into_missing_parent_fails() {
        let err = apply(
            &json!({}),
            &[PatchOperation::Add { path: "/a/b".into(), value: json!(1) }],
        )
        .unwrap_err();
        assert_eq!(err.kind, PatchErrorKind::MissingParent);
    }

    #[test]
    fn apply_reports_failing_operation_index() {
        let ops = vec![
            PatchOperation::Add { path: "/a".into(), value: json!(1) },
            PatchOperation::Remove { path: "/b".into() },
        ];
        let err = apply(&json!({}), &ops).unwrap_err();
        assert_eq!(err.index, 1);
    }

    #[test]
    fn add_appends_with_dash_and_index() {
        let doc = json!({"xs": [1, 2]});
        let out = apply(
            &doc,
            &[
                PatchOperation::Add { path: "/xs/-".into(), value: json!(3) },
                PatchOperation::Add { path: "/xs/0".into(), value: json!(0) },
            ],
        )
        .unwrap();
        assert_eq!(out, json!({"xs": [0, 1, 2, 3]}));
    }

    #[test]
    fn add_rejects_out_of_range_or_malformed_index() {
        let doc = json!({"xs": [1]});
        for path in ["/xs/2", "/xs/01", "/xs/x"] {
            let err = apply(
                &doc,
                &[PatchOperation::Add { path: path.into(), value: json!(9) }],
            )
            .unwrap_err();
            assert_eq!(err.kind, PatchErrorKind::BadArrayIndex, "{path}");
        }
    }

    #[test]
    fn pointer_tokens_unescape() {
        assert_eq!(parse_pointer("/a~1b/c~0d").unwrap(), vec!["a/b", "c~d"]);
        assert_eq!(parse_pointer("").unwrap(), Vec::<String>::new());
        assert!(parse_pointer("a").is_err());
        assert!(parse_pointer("/bad~2").is_err());
    }

    #[test]
    fn escaped_keys_round_trip_through_diff() {
        let before = json!({});
        let after = json!({"a/b": {"c~d": 1}});
        let patch = diff(&before, &after);
        assert_eq!(apply(&before, &patch).unwrap(), after);
    }

    #[test]
    fn reconstruct_zero_patches_returns_base() {
        let base = json!({"a": 1});
        let patches = vec![vec![PatchOperation::Remove { path: "/a".into() }]];
        assert_eq!(reconstruct(&base, &patches, 0).unwrap(), base);
    }

    #[test]
    fn reconstruct_from_empty_document_builds_first_revision() {
        let first = json!({"id": "Q1", "labels": {"en": "thing"}});
        let patches = vec![diff(&json!({}), &first)];
        assert_eq!(reconstruct(&json!({}), &patches, 1).unwrap(), first);
    }

    #[test]
    fn reconstruct_reports_failing_revision() {
        let patches = vec![
            vec![PatchOperation::Add { path: "/a".into(), value: json!(1) }],
            vec![PatchOperation::Remove { path: "/zzz".into() }],
        ];
        let err = reconstruct(&json!({}), &patches, 2).unwrap_err();
        assert_eq!(err.revision, 1);
    }

    #[test]
    fn number_lexical_forms_are_preserved_and_distinguished() {
        let before: Value = serde_json::from_str(r#"{"x": 1.50}"#).unwrap();
        let after: Value = serde_json::from_str(r#"{"x": 1.5}"#).unwrap();
        let patch = diff(&before, &after);
        assert_eq!(patch.len(), 1, "1.50 and 1.5 differ lexically");
        assert_eq!(apply(&before, &patch).unwrap(), after);
        assert_eq!(serde_json::to_string(&apply(&before, &patch).unwrap()).unwrap(), r#"{"x":1.5}"#);
    }
}
