//! Core domain model for collaborative knowledge-graph edit histories.
//!
//! This crate defines the vocabulary shared by the whole toolkit: entity
//! identifiers, snaks, statements, revisions, triple-level operations, and an
//! RFC 6902 JSON Patch engine used to store revision histories as diff chains.

pub mod canon;
pub mod model;
pub mod patch;
pub mod timestamp;

pub use model::{
    parse_entity_id, validate_revision_chain, ChainError, DataValue, DocumentError, EntityDocument,
    EntityId, EntityIdParseError, EntityKind, LiteralKind, Object, OpKind, PatchOperation, Rank,
    Revision, Snak, SnakKind, Statement, Triple, TripleOperation,
};
pub use patch::{apply, diff, reconstruct, PatchError, PatchErrorKind};
pub use timestamp::{Timestamp, TimestampParseError};
