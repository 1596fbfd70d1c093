//! Revision-dump ingestion, diff-chain storage, triple-operation extraction,
//! graph materialization and export, and edit analytics.

pub mod analytics;
pub mod export;
pub mod extract;
pub mod fixture;
pub mod graph;
pub mod ingest;
pub mod rank;
pub mod store;

/// A non-fatal condition noticed while processing, surfaced to the caller
/// instead of being swallowed by a logger.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Warning {
    pub message: String,
}

impl Warning {
    pub fn new(message: impl Into<String>) -> Self {
        Warning { message: message.into() }
    }
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}
