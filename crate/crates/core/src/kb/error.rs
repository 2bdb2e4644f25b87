use std::path::PathBuf;

use thiserror::Error;

use crate::ids::{NodeId, SenseId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleKind {
    Hypernym,
    Typification,
}

impl std::fmt::Display for CycleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CycleKind::Hypernym => "hypernym",
            CycleKind::Typification => "typification",
        })
    }
}

/// A load or integrity failure. Validation collects every one of these it
/// finds; loading stops at the first.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KbError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("bad manifest: {0}")]
    Manifest(String),
    #[error("malformed record at {file}:{line}: {reason}")]
    MalformedRecord {
        file: String,
        line: usize,
        reason: String,
    },
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("unresolved reference in {record} field `{field}`: `{target}`")]
    UnresolvedReference {
        record: String,
        field: &'static str,
        target: String,
    },
    #[error("{kind} cycle through {}", .path.join(" -> "))]
    CycleDetected { kind: CycleKind, path: Vec<String> },
    #[error("invalid {record}: {reason}")]
    InvalidRecord { record: String, reason: String },
    #[error("language `{0}` is not registered in the manifest")]
    UnregisteredLanguage(String),
}

impl KbError {
    /// Stable machine-readable class name.
    pub fn code(&self) -> &'static str {
        match self {
            KbError::Io { .. } => "Io",
            KbError::Manifest(_) => "Manifest",
            KbError::MalformedRecord { .. } => "MalformedRecord",
            KbError::DuplicateId { .. } => "DuplicateId",
            KbError::UnresolvedReference { .. } => "UnresolvedReference",
            KbError::CycleDetected { .. } => "CycleDetected",
            KbError::InvalidRecord { .. } => "InvalidRecord",
            KbError::UnregisteredLanguage(_) => "UnregisteredLanguage",
        }
    }
}

/// Failures of the runtime mutations (compound creation, definitions).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MutationError {
    #[error("sense `{0}` is not attached to any known concept")]
    ConstituentUnknown(SenseId),
    #[error("unknown sense `{0}`")]
    UnknownSense(SenseId),
    #[error("a compound needs at least two constituents, got {0}")]
    TooFewConstituents(usize),
    #[error("compound constituents mix languages")]
    MixedLanguages,
    #[error("unknown concept type `{0}`")]
    UnknownType(NodeId),
    #[error("unknown relation target `{0}`")]
    UnknownRelationTarget(NodeId),
    #[error("language `{0}` is not registered")]
    UnregisteredLanguage(String),
    #[error("definition lemma is empty")]
    EmptyLemma,
}
