use std::fmt;

use serde::Serialize;

/// Non-fatal conditions collected while processing a document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum DiagnosticKind {
    SkippedLine,
    OverlappingEntities,
    DroppedEntity,
    UnbalancedBrackets,
    NoOperationInDocument,
    NoHostCandidate,
    NoPrecedingOperation,
    CrossGroupCoreference,
    MixedLabelCluster,
    SelfLoopDropped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

impl Diagnostic {
    pub fn new(kind: DiagnosticKind, message: impl Into<String>) -> Self {
        Diagnostic {
            kind,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.message)
    }
}
