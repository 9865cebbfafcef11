use thiserror::Error;

use crate::ring::AgentId;

#[derive(Debug, Error)]
pub enum DkdError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("node {node} out of range for ring of size {n}")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("edge {edge} out of range for ring of size {n}")]
    EdgeOutOfRange { edge: usize, n: usize },
    #[error("agent {0} placed twice")]
    DuplicateAgent(AgentId),
    #[error("unknown agent {0}")]
    UnknownAgent(AgentId),
    #[error("view has no occupied cell")]
    EmptyView,
    #[error("malformed view: {0}")]
    MalformedView(String),
    #[error("configuration is not dispersed")]
    NotDispersed,
    #[error("view is not asymmetric")]
    NotAsymmetric,
    #[error("agent {0} is done but emitted a move")]
    DoneAgentMoved(AgentId),
    #[error("state budget of {0} states exceeded")]
    MemoryBudget(usize),
    #[error("trace: {0}")]
    Trace(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
