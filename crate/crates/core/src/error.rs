use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("schema violation at {field}: {message}")]
    Schema { field: String, message: String },
    #[error("dangling endpoint: arrow references undeclared vertex {0:?}")]
    DanglingEndpoint(String),
    #[error("zero multiplicity on arrow {src} -> {dst}")]
    ZeroMultiplicity { src: String, dst: String },
    #[error("sink detected at vertex {0:?}")]
    Sink(String),
    #[error("vertex not found: {0:?}")]
    VertexNotFound(String),
    #[error("non-composable paths: {0}")]
    NonComposable(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("undetermined: {0}")]
    Undetermined(String),
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
}

impl Error {
    pub fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema { field: field.into(), message: message.into() }
    }

    pub fn precondition(message: impl Into<String>) -> Self {
        Error::Precondition(message.into())
    }

    pub fn undetermined(message: impl Into<String>) -> Self {
        Error::Undetermined(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
