use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Bad user input: non-finite values, malformed descriptors, overlapping boxes.
    #[error("invalid input: {0}")]
    Input(String),
    /// A point or configuration lies outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),
    /// Matrix or configuration sizes do not fit together.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// The operation needs a density family the model does not have.
    #[error("model mismatch: {0}")]
    ModelMismatch(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A computed quantity violated an algebraic invariant.
    #[error("internal consistency: {0}")]
    Consistency(String),
    #[error("geometry: {0}")]
    Geometry(String),
    /// The requested integration backend cannot handle this integral.
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    /// Monte Carlo proposal produced no usable samples.
    #[error("sampling diagnostics: {0}")]
    Diagnostics(String),
}

pub type Result<T> = std::result::Result<T, Error>;
