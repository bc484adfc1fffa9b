use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value is rejected (caps, sizes, flags).
    #[error("configuration error: {0}")]
    Config(String),

    /// A documented precondition does not hold for the inputs.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The detuning vanishes where a finite detuning is required.
    #[error("resonance: {0}")]
    Resonance(String),

    /// A symbolic coefficient grew past the term cap.
    #[error("term limit exceeded: {terms} terms (cap {cap})")]
    TermLimit { terms: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
