use std::fmt;

/// Failures mapped onto process exit codes.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Scenario does not match the schema, or flags conflict with it. Exit 2.
    Schema(String),
    /// A numerical check failed; the message names the invariant. Exit 1.
    Invariant(String),
    /// The numerical core rejected valid-looking input. Exit 1.
    Runtime(String),
    /// Exit 1.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Schema(m) => write!(f, "schema error {m}"),
            CliError::Invariant(m) => write!(f, "invariant failed: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<excite_core::Error> for CliError {
    fn from(e: excite_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
