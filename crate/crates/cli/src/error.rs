use thiserror::Error;

/// A failed run, carrying the process exit code it maps to.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or malformed input (exit 1).
    #[error("{0}")]
    Input(String),
    /// Input that parses but violates a documented precondition (exit 2).
    #[error("{0}")]
    Precondition(String),
    /// A verification ran and failed (exit 3).
    #[error("{0}")]
    Verification(String),
    /// An iteration did not converge (exit 4).
    #[error("{0}")]
    NonConvergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Input(_) => 1,
            Self::Precondition(_) => 2,
            Self::Verification(_) => 3,
            Self::NonConvergence(_) => 4,
        }
    }
}

impl From<gravikern::Error> for CliError {
    fn from(e: gravikern::Error) -> Self {
        use gravikern::Error as E;
        match e {
            E::Format(_) | E::Json(_) | E::Io(_) => Self::Input(e.to_string()),
            E::Singular { .. } => Self::NonConvergence(e.to_string()),
            E::Domain(_) | E::Precondition(_) | E::InvalidIndex { .. } => Self::Precondition(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
