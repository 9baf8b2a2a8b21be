use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// A single violated configuration invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: &'static str,
    pub reason: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {}", join(.0))]
    InvalidConfig(Vec<Violation>),

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("Q = {q} exceeds the supported maximum of {max}: v_1 = Γ(Γ+1)^(Q-1) blows up the required transmit power")]
    LadderTooTall { q: usize, max: usize },

    #[error("outcome vector has {got} levels but the ladder has {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("level {level} is out of range 1..={q}")]
    LevelOutOfRange { level: usize, q: usize },

    #[error("exact enumeration supports Q <= {max} (got {q}); use `simulate` for larger Q")]
    StateSpaceTooLarge { q: usize, max: usize },

    #[error("truncation tolerance {epsilon:e} needs more than {max} terms per level")]
    TruncationInfeasible { epsilon: f64, max: usize },
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub(crate) fn arg(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}
