use thiserror::Error;

use crate::bdd::BddError;
use crate::logic::LogicError;

/// Top-level error. [`Error::exit_code`] gives the documented CLI exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Bdd(#[from] BddError),
    #[error("BDD node cap of {cap} nodes exceeded while building the monolithic transition relation")]
    RelationCap { cap: usize },
    #[error("state budget of {budget} states exceeded (closure size {closure})")]
    StateBudget { budget: usize, closure: usize },
    #[error("state encoding needs {needed} bits, budget is {budget}")]
    EncodingOverflow { needed: usize, budget: usize },
    #[error("explicit graph would have {states} states, cap is {cap}")]
    ExplicitCap { states: usize, cap: usize },
    #[error("weakness violated: {0}")]
    NotWeak(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Logic(_) | Error::Format(_) => 2,
            Error::Bdd(_)
            | Error::RelationCap { .. }
            | Error::StateBudget { .. }
            | Error::EncodingOverflow { .. }
            | Error::ExplicitCap { .. } => 3,
            Error::Io(_) => 4,
            Error::NotWeak(_) | Error::Internal(_) => 5,
        }
    }

    /// True for the resource-exhaustion errors that benchmarks report as memout.
    pub fn is_budget(&self) -> bool {
        self.exit_code() == 3
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
