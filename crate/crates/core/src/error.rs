use thiserror::Error;

use crate::network::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid network:\n{0}")]
    InvalidNetwork(ValidationReport),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("variable `{variable}` has no state `{state}`")]
    UnknownState { variable: String, state: String },

    #[error("assignment does not fix every variable (missing `{0}`)")]
    IncompleteAssignment(String),

    #[error("impossible evidence: every consistent basis state has probability zero")]
    ImpossibleEvidence,

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("phase {0} is not finite")]
    NonFinitePhase(f64),

    #[error("degenerate interference: every outcome of `{0}` has zero weight")]
    DegenerateInterference(String),

    #[error("target probability {0} must lie strictly between 0 and 1")]
    InvalidTarget(f64),

    #[error("target {target} is unreachable; attainable interval is [{min:.6}, {max:.6}]")]
    UnreachableTarget { target: f64, min: f64, max: f64 },

    #[error("root search did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("action `{0}` has no classical support")]
    NoClassicalSupport(String),

    #[error(
        "utility operator for `{action}` is nonzero on basis state {index}, which is inconsistent with the action"
    )]
    InconsistentOperator { action: String, index: usize },

    #[error("no utility operator for action `{0}`")]
    MissingOperator(String),

    #[error("utility operator for `{0}` given more than once")]
    DuplicateOperator(String),

    #[error("non-finite utility value {0}")]
    NonFiniteUtility(f64),

    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),

    #[error("resolution must be at least 2, got {0}")]
    InvalidResolution(usize),

    #[error("belief-space sweeps need a decision with exactly two actions, `{variable}` has {count}")]
    NotBinaryDecision { variable: String, count: usize },
}
