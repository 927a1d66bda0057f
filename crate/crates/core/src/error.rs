use thiserror::Error;

use crate::geometry::SpaceId;

/// Errors raised by the geometric backends and the estimators built on them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("points live in different spaces: {left:?} vs {right:?}")]
    SpaceMismatch { left: SpaceId, right: SpaceId },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{name} = {value} is outside its admissible range")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("invalid point: {rule}")]
    InvalidPoint { rule: String },

    #[error("transport source curve is constant; its distribution function is not invertible")]
    DegenerateTransport,

    #[error("tangent direction vanished at the transported point (norm {norm:e})")]
    DegenerateTangent { norm: f64 },

    #[error("empty input")]
    EmptyInput,

    #[error("need at least {needed} samples, found {found}")]
    InsufficientSamples { needed: usize, found: usize },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("iterative mean did not converge after {iterations} iterations (tangent norm {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("group `{group}` is empty at period {period}")]
    EmptyGroup { group: String, period: usize },

    #[error("comparison cohort is empty at period {period}")]
    EmptyCohort { period: usize },

    #[error("cell (g={g}, t={t}) is not admissible: {reason}")]
    InadmissibleCell { g: usize, t: usize, reason: String },

    #[error("geodesic classes were built with different reference points")]
    ReferenceMismatch,

    #[error("invalid panel: {0}")]
    InvalidPanel(String),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("regression needs at least two distinct abscissae")]
    DegenerateRegression,
}

pub type Result<T> = std::result::Result<T, Error>;
