use thiserror::Error;

/// Errors produced by the generator calculus, integrators and pipelines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite state produced by primitive {index} of the chain")]
    ChainBlowUp { index: usize },

    #[error("flow blow-up: non-finite state at t = {time}")]
    FlowBlowUp { time: f64 },

    #[error("non-finite derivative at t = {time}")]
    NonFiniteDerivative { time: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("extremizer failure: {0}")]
    Extremizer(String),

    #[error("empty domain")]
    EmptyDomain,

    #[error("quadratic part is not positive definite (coordinate {coord}, coefficient {coefficient})")]
    NotPositiveDefinite { coord: usize, coefficient: f64 },

    #[error("loop closure failed: residual {residual:e} exceeds {tolerance:e}")]
    LoopClosure { residual: f64, tolerance: f64 },

    #[error("disjoiner configuration error: {0}")]
    DisjoinConfig(String),

    #[error("containment violated: {0}")]
    Containment(String),

    #[error("disjointness check failed: {0}")]
    Disjointness(String),

    #[error("commutation check failed: {0}")]
    Commutation(String),

    #[error("support leakage: {0}")]
    SupportLeakage(String),

    #[error("neighbourhood condition {condition} violated: {detail}")]
    DCondition { condition: usize, detail: String },

    #[error("finite-difference step {0:e} underflows")]
    StepUnderflow(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
