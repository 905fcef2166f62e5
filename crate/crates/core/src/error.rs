use crate::markov::RelativeDegree;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("system is not square: {inputs} inputs, {outputs} outputs")]
    NonSquare { inputs: usize, outputs: usize },

    #[error("transition product requires j >= i, got j = {j}, i = {i}")]
    InvalidTransition { j: usize, i: usize },

    #[error(
        "structure violation at ({row}, {col}): |entry| = {magnitude:e} exceeds bound {bound:e}"
    )]
    StructureViolation {
        row: usize,
        col: usize,
        magnitude: f64,
        bound: f64,
    },

    #[error("relative degree mismatch: expected {expected}, detected {found}")]
    RelativeDegreeMismatch {
        expected: String,
        found: RelativeDegree,
    },

    #[error("periodic Markov parameter is singular at phase {phase}")]
    SingularMarkov { phase: usize },

    #[error("unsupported structure ({found}): {message}")]
    UnsupportedStructure {
        found: RelativeDegree,
        message: String,
    },

    #[error("Markov factorization mismatch: max deviation {deviation:e}")]
    FactorizationMismatch { deviation: f64 },

    #[error("non-finite value at step {step}")]
    NonFinite { step: usize },

    #[error("state norm {norm:e} exceeded divergence guard at step {step}")]
    Divergence { step: usize, norm: f64 },

    #[error("insufficient output preview: need {needed} samples, got {available}")]
    InsufficientPreview { needed: usize, available: usize },

    #[error("horizon {horizon} too short for delay {delay}")]
    InsufficientHorizon { horizon: usize, delay: usize },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
