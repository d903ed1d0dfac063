use thiserror::Error;

/// Everything that can go wrong while loading a chart or computing on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("metric is not symmetric: g[{i}][{j}] = {gij} but g[{j}][{i}] = {gji}")]
    Symmetry { i: usize, j: usize, gij: f64, gji: f64 },

    #[error("metric index is not constant: found {first} and {second}")]
    NonConstantIndex { first: usize, second: usize },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("point {point:?} lies outside the chart domain")]
    OutOfChart { point: Vec<f64> },

    #[error("tangent vectors are attached to different base points")]
    BasePointMismatch,

    #[error("finite-difference step {step} leaves the chart domain at {point:?}")]
    StepTooLarge { step: f64, point: Vec<f64> },

    #[error("parameter {t} lies outside the interval [{lo}, {hi}]")]
    OutOfInterval { t: f64, lo: f64, hi: f64 },

    #[error("integration needs {needed} steps, more than the limit of {max_steps}")]
    MaxSteps { needed: usize, max_steps: usize },

    #[error("frame is singular (determinant {det})")]
    SingularFrame { det: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = GeomError> = std::result::Result<T, E>;
