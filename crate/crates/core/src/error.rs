use thiserror::Error;

/// Errors raised by the model, timeline, flow and estimator layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    /// A transversal coordinate or other argument lies outside its chart.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("chart exit: intermediate coordinate {coordinate} is not below 1")]
    ChartExit { coordinate: f64 },

    #[error("contraction violated: next coordinate {next} is not below {current}")]
    Contraction { current: f64, next: f64 },

    /// Model parameters break a structural invariant (for example Λ ≤ 1).
    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("step too large: oracle missed tolerance ({0})")]
    StepTooLarge(String),

    #[error("horizon error: {0}")]
    Horizon(String),

    #[error("insufficient events: need {needed}, have {have}")]
    InsufficientEvents { needed: usize, have: usize },

    #[error("wrong model kind: expected {expected}")]
    WrongModel { expected: &'static str },

    #[error("seeds are not interleaved: {0}")]
    Interleaving(String),

    #[error("parameter {value} outside arc [{lo}, {hi}]")]
    OutOfArc { value: f64, lo: f64, hi: f64 },

    #[error("strips overlap or touch the northern arc: {0}")]
    StripOverlap(String),

    #[error("step failure at depth {xi}: step size underflow")]
    StepFailure { xi: f64 },

    #[error("range error: {0}")]
    Range(String),

    #[error("attractor hierarchy violated: {0}")]
    Hierarchy(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
