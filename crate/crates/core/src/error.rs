use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid function spec: {0}")]
    InvalidSpec(String),

    #[error("zero or pole of f on the continuation path near {at}")]
    ZeroOrPoleOnPath { at: Complex64 },

    #[error("point {at} lies outside the open unit disc")]
    OutsideDisc { at: Complex64 },

    #[error("f has a zero or pole at {at}")]
    PoleOrZeroAt { at: Complex64 },

    #[error("pole at {pole} lies inside the claimed tract")]
    TractViolation { pole: Complex64 },

    #[error("no closed-form growth oracle for this function")]
    NoOracle,

    #[error("{what}: value {value} outside the admissible domain")]
    DomainError { what: &'static str, value: f64 },

    #[error("insufficient data: need {needed} samples, have {have}")]
    InsufficientData { needed: usize, have: usize },

    #[error("base configuration never attained on the sampled grid")]
    NeverAttained,

    #[error("positive-order window rejected ({reason}); diagnostic = {diagnostic}")]
    WindowRejected { diagnostic: f64, reason: String },

    #[error("sampled function is not monotone at x = {x}")]
    NotMonotone { x: f64 },

    #[error("radius r = {r} lies in the exceptional set")]
    ExceptionalRadius { r: f64 },

    #[error("order estimate {order} is not in the zero-order regime")]
    NotZeroOrder { order: f64 },

    #[error("central index {index} exceeds half the truncation degree {degree}")]
    TruncationDominates { index: usize, degree: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("export failed: {0}")]
    Export(String),
}
