//! Crate-wide error type.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum EngineError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("negative exponent in moment request")]
    NegativeExponent,

    #[error("field has nonzero flat-normal components; variation formulas cover only sphere-normal parts")]
    NonzeroZComponent,

    #[error("ambient dimension too small: need N >= {needed}, got {got}")]
    AmbientTooSmall { needed: u32, got: u32 },

    #[error("singular Gram matrix in projection (internal error)")]
    SingularGram,

    #[error("singular linear system in corrector solve")]
    SingularSystem,

    #[error("metric not positive definite at sample point {point:?}; perturbation too large")]
    MetricNotPositive { point: Vec<f64> },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("step size underflow in flow integration at tau = {tau}")]
    StepUnderflow { tau: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}
