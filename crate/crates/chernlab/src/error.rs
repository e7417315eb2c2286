//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChernError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("metric matrix is singular or not positive definite")]
    SingularMetric,

    #[error("matrix is not Hermitian: deviation {deviation:.3e} exceeds {tol:.3e}")]
    NonHermitian { deviation: f64, tol: f64 },

    #[error("trace has imaginary part {imag:.3e}, input eta is corrupt")]
    NonRealTrace { imag: f64 },

    #[error("point outside chart domain: {0}")]
    OutsideDomain(String),

    #[error("jet order {0} unsupported (maximum is 2)")]
    UnsupportedJetOrder(u8),

    #[error("insufficient jet order for this operation: need {need}, have {have}")]
    InsufficientJetOrder { need: u8, have: u8 },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("perturbed metric not positive definite at step {dt:.3e}")]
    StepNotPositive { dt: f64 },

    #[error("kernel validation failed for {what}: residual {residual:.3e} > {tol:.3e}")]
    KernelValidation {
        what: String,
        residual: f64,
        tol: f64,
    },

    #[error("unknown {kind} '{given}'; valid names: {valid}")]
    UnknownName {
        kind: String,
        given: String,
        valid: String,
    },

    #[error("internal cross-check '{what}' failed: defect {defect:.3e} > {tol:.3e}")]
    CrossCheckFailed {
        what: String,
        defect: f64,
        tol: f64,
    },

    #[error("nothing to run: {0}")]
    NothingToRun(String),
}

pub type Result<T> = std::result::Result<T, ChernError>;
