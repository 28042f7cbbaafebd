use thiserror::Error;

/// Errors raised by the library.
///
/// Numerical payloads are carried as `f64` regardless of the scalar type the
/// computation ran in, so the error type stays non-generic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: entry ({row}, {col}) deviates from its conjugate partner by {deviation:e}")]
    NotHermitian { row: usize, col: usize, deviation: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:e} below tolerance")]
    NotPsd { eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid stochastic matrix: {0}")]
    InvalidStochastic(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("derivative not representable on the support of the state: kernel block entry ({row}, {col}) has magnitude {magnitude:e}")]
    RankDeficient { row: usize, col: usize, magnitude: f64 },

    #[error("outcome {outcome} has probability {probability:e} but nonzero score numerator {numerator:e}; Fisher information is undefined")]
    SingularModel { outcome: usize, probability: f64, numerator: f64 },

    #[error("support of the Fisher matrix is not contained in the support of the reference matrix (leak {leak:e})")]
    InfeasibleAdjustment { leak: f64 },

    #[error("outcome product {product} exceeds the configured cap {cap}")]
    OutcomeCap { product: usize, cap: usize },

    #[error("solver did not converge after {iterations} iterations (primal {primal_objective}, dual {dual_objective}, gap {gap:e})")]
    NonConvergence {
        iterations: usize,
        primal_objective: f64,
        dual_objective: f64,
        gap: f64,
    },

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
