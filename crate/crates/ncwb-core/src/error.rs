//! Crate error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |A[i][j] - conj(A[j][i])| = {deviation:.3e} exceeds {tol:.3e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("value {value} outside [{lo}, {hi}] beyond tolerance {tol:.3e}")]
    OutOfRange {
        value: f64,
        lo: f64,
        hi: f64,
        tol: f64,
    },

    #[error("operator is not an effect: eigenvalue {eigenvalue} outside [0, 1] beyond {tol:.3e}")]
    NotEffect { eigenvalue: f64, tol: f64 },

    #[error("operator is not a density operator: {0}")]
    NotDensity(String),

    #[error("effects do not sum to identity: max deviation {deviation:.3e} exceeds {tol:.3e}")]
    NotResolution { deviation: f64, tol: f64 },

    #[error("map is not column-stochastic: {0}")]
    NotStochastic(String),

    #[error("invalid outcome partition: {0}")]
    InvalidPartition(String),

    #[error("invalid mixing weights: {0}")]
    WeightError(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("label mismatch: {0}")]
    LabelMismatch(String),

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("assignment problem is not projective: effect {index} fails the projector test")]
    NotProjective { index: usize },

    #[error("invalid valuation: {0}")]
    InvalidValuation(String),

    #[error("invalid assignment problem: {0}")]
    InvalidProblem(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid theory: {0}")]
    InvalidTheory(String),

    #[error("construction failure: {0}")]
    ConstructionFailure(String),
}
