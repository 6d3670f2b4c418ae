//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by matrix construction, channel operations, certification,
/// and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian: max |M - M†| = {defect:.3e} exceeds {tol:.3e}")]
    NotHermitian { defect: f64, tol: f64 },

    #[error("matrix is not a density matrix: {0}")]
    NotAState(String),

    #[error("matrix entries must be finite, found {0}")]
    NonFinite(String),

    #[error("matrix is not positive semidefinite: minimum eigenvalue {0:.6e}")]
    NotPsd(f64),

    #[error("matrix is not unitary: max |UU† - I| = {0:.3e}")]
    NotUnitary(f64),

    #[error("eigensolver failed to converge: {0}")]
    EigenFailure(String),

    #[error("no fixed point: smallest residual of Φ(ρ)=ρ is {0:.6e}, above tolerance {1:.3e}")]
    NoFixedPoint(f64, f64),

    #[error("fixed direction has near-zero trace ({0:.3e}); cannot normalize to a state")]
    TracelessFixedPoint(f64),

    #[error("completion overlap ⟨v_max|B|v_max⟩ = {overlap:.12} exceeds λ_max = {lambda_max:.12}")]
    ValidityCondition { overlap: f64, lambda_max: f64 },

    #[error("input state outside the channel domain: overlap ratio p = {0:.12} exceeds 1")]
    DomainViolation(f64),

    #[error("channel is not in the stabilizing family: {0}")]
    NotInFamily(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("search budget exhausted without a feasible point")]
    BudgetExhausted,

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit-code contract shared by the CLI and the C API: 1 verification
    /// failed, 2 invalid input, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Json(_)
            | Error::Io(_)
            | Error::DimensionMismatch(_)
            | Error::NotHermitian { .. }
            | Error::NotAState(_)
            | Error::NonFinite(_)
            | Error::NotPsd(_)
            | Error::NotUnitary(_)
            | Error::InvalidWeights(_)
            | Error::InvalidArgument(_)
            | Error::ValidityCondition { .. }
            | Error::DomainViolation(_) => 2,
            Error::EigenFailure(_)
            | Error::BudgetExhausted
            | Error::NoFixedPoint(..)
            | Error::TracelessFixedPoint(_) => 3,
            Error::NotInFamily(_) => 1,
        }
    }
}
