use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (most negative eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("trace is {trace}, expected 1")]
    TraceNotOne { trace: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("basis is not orthonormal (deviation {deviation:e})")]
    BasisNotOrthonormal { deviation: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid state at ({state},{input}): {source}")]
    InvalidState {
        state: String,
        input: String,
        #[source]
        source: Box<Error>,
    },

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("memory budget exceeded: {required} bytes required, budget is {budget} bytes")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("enumeration cap exceeded: {required} items requested, cap is {cap}")]
    CapExceeded { required: u128, cap: u128 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("projector factors do not commute (residual {residual:e})")]
    CommutatorNonzero { residual: f64 },

    #[error("operator is not an orthogonal projection (residual {residual:e})")]
    NotProjection { residual: f64 },

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("numerical rank failure: {0}")]
    NumericalRankFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
