use thiserror::Error;

/// Errors raised by the operator-integral engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian: |M[{row},{col}] - conj(M[{col},{row}])| = {asymmetry:e}")]
    NotHermitian {
        row: usize,
        col: usize,
        asymmetry: f64,
    },

    #[error("matrix is not unitary: max |U*U - I| = {deviation:e}")]
    NotUnitary { deviation: f64 },

    #[error("non-finite entry at ({row},{col})")]
    NonFinite { row: usize, col: usize },

    #[error("eigensolver failed to converge (residual {residual:e})")]
    Eigensolver { residual: f64 },

    #[error("function undefined: {0}")]
    Domain(String),

    #[error("capability: {0}")]
    Capability(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("decomposition failed after {attempts} attempts (condition number {condition:e}): {detail}")]
    Decomposition {
        attempts: usize,
        condition: f64,
        detail: String,
    },

    #[error("schema: {0}")]
    Schema(String),

    #[error("{aborted} of {total} samples aborted (limit 1%): {first}")]
    TooManyAborted {
        aborted: usize,
        total: usize,
        first: String,
    },
}

impl Error {
    /// Errors that stem from malformed input rather than from a numerical
    /// computation going wrong.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Dimension(_)
                | Error::NotHermitian { .. }
                | Error::NotUnitary { .. }
                | Error::NonFinite { .. }
                | Error::Parameter(_)
                | Error::Schema(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
