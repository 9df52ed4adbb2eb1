use thiserror::Error;

/// Errors raised by matrix kernels and by validated state constructors.
///
/// Validation failures carry the name of the violated invariant together with
/// the measured residual so that randomized campaigns can report *how far* an
/// input was from being admissible.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("entry count {got} does not match a {rows}x{cols} matrix")]
    BadEntryCount { rows: usize, cols: usize, got: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian: residual {residual:e} exceeds {tol:e}")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("{kind}: invariant `{invariant}` violated (residual {residual:e})")]
    Invariant {
        kind: &'static str,
        invariant: &'static str,
        residual: f64,
    },

    #[error("vector is not normalized: | |v| - 1 | = {residual:e}")]
    NormViolation { residual: f64 },

    #[error("projector is not diagonal in the working basis (off-diagonal residual {residual:e})")]
    NotDiagonalBasis { residual: f64 },

    #[error("spectrum is not a probability distribution: {0}")]
    NotADistribution(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid entropy functional: {0}")]
    InvalidFunctional(String),

    #[error("wrong document kind: expected `{expected}`, found `{found}`")]
    WrongKind { expected: &'static str, found: String },
}

pub type Result<T> = std::result::Result<T, Error>;
