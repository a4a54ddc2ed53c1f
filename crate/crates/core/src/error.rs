//! Error type shared by every fallible operation in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("joint dimension {dim} exceeds configured maximum {max}")]
    DimensionOverflow { dim: usize, max: usize },

    #[error("truncation tail mass {tail:.3e} exceeds tolerance {tol:.3e}; raise the cutoff")]
    TruncationTail { tail: f64, tol: f64 },

    #[error("matrix is not Hermitian: max |a - a†| = {residual:.3e} > {tol:.3e}")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("matrix is not positive semidefinite within {tol:.3e} (witness {witness:.3e})")]
    NotPositive { witness: f64, tol: f64 },

    #[error("trace {trace:.12} deviates from 1 by more than {tol:.3e}")]
    TraceNotOne { trace: f64, tol: f64 },

    #[error("state norm² {norm_sqr:.12} deviates from 1 by more than {tol:.3e}")]
    NotNormalized { norm_sqr: f64, tol: f64 },

    #[error("invalid prior: {reason}")]
    InvalidPrior { reason: &'static str },

    #[error("quadrature resolution {got} too low; need at least {required}")]
    ResolutionTooLow { required: usize, got: usize },

    #[error(
        "lattice size {d} must be odd (the relative/center relabeling needs 2 invertible mod d)"
    )]
    EvenLatticeSize { d: usize },

    #[error("reference mode amplitude must be nonzero")]
    ZeroReferenceAmplitude,

    #[error("embedding loss {loss:.3e} exceeds tail tolerance {tol:.3e}; raise rel_cutoff")]
    EmbeddingLoss { loss: f64, tol: f64 },

    #[error("expectation value has imaginary residue {imag:.3e} beyond 1e-10")]
    ImaginaryResidue { imag: f64 },

    #[error("density matrix is over the {actual} basis, operation needs {expected}")]
    BasisMismatch {
        expected: crate::density::BasisLabel,
        actual: crate::density::BasisLabel,
    },
}
