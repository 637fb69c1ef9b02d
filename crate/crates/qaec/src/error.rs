//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by simulator operations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Operand dimensions are incompatible.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// An argument violates a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A register would exceed the configured maximum size.
    #[error("register of {requested} qubits exceeds the maximum of {max}")]
    RegisterTooLarge { requested: usize, max: usize },
    /// A matrix fails the density-matrix or unitarity invariants.
    #[error("invalid quantum state: {0}")]
    InvalidState(String),
    /// Noise parameters admit no valid probability distribution.
    #[error("infeasible parameters: {0}")]
    InfeasibleParameters(String),
    /// A probed channel behaved inconsistently (e.g. non-linearly).
    #[error("channel consistency: {0}")]
    ChannelConsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
