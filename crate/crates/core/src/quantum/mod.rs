//! Dense state-vector algebra for small multi-qubit systems.
//!
//! Qubit 0 is the most significant bit of an amplitude index. Every
//! multi-qubit object in the crate (tensor products, gate targets, partial
//! traces) follows that convention, so `|q0 q1 ... q(k-1)>` has index
//! `q0 * 2^(k-1) + ... + q(k-1)`.

mod density;
mod state;
mod unitary;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use density::DensityMatrix;
pub use num_complex::Complex64;
pub use state::StateVector;
pub use unitary::Unitary;

/// Tolerance for state algebra: norms, unitarity, hermiticity.
pub const STATE_TOLERANCE: f64 = 1e-10;

/// Tolerance for aggregate checks built out of many state operations.
pub const AGGREGATE_TOLERANCE: f64 = 1e-9;

/// Largest joint system the simulator accepts.
pub const MAX_QUBITS: usize = 12;

/// Preparation / measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    /// Computational basis `{|0>, |1>}`.
    Z,
    /// Hadamard basis `{|+>, |->}`.
    X,
}

impl std::fmt::Display for Basis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Basis::Z => f.write_str("Z"),
            Basis::X => f.write_str("X"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("{0} qubits exceeds the simulator limit of {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("matrix is not unitary (max |U^dagger U - I| = {0:e})")]
    NotUnitary(f64),
    #[error("invalid qubit targets {targets:?} for a {num_qubits}-qubit state")]
    InvalidTargets { targets: Vec<usize>, num_qubits: usize },
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
}

pub type Result<T> = std::result::Result<T, QuantumError>;

/// Returns `log2(len)` when `len` is a nonzero power of two.
pub(crate) fn log2_exact(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(QuantumError::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros() as usize)
}

/// Bit position of `qubit` inside an index over `num_qubits` qubits.
#[inline]
pub(crate) fn bit_position(qubit: usize, num_qubits: usize) -> usize {
    num_qubits - 1 - qubit
}

pub(crate) fn validate_targets(targets: &[usize], num_qubits: usize) -> Result<()> {
    let mut seen = 0usize;
    for &t in targets {
        if t >= num_qubits || seen & (1 << t) != 0 {
            return Err(QuantumError::InvalidTargets {
                targets: targets.to_vec(),
                num_qubits,
            });
        }
        seen |= 1 << t;
    }
    Ok(())
}
