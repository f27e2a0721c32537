//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed textual input (Pauli words, Hamiltonian files, config files).
    #[error("parse error: {0}")]
    Parse(String),

    /// Operands act on different Hilbert spaces.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Requested qubit count exceeds the dense-matrix limit.
    #[error("qubit count {n} exceeds the dense-matrix maximum {max}")]
    TooManyQubits { n: usize, max: usize },

    /// A numerical routine produced an untrustworthy result.
    #[error("numerical fault: {0}")]
    Numerical(String),

    /// Adaptive quadrature failed to reach the requested tolerance.
    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),

    /// A caller-supplied value is outside its admissible range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// I/O failure while reading inputs or writing outputs.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 config/input, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::InvalidArgument(_) | Error::Io(_) => 2,
            Error::DimensionMismatch(_)
            | Error::TooManyQubits { .. }
            | Error::Numerical(_)
            | Error::QuadratureNonConvergence(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
