//! Exact simulation and stochastic-gradient training of quantum Boltzmann
//! machines for ground-state energy estimation.
//!
//! The library evaluates parameterized thermal states ρ(θ) = e^{-G(θ)}/Z(θ)
//! exactly at small qubit counts, applies the belief-propagation channel via
//! its spectral filter, computes analytic gradients and Hessians of the
//! energy f(θ) = Tr[Hρ(θ)], simulates the shot-based gradient estimators
//! distribution-exactly, and runs the SGD trainer with its derived
//! hyperparameters and sample-complexity accounting.

pub mod circuit;
pub mod cli;
pub mod error;
pub mod pauli;
pub mod sampling;
pub mod sgd;
pub mod thermal;

pub use error::{Error, Result};
pub use pauli::{expectation, CMatrix, PauliString, Term, WeightedPauliSum};
pub use sampling::{abs_t_mean_oracle, fourier_oracle, pdf, HighPeakTentSampler};
pub use thermal::{Ansatz, ThermalState};
