//! Quantum Drude oscillator (QDO) models on qubit registers.
//!
//! The crate covers the full path from a coarse-grained oscillator model to a
//! dispersion energy estimated on a (simulated) noisy quantum device:
//!
//! - [`pauli`] and [`encoding`]: Pauli-string algebra and the binary Fock-state
//!   encoding of truncated bosonic operators.
//! - [`model`]: dipole-coupled oscillator Hamiltonians, 3D pair reduction and
//!   anharmonic / non-linear extensions.
//! - [`grouping`]: exact qubit-wise commuting groups built from a round-robin
//!   1-factorisation of the coupling graph, plus a greedy colouring heuristic.
//! - [`shots`]: optimal shot allocation and the closed-form shot bounds.
//! - [`sim`] and [`vqe`]: state-vector simulation, sampling with global
//!   depolarising noise, parameter-shift gradients and ADAM.
//! - [`oracle`]: dense exact diagonalisation and analytic London-dispersion
//!   references.
//!
//! Energies are dimensionless in units of `hbar*omega/2` unless a function
//! says otherwise.

pub mod encoding;
pub mod error;
pub mod grouping;
pub mod model;
pub mod oracle;
pub mod pauli;
pub mod pipeline;
pub mod shots;
pub mod sim;
pub mod vqe;

pub use error::{Error, Result};
pub use pauli::{Pauli, PauliString, PauliSum};
