//! Numerical laboratory for noise-robust quantum metrology.
//!
//! The crate estimates a phase `theta` imprinted by `exp(-i theta Z)` on
//! every qubit of a chain, followed by single-qubit Pauli noise, and
//! compares concrete measurement protocols against the dephasing QFI bound.
//!
//! * [`pauli`] and [`channels`]: exact Pauli-string algebra and channel duals.
//! * [`smallsys`]: dense states, QFI, moment and classical Fisher information.
//! * [`parity`]: GHZ-block (quantum parity) strategies.
//! * [`protocols`]: local circuits, the Loschmidt echo and time-reversal observables.
//! * [`domino`]: domain-wall sector simulation of the domino Hamiltonian.
//! * [`squeezing`]: collective-spin states and squeezing diagnostics.
//!
//! Sweeps go through [`exec::map_cells`], which uses rayon unless the
//! `parallel` feature is disabled.

pub mod channels;
pub mod chebyshev;
pub mod domino;
pub mod error;
pub mod exec;
pub mod oracle;
pub mod parity;
pub mod pauli;
pub mod protocols;
pub mod random;
pub mod smallsys;
pub mod squeezing;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};

/// Largest register for which dense matrices are built.
pub const MAX_DENSE_QUBITS: usize = 14;
