//! Compile Pauli-string Hamiltonians into exact attachment pulse schedules and
//! verify them, together with toric-code lattices built from those schedules.

pub mod analysis;
pub mod anyon;
pub mod dense;
pub mod error;
pub mod lattice;
pub mod pauli;
pub mod propagator;
pub mod schedule;

pub use error::{QsaError, Result};
pub use pauli::{Pauli, PauliOperator, PauliString, WeightedPauliSum};
