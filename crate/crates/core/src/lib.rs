//! Numerical laboratory for Gibbs states of parent Hamiltonians of shallow
//! quantum circuits: Davies-generator thermalization, noisy IQP sampling,
//! and classical fault-tolerance gadgets, all at dense small-instance scale.

pub mod bits;
pub mod circuit;
pub mod dense;
pub mod distill;
pub mod error;
pub mod hamiltonian;
pub mod lindblad;
pub mod linalg;
pub mod markov;
pub mod noise;
pub mod pauli;
pub mod repcode;
pub mod superop;

pub use error::{Error, Result};
