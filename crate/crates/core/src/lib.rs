//! Open-system dynamics of a few Heisenberg-coupled SQUID qubits exchanging
//! angular momentum with a transverse phonon bath.
//!
//! The pipeline is
//!
//! 1. [`spin_chain`]: build and diagonalize the chain Hamiltonian, express the
//!    interaction operators `X_j = σ_j^z` in the energy eigenbasis and split
//!    them into frequency components.
//! 2. [`bath`]: evaluate the (volume-free) effective spectral density, the
//!    thermal functions and the Markov diffusion/damping constants.
//! 3. [`redfield`]: assemble the transition rates and the secular
//!    interaction-picture generator for the density-matrix elements.
//! 4. [`dynamics`]: integrate the generator, build Gibbs states, and monitor
//!    state invariants.
//! 5. [`entanglement`]: two-qubit concurrence, entanglement of formation, and
//!    coherence decay fits.
//! 6. [`scenario`]: config parsing, figure presets, batch runs, CSV output.
//!
//! Internal units are `ħ = 1` with angular frequencies in rad/ns and times in
//! ns. Configuration inputs are frequencies `E/h` in GHz.

pub mod bath;
pub mod dynamics;
pub mod entanglement;
mod error;
pub mod linalg;
pub mod par;
pub mod redfield;
pub mod scenario;
pub mod spin_chain;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64;
