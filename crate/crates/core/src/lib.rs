//! Metropolis Monte Carlo for Lennard-Jones fluids with quantum corrections
//! to the classical grand potential.
//!
//! Corrections come in two kinds. Non-commutativity corrections through
//! O(ħ⁴) are computed as classical averages by three expansions (A, B, C).
//! Wave-function symmetrization enters through dimer and trimer permutation
//! loops. All quantities are in reduced Lennard-Jones units.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod error;
pub mod estimators;
pub mod fields;
pub mod mc;
pub mod momentum;
pub mod oracle;
pub mod persist;
pub mod potential;
pub mod stats;
pub mod system;
pub mod units;

pub use error::{Error, Result};
