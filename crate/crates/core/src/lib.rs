//! Exact and perturbative error analysis of rf pulse protocols on
//! Ising-coupled nuclear-spin chains.
//!
//! * [`chain`]: basis-state energies and transition frequencies.
//! * [`protocol`]: the remote CONTROL-NOT pulse train and its detunings.
//! * [`evolution`]: exact (Chebyshev) and 2×2-block state-vector propagation.
//! * [`perturbation`]: closed-form error estimates.
//! * [`harness`]: unwanted-state probability, sweeps, CSV output.

pub mod chain;
pub mod error;
pub mod evolution;
pub mod harness;
pub mod perturbation;
pub mod protocol;

pub use chain::{BasisState, ChainParams};
pub use error::{Error, Result};
