//! Environment-induced synchronization of two detuned quantum harmonic
//! oscillators coupled, through their relative coordinate, to a common
//! zero-temperature bosonic bath.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: parameter set, mode transformation and initial coherent state.
//! * [`bath`]: spectral densities, the complex memory kernel, the self-energy
//!   of the localized mode, plus the special functions they need.
//! * [`coeffs`]: the Volterra integro-differential system for the propagator
//!   functions `u, v, w, x` and the linear mean-value prediction built on it.
//! * [`fockspace`]: truncated two-mode Fock space and density matrices.
//! * [`master`]: the exact time-local master equation, its propagation and
//!   entanglement diagnostics.
//! * [`analysis`]: DFT peak tracking, frequency-locking detection and sweeps.
//! * [`poles`]: the dissipationless pole, the critical coupling and the
//!   nonequilibrium phase diagram.
//!
//! All frequencies are in units of the mean bare frequency `omega0` and all
//! times in units of `1/omega0` unless stated otherwise.

pub mod analysis;
pub mod bath;
pub mod coeffs;
mod error;
pub mod fockspace;
pub mod master;
pub mod model;
pub mod poles;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
