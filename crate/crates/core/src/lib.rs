//! Cooper-pair pumping in a superconducting sluice coupled to an engineered
//! flux-noise environment.
//!
//! The crate is split along the physics:
//!
//! * [`sluice`] – device parameters, control waveforms, the two-state
//!   Hamiltonian, its instantaneous eigenframe and the current/charge/coupling
//!   operators.
//! * [`noise`] – the tunable noise circuit: impedances, spectral densities,
//!   resonance features and decoherence estimates.
//! * [`dissipator`] – the non-secular master equation in the (super)adiabatic
//!   frame, its RK4 integrator and the cyclic steady-state driver.
//! * [`observables`] – current decomposition, dissipative currents and
//!   per-cycle charges.
//! * [`lzs`] – Landau–Zener–Stückelberg excitation estimates.

pub mod constants;
pub mod dissipator;
pub mod error;
pub mod lzs;
pub mod noise;
pub mod observables;
pub mod operator;
pub mod sluice;

pub use error::{Error, Result};
pub use operator::OperatorMatrix;
