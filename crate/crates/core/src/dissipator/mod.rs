//! Bloch–Redfield dynamics of the two-level sluice in its adiabatic frame.
//!
//! States are stored in the instantaneous eigenbasis, so the coherent part is
//! diag(0, Ω) plus the frame connection w1 and the dissipator carries the
//! environment. Optionally the dissipator is built in the superadiabatic basis.

mod coupling;
mod integrator;
mod master;
mod rates;

pub use coupling::{CouplingSpec, OperatorFn};
pub use integrator::{
    CycleResult, GridNode, IntegratorConfig, Propagator, SteadyMethod, SteadyState, Trajectory, TrajectorySample,
    MAX_PHASE_PER_STEP,
};
pub use master::{coherent_part, dissipator_elements, rhs, DensityMatrix, DissipatorElements, Frame, Generator};
pub use rates::{build_rates, rates_from_samples, RateSet, SpectrumSamples};
