//! The Cooper-pair sluice: an island between two flux-tunable SQUIDs, treated
//! in the two lowest charge states.

mod eigenframe;
mod multistate;
mod operators;
mod params;
mod schedule;

pub use eigenframe::{diagonalize, eigenframe, Diagonalization, Eigenframe, GaugeTwist};
pub use multistate::{oracle_multistate, MultiStateOracle};
pub use operators::{
    charge_coupling_op, current_operators, flux_coupling_op, hamiltonian, hamiltonian_rate,
    island_charge_op, number_op, squid_charge_ops,
};
pub use params::SluiceParams;
pub use schedule::{eval_schedule, sample_schedule, ControlPoint, PumpSchedule, ScheduleSample, Segment};
