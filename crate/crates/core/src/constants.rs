//! SI constants (2019 exact definitions where available).

use std::f64::consts::PI;

pub const PLANCK: f64 = 6.626_070_15e-34;
pub const HBAR: f64 = PLANCK / (2.0 * PI);
pub const E_CHARGE: f64 = 1.602_176_634e-19;
/// Superconducting flux quantum h/(2e) = πħ/e.
pub const FLUX_QUANTUM: f64 = PLANCK / (2.0 * E_CHARGE);
pub const K_B: f64 = 1.380_649e-23;

/// Cooper-pair charge magnitude, 2e.
pub const PAIR_CHARGE: f64 = 2.0 * E_CHARGE;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub e_charge: f64,
    pub flux_quantum: f64,
    pub k_b: f64,
}

impl PhysicalConstants {
    pub const SI: Self = Self {
        hbar: HBAR,
        e_charge: E_CHARGE,
        flux_quantum: FLUX_QUANTUM,
        k_b: K_B,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::SI
    }
}
