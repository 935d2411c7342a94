use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::K_B;
use crate::error::{Error, Result};

/// Device energies and the pumping frequency. Energies are in joules.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SluiceParams {
    pub e_c: f64,
    pub j_max: f64,
    pub j_min: f64,
    pub ng_min: f64,
    pub ng_max: f64,
    /// Static phase bias across the device, rad.
    pub phi0: f64,
    /// Pumping frequency, Hz.
    pub f_pump: f64,
    /// Dimensionless gate-charge noise coupling.
    pub lambda_charge: f64,
}

impl SluiceParams {
    /// E_C/k_B = 1 K, J^M/E_C = 0.1, J^m/J^M = 0.03, n_g ∈ [0.2, 0.8],
    /// φ0 = π/2, f = 150 MHz.
    pub fn reference() -> Self {
        let e_c = K_B;
        let j_max = 0.1 * e_c;
        Self {
            e_c,
            j_max,
            j_min: 0.03 * j_max,
            ng_min: 0.2,
            ng_max: 0.8,
            phi0: PI / 2.0,
            f_pump: 150e6,
            lambda_charge: 0.0,
        }
    }

    pub fn with_frequency(mut self, f_pump: f64) -> Self {
        self.f_pump = f_pump;
        self
    }

    pub fn e_c_kelvin(&self) -> f64 {
        self.e_c / K_B
    }

    /// Adiabatic period T_ad = 1/f.
    pub fn period(&self) -> f64 {
        1.0 / self.f_pump
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.e_c,
            self.j_max,
            self.j_min,
            self.ng_min,
            self.ng_max,
            self.phi0,
            self.f_pump,
            self.lambda_charge,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("sluice parameters must be finite".into()));
        }
        if self.e_c <= 0.0 {
            return Err(Error::Config(format!("E_C must be positive, got {}", self.e_c)));
        }
        if !(0.0 < self.j_min && self.j_min <= self.j_max) {
            return Err(Error::Config(format!(
                "need 0 < J_min <= J_max, got J_min = {:e}, J_max = {:e}",
                self.j_min, self.j_max
            )));
        }
        if self.e_c < 5.0 * self.j_max {
            return Err(Error::Config(format!(
                "charge regime requires E_C >= 5 J_max (E_C/J_max = {:.3})",
                self.e_c / self.j_max
            )));
        }
        if !(0.0 < self.ng_min && self.ng_min < 0.5 && 0.5 < self.ng_max && self.ng_max < 1.0) {
            return Err(Error::Config(format!(
                "gate range must straddle 1/2 inside (0, 1), got [{}, {}]",
                self.ng_min, self.ng_max
            )));
        }
        if self.f_pump <= 0.0 {
            return Err(Error::Config(format!("pump frequency must be positive, got {}", self.f_pump)));
        }
        Ok(())
    }
}

impl Default for SluiceParams {
    fn default() -> Self {
        Self::reference()
    }
}
