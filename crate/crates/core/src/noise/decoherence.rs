use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::constants::{FLUX_QUANTUM, HBAR};
use crate::error::{Error, Result};

/// τ = ħ²/(|⟨i|δH|j⟩|²·S) for a coupling matrix element in joules per unit
/// phase and a spectral density in seconds. Returns `f64::INFINITY` when
/// either factor vanishes.
pub fn decoherence_time(coupling_elem: f64, s_value: f64) -> f64 {
    let rate = coupling_elem * coupling_elem * s_value / (HBAR * HBAR);
    if rate > 0.0 {
        1.0 / rate
    } else {
        f64::INFINITY
    }
}

/// Amplitude of a 1/f flux-noise spectrum S_Φ(ω) = A_Φ/|ω|.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneOverFParams {
    /// A_Φ, Wb².
    pub a_flux: f64,
}

impl OneOverFParams {
    /// Amplitude given as a multiple of Φ0, A_Φ = (x·Φ0)².
    pub fn from_flux_quanta(x: f64) -> Self {
        let a = x * FLUX_QUANTUM;
        Self { a_flux: a * a }
    }

    /// A_φ = 4π²A_Φ/Φ0², dimensionless.
    pub fn a_phase(&self) -> f64 {
        4.0 * PI * PI * self.a_flux / (FLUX_QUANTUM * FLUX_QUANTUM)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DephasingEstimate {
    /// 1/s.
    pub gamma: f64,
    /// s; infinite when `gamma` is zero.
    pub tau: f64,
}

/// Gaussian-decay dephasing rate Γ = √(A_φ·ln 2)·|∂Ω/∂φ|.
pub fn one_over_f_dephasing(p: &OneOverFParams, d_omega_dphi: f64) -> Result<DephasingEstimate> {
    if !(p.a_flux >= 0.0) {
        return Err(Error::Argument(format!("A_flux must be non-negative, got {}", p.a_flux)));
    }
    if !(d_omega_dphi >= 0.0) {
        return Err(Error::Argument(format!("|dΩ/dφ| must be non-negative, got {d_omega_dphi}")));
    }
    let gamma = (p.a_phase() * LN_2).sqrt() * d_omega_dphi;
    let tau = if gamma > 0.0 { 1.0 / gamma } else { f64::INFINITY };
    Ok(DephasingEstimate { gamma, tau })
}

/// |∂Ω/∂φ| at the charge degeneracy, where ħΩ = √(J_R² + J_L² + 2J_RJ_L cos φ).
pub fn gap_phase_slope(j_l: f64, j_r: f64, phi: f64) -> f64 {
    let omega = (j_r * j_r + j_l * j_l + 2.0 * j_r * j_l * phi.cos()).sqrt() / HBAR;
    if omega == 0.0 {
        return 0.0;
    }
    (j_r * j_l * phi.sin()).abs() / (HBAR * HBAR * omega)
}
