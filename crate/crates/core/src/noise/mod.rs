//! The engineered environment: a resistor R in series with an inductor L and
//! a control SQUID shunted by R_S ∥ C_S, inductively coupled (M) to the
//! sluice's phase-bias loop.

mod decoherence;
mod quadrature;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{E_CHARGE, FLUX_QUANTUM, HBAR};
use crate::error::{Error, Result};

pub use decoherence::{decoherence_time, gap_phase_slope, one_over_f_dephasing, DephasingEstimate, OneOverFParams};
pub use quadrature::{integrate, trapezoid, QuadResult};

/// Which zero-flux SQUID inductance to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum L0Convention {
    /// L_0 = ħ/(2πe·I_C).
    #[default]
    Reduced,
    /// L_0 = ħ/(2e·I_C), the usual Josephson inductance.
    Josephson,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvCircuitParams {
    /// Noise resistor, Ω.
    pub r: f64,
    /// SQUID shunt resistance, Ω.
    pub r_s: f64,
    /// SQUID shunt capacitance, F.
    pub c_s: f64,
    /// SQUID maximum critical current, A.
    pub i_c: f64,
    /// Series inductance, H.
    pub l: f64,
    /// Mutual inductance to the sluice loop, H. Zero detaches the environment.
    pub m: f64,
    /// Control flux in units of Φ0.
    pub phi_ctrl: f64,
    #[serde(default)]
    pub l0_convention: L0Convention,
}

impl Default for EnvCircuitParams {
    fn default() -> Self {
        Self {
            r: 30.0,
            r_s: 500.0,
            c_s: 50e-15,
            i_c: 25e-6,
            l: 0.69e-9,
            m: 0.69e-9,
            phi_ctrl: 0.0,
            l0_convention: L0Convention::Reduced,
        }
    }
}

impl EnvCircuitParams {
    pub fn with_phi(mut self, phi_ctrl: f64) -> Self {
        self.phi_ctrl = phi_ctrl;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let named = [("R", self.r), ("R_S", self.r_s), ("C_S", self.c_s), ("I_C", self.i_c), ("L", self.l)];
        for (name, v) in named {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.m >= 0.0 && self.m.is_finite()) {
            return Err(Error::Config(format!("M must be non-negative, got {}", self.m)));
        }
        if !self.phi_ctrl.is_finite() {
            return Err(Error::Config("control flux must be finite".into()));
        }
        Ok(())
    }

    /// Zero-flux SQUID inductance L_0, H.
    pub fn l0(&self) -> f64 {
        match self.l0_convention {
            L0Convention::Reduced => HBAR / (2.0 * PI * E_CHARGE * self.i_c),
            L0Convention::Josephson => HBAR / (2.0 * E_CHARGE * self.i_c),
        }
    }

    /// Prefactor 4π²M²/Φ0² converting flux noise to phase noise.
    fn phase_factor(&self) -> f64 {
        let k = 2.0 * PI * self.m / FLUX_QUANTUM;
        k * k
    }
}

/// L_S = L_0/cos(πφ), signed.
pub fn squid_inductance(env: &EnvCircuitParams) -> Result<f64> {
    let c = (PI * env.phi_ctrl).cos();
    if c.abs() <= 1e-12 {
        return Err(Error::InductancePole { phi_ctrl: env.phi_ctrl });
    }
    Ok(env.l0() / c)
}

/// Impedance of the shunted SQUID, from Y = 1/R_S + iωC_S + cos(πφ)/(iωL_0).
pub fn z_branch(omega: f64, env: &EnvCircuitParams) -> Complex64 {
    let inv_ls = (PI * env.phi_ctrl).cos() / env.l0();
    let y = Complex64::new(1.0 / env.r_s, omega * env.c_s - inv_ls / omega);
    y.inv()
}

/// Z_branch + R + iωL.
pub fn z_total(omega: f64, env: &EnvCircuitParams) -> Complex64 {
    z_branch(omega, env) + Complex64::new(env.r, omega * env.l)
}

/// Zero-temperature Johnson–Nyquist voltage noise of R, V²·s.
pub fn s_voltage(omega: f64, env: &EnvCircuitParams) -> f64 {
    if omega >= 0.0 {
        2.0 * HBAR * omega * env.r
    } else {
        0.0
    }
}

/// Current noise in the loop, A²·s.
pub fn s_current(omega: f64, env: &EnvCircuitParams) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    s_voltage(omega, env) / z_total(omega, env).norm_sqr()
}

/// Phase-noise spectrum seen by the sluice, s.
pub fn s_phase(omega: f64, env: &EnvCircuitParams) -> f64 {
    env.phase_factor() * s_current(omega, env)
}

/// Near-resonance closed form of [`s_phase`] for φ/Φ0 close to 1/2.
pub fn s_phase_approx(omega: f64, env: &EnvCircuitParams) -> Result<f64> {
    let x = env.phi_ctrl - 0.5;
    if x == 0.0 {
        return Err(Error::SingularApproximation { phi_ctrl: env.phi_ctrl });
    }
    if omega <= 0.0 {
        return Ok(0.0);
    }
    let bracket = 1.0 - env.l0() / (PI * env.l * x);
    let lw = env.l * omega;
    let num = 2.0 * env.phase_factor() * env.r * HBAR * omega;
    Ok(num / (env.r * env.r + lw * lw * bracket * bracket))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResonanceFeatures {
    /// Control flux of the near-resonance maximum, units of Φ0.
    pub phi_max: f64,
    pub s_max: f64,
    /// S_φ at φ/Φ0 = 1/2.
    pub s_min: f64,
    /// Distance between the dip and the maximum, units of Φ0.
    pub width: f64,
}

/// Closed-form features of the resonance at φ/Φ0 = 1/2.
pub fn resonance_features(omega: f64, env: &EnvCircuitParams) -> ResonanceFeatures {
    let width = env.l0() / (PI * env.l);
    ResonanceFeatures {
        phi_max: 0.5 + width,
        s_max: 2.0 * env.phase_factor() * HBAR * omega / env.r,
        s_min: s_phase(omega, &env.with_phi(0.5)),
        width,
    }
}

/// ⟨δφ²⟩ = ∫ S_φ dω over [omega_lo, omega_hi], relative tolerance 1e-8.
pub fn phase_variance(env: &EnvCircuitParams, omega_lo: f64, omega_hi: f64) -> Result<f64> {
    band_integral(|w| s_phase(w, env), omega_lo, omega_hi)
}

/// Adaptive integral of any spectrum over a positive band.
pub fn band_integral<F: Fn(f64) -> f64>(s: F, omega_lo: f64, omega_hi: f64) -> Result<f64> {
    if !(omega_lo > 0.0 && omega_hi > omega_lo) {
        return Err(Error::Argument(format!(
            "band must satisfy 0 < lo < hi, got [{omega_lo:e}, {omega_hi:e}]"
        )));
    }
    Ok(integrate(s, omega_lo, omega_hi, 1e-8, 0.0, 2000)?.value)
}

/// A one-sided environment spectrum S(ω) in s per unit coupling².
pub trait SpectralDensity: Send + Sync {
    fn s(&self, omega: f64) -> f64;
}

impl SpectralDensity for EnvCircuitParams {
    fn s(&self, omega: f64) -> f64 {
        s_phase(omega, self)
    }
}

/// Ohmic zero-temperature spectrum `η·ω` for ω > 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OhmicSpectrum {
    pub eta: f64,
}

impl SpectralDensity for OhmicSpectrum {
    fn s(&self, omega: f64) -> f64 {
        if omega > 0.0 {
            self.eta * omega
        } else {
            0.0
        }
    }
}

/// Frequency-independent spectrum, used by tests and fixtures.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatSpectrum {
    pub value: f64,
}

impl SpectralDensity for FlatSpectrum {
    fn s(&self, _omega: f64) -> f64 {
        self.value
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> SpectralDensity for F {
    fn s(&self, omega: f64) -> f64 {
        self(omega)
    }
}
