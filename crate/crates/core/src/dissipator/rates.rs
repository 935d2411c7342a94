use num_complex::Complex64;

use crate::constants::HBAR;
use crate::noise::SpectralDensity;
use crate::operator::OperatorMatrix;

/// Rates entering the two-level master equation, all in 1/s.
///
/// `gamma_ge` pumps g → e with S(−Ω); `gamma_eg` relaxes e → g with S(+Ω).
/// The tilde rates and Γ_α + Γ_β carry the non-secular couplings between
/// populations and coherences. Γ_α + Γ_β ∝ ⟨g|Z|e⟩² is complex in general.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RateSet {
    pub gamma_ge: f64,
    pub gamma_eg: f64,
    pub gamma_phi: f64,
    pub gamma_alpha_plus_beta: Complex64,
    pub tilde0: Complex64,
    pub tilde_plus: Complex64,
    pub tilde_minus: Complex64,
}

impl RateSet {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Largest rate magnitude, a natural scale for tolerances.
    pub fn scale(&self) -> f64 {
        [
            self.gamma_ge,
            self.gamma_eg,
            self.gamma_phi,
            self.gamma_alpha_plus_beta.norm(),
            self.tilde0.norm(),
            self.tilde_plus.norm(),
            self.tilde_minus.norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Spectral density sampled at the three frequencies the rates need.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumSamples {
    pub s_plus: f64,
    pub s_minus: f64,
    pub s_zero: f64,
}

impl SpectrumSamples {
    pub fn at<S: SpectralDensity + ?Sized>(s: &S, omega: f64) -> Self {
        Self {
            s_plus: s.s(omega),
            s_minus: s.s(-omega),
            s_zero: s.s(0.0),
        }
    }
}

/// Rates for coupling operator `z` given in the eigenbasis {|g⟩, |e⟩}.
pub fn build_rates<S: SpectralDensity + ?Sized>(z: &OperatorMatrix, omega: f64, spectrum: &S) -> RateSet {
    rates_from_samples(z, &SpectrumSamples::at(spectrum, omega))
}

pub fn rates_from_samples(z: &OperatorMatrix, s: &SpectrumSamples) -> RateSet {
    let h2 = HBAR * HBAR;
    let z_eg = z.get(1, 0);
    let z_ge = z.get(0, 1);
    let d = z.get(0, 0).re - z.get(1, 1).re;
    let x2 = z_eg.norm_sqr();
    RateSet {
        gamma_ge: x2 * s.s_minus / h2,
        gamma_eg: x2 * s.s_plus / h2,
        gamma_phi: d * d * s.s_zero / (2.0 * h2),
        gamma_alpha_plus_beta: z_ge * z_ge * (s.s_plus + s.s_minus) / (2.0 * h2),
        tilde0: z_eg * d * s.s_zero / h2,
        tilde_plus: -z_ge * d * s.s_plus / (2.0 * h2),
        tilde_minus: -z_ge * d * s.s_minus / (2.0 * h2),
    }
}
