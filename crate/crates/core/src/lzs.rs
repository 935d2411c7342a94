//! Landau–Zener–Stückelberg estimates of the excitation per pump cycle.
//!
//! Two avoided crossings per cycle act as beam splitters with transition
//! probability P_LZ; the phase picked up between them sets the interference.
//! Phase noise enters through φ/2 = π/4 + δφ.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::noise::trapezoid;
use crate::sluice::{hamiltonian, PumpSchedule, SluiceParams};

/// Variances above this leave the small-fluctuation expansion.
pub const LINEAR_VALIDITY: f64 = 0.01;

/// Samples drawn from one RNG stream in [`mc_average`].
const MC_CHUNK: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LzsParams {
    pub p_lz: f64,
    /// Dynamical phase α, rad.
    pub alpha: f64,
    /// Static part of φ/2, rad.
    pub phase_bias: f64,
    /// Excitation without noise.
    pub p_e0: f64,
}

impl LzsParams {
    pub fn new(p_lz: f64, alpha: f64, phase_bias: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_lz) {
            return Err(Error::Argument(format!("P_LZ must lie in [0, 1], got {p_lz}")));
        }
        if !alpha.is_finite() || !phase_bias.is_finite() {
            return Err(Error::Argument("LZS phases must be finite".into()));
        }
        let mut p = Self { p_lz, alpha, phase_bias, p_e0: 0.0 };
        p.p_e0 = excitation_probability(&p, phase_bias);
        Ok(p)
    }

    /// Bias φ0 = π/2, i.e. φ/2 = π/4.
    pub fn quarter_bias(p_lz: f64, alpha: f64) -> Result<Self> {
        Self::new(p_lz, alpha, FRAC_PI_4)
    }

    /// P_LZ and α for the gate ramps of the default cycle. α is half the
    /// adiabatic phase ∫Ω dt accumulated between the two n_g = 1/2 crossings.
    pub fn from_default_cycle(params: &SluiceParams) -> Result<Self> {
        let (gap, rate) = default_crossing(params);
        let p_lz = landau_zener_probability(gap, rate)?;
        let schedule = PumpSchedule::default_cycle(params);
        let t = params.period();
        // ramps are segments 1 and 3, crossings at their midpoints
        let t_up = 0.3 * t;
        let t_down = 0.7 * t;
        let omega = |tt: f64| {
            let s = tt / t;
            let k = schedule.locate(s);
            let (c, _) = schedule.eval_in_segment(k, s);
            let h = hamiltonian(&c, params.phi0, params.e_c);
            let d = h.get(0, 0).re - h.get(1, 1).re;
            (d * d + 4.0 * h.get(0, 1).norm_sqr()).sqrt() / HBAR
        };
        let phase = trapezoid(omega, t_up, t_down, 20_000);
        Self::quarter_bias(p_lz, (0.5 * phase).rem_euclid(PI))
    }
}

/// P_e = P_LZ(1 − P_LZ)cos²(α + φ/2).
pub fn excitation_probability(p: &LzsParams, phi_half: f64) -> f64 {
    p.p_lz * (1.0 - p.p_lz) * (p.alpha + phi_half).cos().powi(2)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AveragedExcitation {
    /// P_e⁰ + ½·P_LZ(1 − P_LZ)·sin(2α)·⟨δφ²⟩, as usually quoted.
    pub linearized: f64,
    /// Same expansion with the coefficient that follows from expanding
    /// cos²(α + π/4 + δφ) to second order, i.e. without the ½.
    pub linearized_expanded: f64,
    /// False when the variance is outside the small-fluctuation window.
    pub valid: bool,
}

/// Noise-averaged excitation to first order in ⟨δφ²⟩, at φ/2 = π/4.
pub fn averaged_excitation(p: &LzsParams, variance: f64) -> Result<AveragedExcitation> {
    if !(variance >= 0.0) || !variance.is_finite() {
        return Err(Error::Argument(format!("variance must be non-negative, got {variance}")));
    }
    let slope = p.p_lz * (1.0 - p.p_lz) * (2.0 * p.alpha).sin();
    Ok(AveragedExcitation {
        linearized: p.p_e0 + 0.5 * slope * variance,
        linearized_expanded: p.p_e0 + slope * variance,
        valid: variance <= LINEAR_VALIDITY,
    })
}

/// ⟨P_e⟩ for δφ ~ N(0, σ²): ½P_LZ(1 − P_LZ)(1 + cos(2α + 2φ_b)·e^{−2σ²}).
pub fn exact_gaussian_average(p: &LzsParams, sigma2: f64) -> f64 {
    let c = (2.0 * (p.alpha + p.phase_bias)).cos() * (-2.0 * sigma2).exp();
    0.5 * p.p_lz * (1.0 - p.p_lz) * (1.0 + c)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

#[derive(Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Self) -> Self {
        if self.n == 0.0 {
            return o;
        }
        if o.n == 0.0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Self {
            n,
            mean: self.mean + d * o.n / n,
            m2: self.m2 + o.m2 + d * d * self.n * o.n / n,
        }
    }
}

/// Monte-Carlo average of P_e over δφ ~ N(0, σ²) added to the phase bias.
///
/// Samples are drawn in fixed chunks, each from its own ChaCha stream, so the
/// result depends only on `seed` and `n_samples`, not on the thread count.
pub fn mc_average(p: &LzsParams, sigma2: f64, n_samples: usize, seed: u64) -> Result<McEstimate> {
    if n_samples < 10_000 {
        return Err(Error::Argument(format!("need at least 10⁴ samples, got {n_samples}")));
    }
    if !(sigma2 >= 0.0) || !sigma2.is_finite() {
        return Err(Error::Argument(format!("σ² must be non-negative, got {sigma2}")));
    }
    let normal = Normal::new(0.0, sigma2.sqrt()).map_err(|e| Error::Argument(e.to_string()))?;
    let chunks = n_samples.div_ceil(MC_CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let len = MC_CHUNK.min(n_samples - k * MC_CHUNK);
            let mut m = Moments::default();
            for _ in 0..len {
                m.push(excitation_probability(p, p.phase_bias + normal.sample(&mut rng)));
            }
            m
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    let var = if total.n > 1.0 { total.m2 / (total.n - 1.0) } else { 0.0 };
    Ok(McEstimate {
        mean: total.mean,
        std_error: (var / total.n).sqrt(),
        n_samples,
    })
}

/// P_LZ = exp(−π·Δ²/(2ħ·v)) for full splitting Δ and diabatic sweep rate v.
pub fn landau_zener_probability(gap: f64, sweep_rate: f64) -> Result<f64> {
    if !(sweep_rate > 0.0) || !gap.is_finite() {
        return Err(Error::Argument(format!("sweep rate must be positive, got {sweep_rate}")));
    }
    Ok((-PI * gap * gap / (2.0 * HBAR * sweep_rate)).exp())
}

/// Splitting and diabatic sweep rate at the gate-ramp crossings of the
/// default cycle (one SQUID at J_max, the other at J_min).
pub fn default_crossing(params: &SluiceParams) -> (f64, f64) {
    let ph = Complex64::from_polar(1.0, 0.5 * params.phi0);
    let gap = (ph * params.j_max + ph.conj() * params.j_min).norm();
    let ramp_time = 0.2 * params.period();
    let rate = 2.0 * params.e_c * (params.ng_max - params.ng_min) / ramp_time;
    (gap, rate)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn trivial_excitations() {
        for p_lz in [0.0, 1.0] {
            let p = LzsParams::quarter_bias(p_lz, 0.3).unwrap();
            assert_eq!(excitation_probability(&p, 0.7), 0.0);
        }
        let p = LzsParams::quarter_bias(0.5, 0.2).unwrap();
        assert!(excitation_probability(&p, PI / 2.0 - 0.2).abs() < 1e-30);
        assert_eq!(excitation_probability(&p, -0.2), 0.25);
        assert!(LzsParams::quarter_bias(1.2, 0.0).is_err());
    }

    #[test]
    fn averaged_limits() {
        let p = LzsParams::quarter_bias(0.2, 0.4).unwrap();
        let a = averaged_excitation(&p, 0.0).unwrap();
        assert_eq!((a.linearized, a.linearized_expanded), (p.p_e0, p.p_e0));
        let q = LzsParams::quarter_bias(0.2, PI / 2.0).unwrap();
        let b = averaged_excitation(&q, 5e-3).unwrap();
        assert!((b.linearized - q.p_e0).abs() < 1e-17);
        assert!(!averaged_excitation(&p, 0.02).unwrap().valid);
        assert!(averaged_excitation(&p, -1.0).is_err());
    }

    #[test]
    fn expanded_slope_matches_gaussian_average() {
        let p = LzsParams::quarter_bias(0.15, 0.6).unwrap();
        let s2 = 1e-5;
        let exact_slope = (exact_gaussian_average(&p, s2) - exact_gaussian_average(&p, 0.0)) / s2;
        let a = averaged_excitation(&p, s2).unwrap();
        let expanded = (a.linearized_expanded - p.p_e0) / s2;
        let printed = (a.linearized - p.p_e0) / s2;
        assert!((expanded / exact_slope - 1.0).abs() < 1e-4);
        assert!((printed / exact_slope - 0.5).abs() < 1e-4);
    }

    #[test]
    fn mc_zero_variance_is_exact() {
        let p = LzsParams::quarter_bias(0.3, 1.1).unwrap();
        let m = mc_average(&p, 0.0, 20_000, 7).unwrap();
        assert_eq!(m.mean, p.p_e0);
        assert_eq!(m.std_error, 0.0);
    }

    #[test]
    fn mc_is_reproducible_across_pools() {
        let p = LzsParams::quarter_bias(0.3, 1.1).unwrap();
        let a = mc_average(&p, 1e-3, 300_000, 11).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| mc_average(&p, 1e-3, 300_000, 11).unwrap());
        assert_eq!(a, b);
        assert!(mc_average(&p, 1e-3, 100, 11).is_err());
    }

    #[test]
    fn lz_limits() {
        assert_eq!(landau_zener_probability(0.0, 1.0).unwrap(), 1.0);
        assert!(landau_zener_probability(1e-24, 1e-30).unwrap() < 1e-300);
        assert!(landau_zener_probability(1e-24, 0.0).is_err());
    }

    #[test]
    fn default_cycle_parameters() {
        let p = LzsParams::from_default_cycle(&SluiceParams::reference()).unwrap();
        assert!(p.p_lz > 0.05 && p.p_lz < 0.2, "{}", p.p_lz);
        assert!((0.0..PI).contains(&p.alpha));
    }

    proptest! {
        #[test]
        fn probabilities_are_bounded(p_lz in 0.0..=1.0f64, alpha in -10.0..10.0f64, phi in -10.0..10.0f64, s2 in 0.0..5.0f64) {
            let p = LzsParams::new(p_lz, alpha, phi).unwrap();
            let e = excitation_probability(&p, phi);
            prop_assert!((0.0..=1.0).contains(&e));
            let g = exact_gaussian_average(&p, s2);
            prop_assert!((0.0..=1.0).contains(&g));
        }

        #[test]
        fn pi_periodic(p_lz in 0.0..=1.0f64, alpha in -3.0..3.0f64, phi in -3.0..3.0f64) {
            let p = LzsParams::quarter_bias(p_lz, alpha).unwrap();
            prop_assert!((excitation_probability(&p, phi) - excitation_probability(&p, phi + PI)).abs() < 1e-14);
        }

        #[test]
        fn monotone_when_slope_positive(p_lz in 0.01..0.99f64, alpha in 0.05..1.5f64, v1 in 0.0..0.01f64, v2 in 0.0..0.01f64) {
            let p = LzsParams::quarter_bias(p_lz, alpha).unwrap();
            let (lo, hi) = if v1 < v2 { (v1, v2) } else { (v2, v1) };
            prop_assert!(averaged_excitation(&p, lo).unwrap().linearized <= averaged_excitation(&p, hi).unwrap().linearized);
        }
    }
}
