//! Currents and charges from a propagated density matrix.
//!
//! The expectation of the current through SQUID k splits into a standard part
//! Tr(ρ·I_k) and a dissipative part Tr(L·Q_k), where L is the dissipator and
//! Q_k the charge that has passed SQUID k. Each part is further divided into
//! a dynamic (diagonal) and a geometric (off-diagonal) contribution in the
//! instantaneous eigenbasis.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constants::{HBAR, PAIR_CHARGE};
use crate::dissipator::{rates_from_samples, DensityMatrix, DissipatorElements, SpectrumSamples, Trajectory, TrajectorySample};
pub use crate::dissipator::dissipator_elements;
use crate::error::{Error, Result};
use crate::operator::OperatorMatrix;
use crate::sluice::{current_operators, island_charge_op, squid_charge_ops};

/// Which current a trace refers to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Squid {
    #[default]
    Left,
    Right,
    /// (I_L + I_R)/2, the current through the device.
    Device,
}

impl std::str::FromStr for Squid {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "left" | "l" => Ok(Self::Left),
            "right" | "r" => Ok(Self::Right),
            "device" | "average" => Ok(Self::Device),
            other => Err(Error::Argument(format!("unknown SQUID selector {other:?}"))),
        }
    }
}

/// The four contributions to ⟨I_k⟩, in amperes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct CurrentBreakdown {
    pub i_dyn: f64,
    pub i_geo: f64,
    pub i_dyn_diss: f64,
    pub i_geo_diss: f64,
    pub total: f64,
}

/// Tr(L·Q) for `q` given in the same eigenbasis as `l`.
pub fn dissipative_current(l: &DissipatorElements, q: &OperatorMatrix) -> f64 {
    (q.get(0, 0).re - q.get(1, 1).re) * l.l_gg + 2.0 * (l.l_ge * q.get(1, 0)).re
}

/// Splits ⟨I_k⟩ = Tr(ρ·I_k) + Tr(L·Q_k); all operators in the eigenbasis of ρ.
pub fn current_breakdown(rho: &DensityMatrix, l: &DissipatorElements, i_k: &OperatorMatrix, q_k: &OperatorMatrix) -> CurrentBreakdown {
    let i_dyn = rho.gg * i_k.get(0, 0).re + rho.ee() * i_k.get(1, 1).re;
    let i_geo = 2.0 * (rho.ge * i_k.get(1, 0)).re;
    let i_dyn_diss = (q_k.get(0, 0).re - q_k.get(1, 1).re) * l.l_gg;
    let i_geo_diss = 2.0 * (l.l_ge * q_k.get(1, 0)).re;
    let standard = (rho.to_matrix() * *i_k).trace().re;
    let total = standard + dissipative_current(l, q_k);
    CurrentBreakdown { i_dyn, i_geo, i_dyn_diss, i_geo_diss, total }
}

/// Current and charge operators of `which` in the charge basis.
fn operators(sample: &TrajectorySample, phi0: f64, which: Squid) -> (OperatorMatrix, OperatorMatrix) {
    let (i_l, i_r) = current_operators(&sample.ctrl, phi0);
    let (q_l, q_r) = squid_charge_ops();
    match which {
        Squid::Left => (i_l, q_l),
        Squid::Right => (i_r, q_r),
        Squid::Device => ((i_l + i_r).scale(0.5), (q_l + q_r).scale(0.5)),
    }
}

/// Breakdown of the selected current at one trajectory sample.
pub fn sample_breakdown(sample: &TrajectorySample, phi0: f64, which: Squid) -> CurrentBreakdown {
    let (i, q) = operators(sample, phi0, which);
    current_breakdown(&sample.rho, &sample.dissipator, &i.in_basis(&sample.basis), &q.in_basis(&sample.basis))
}

/// Breakdown at every sample of a trajectory.
pub fn breakdown_trace(traj: &Trajectory, which: Squid) -> Vec<CurrentBreakdown> {
    traj.samples.iter().map(|s| sample_breakdown(s, traj.phi0, which)).collect()
}

/// ⟨Q_island⟩ at a sample, coulombs.
pub fn island_charge(sample: &TrajectorySample) -> f64 {
    (sample.rho.to_matrix() * island_charge_op().in_basis(&sample.basis)).trace().re
}

/// Charges transferred through one SQUID (or the device) in one cycle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SquidCharges {
    /// ∫ I^G dt, the standard geometric (pumped) charge.
    pub q_pumped: f64,
    /// ∫ I^{G,diss} dt.
    pub q_pumped_diss: f64,
    pub q_dynamic: f64,
    pub q_dynamic_diss: f64,
    /// ∫ ⟨I⟩ dt.
    pub q_total: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct CycleCharges {
    pub left: SquidCharges,
    pub right: SquidCharges,
    /// Average of the two SQUIDs.
    pub device: SquidCharges,
}

/// Composite Simpson rule on uniformly spaced points, closing an odd interval
/// count with the 3/8 rule.
fn simpson(h: f64, y: &[f64]) -> f64 {
    let n = y.len() - 1;
    match n {
        0 => 0.0,
        1 => 0.5 * h * (y[0] + y[1]),
        2 => h / 3.0 * (y[0] + 4.0 * y[1] + y[2]),
        3 => 3.0 * h / 8.0 * (y[0] + 3.0 * y[1] + 3.0 * y[2] + y[3]),
        _ if n % 2 == 0 => {
            let inner: f64 = (1..n).map(|k| if k % 2 == 1 { 4.0 * y[k] } else { 2.0 * y[k] }).sum();
            h / 3.0 * (y[0] + inner + y[n])
        }
        _ => simpson(h, &y[..n - 2]) + simpson(h, &y[n - 3..]),
    }
}

fn check_span(traj: &Trajectory) -> Result<()> {
    let n = traj.samples.len();
    if n < 2 {
        return Err(Error::Argument(format!("trajectory has {n} samples, need a full cycle")));
    }
    let t0 = traj.samples[0].t;
    let t1 = traj.samples[n - 1].t;
    let tol = 1e-9 * traj.period;
    if t0.abs() > tol || (t1 - traj.period).abs() > tol {
        return Err(Error::Argument(format!(
            "trajectory spans [{t0:e}, {t1:e}] s, not one period of {:e} s",
            traj.period
        )));
    }
    Ok(())
}

/// ∫ f dt over the trajectory, segment by segment (the grid is uniform inside
/// a segment; controls have kinks at the boundaries).
pub fn cycle_integral<F: Fn(&TrajectorySample) -> f64>(traj: &Trajectory, f: F) -> Result<f64> {
    check_span(traj)?;
    let y: Vec<f64> = traj.samples.iter().map(&f).collect();
    Ok(segment_runs(traj).into_iter().map(|(a, b)| simpson((traj.samples[b].t - traj.samples[a].t) / (b - a) as f64, &y[a..=b])).sum())
}

/// Index ranges [a, b] of each segment, sharing boundary nodes.
fn segment_runs(traj: &Trajectory) -> Vec<(usize, usize)> {
    let s = &traj.samples;
    let mut runs = Vec::new();
    let mut a = 0;
    for k in 1..s.len() {
        if k + 1 == s.len() || s[k + 1].segment != s[k].segment {
            runs.push((a, k));
            a = k;
        }
    }
    runs
}

/// Integrates the current breakdown over one period on the integrator grid.
pub fn integrate_cycle(traj: &Trajectory) -> Result<CycleCharges> {
    check_span(traj)?;
    let runs = segment_runs(traj);
    let integrate = |which: Squid| {
        let parts = breakdown_trace(traj, which);
        let col = |f: fn(&CurrentBreakdown) -> f64| {
            let y: Vec<f64> = parts.iter().map(f).collect();
            runs.iter()
                .map(|&(a, b)| simpson((traj.samples[b].t - traj.samples[a].t) / (b - a) as f64, &y[a..=b]))
                .sum()
        };
        SquidCharges {
            q_pumped: col(|c| c.i_geo),
            q_pumped_diss: col(|c| c.i_geo_diss),
            q_dynamic: col(|c| c.i_dyn),
            q_dynamic_diss: col(|c| c.i_dyn_diss),
            q_total: col(|c| c.total),
        }
    };
    let left = integrate(Squid::Left);
    let right = integrate(Squid::Right);
    let device = integrate(Squid::Device);
    Ok(CycleCharges { left, right, device })
}

/// Outcome of the randomized check that a noise operator diagonal in the
/// charge basis carries no dissipative current.
#[derive(Clone, Debug, Serialize)]
pub struct NullCertificate {
    pub n_trials: usize,
    /// Largest |Tr(L·Q)| / (2e·(a − b)²·max S/ħ²) without the secular approximation.
    pub max_nonsecular: f64,
    pub worst_trial: usize,
    /// Same quantity with the secular approximation, per trial.
    pub secular: Vec<f64>,
    pub tolerance: f64,
}

impl NullCertificate {
    /// Fraction of trials whose secular residual exceeds `threshold`.
    pub fn secular_fraction_above(&self, threshold: f64) -> f64 {
        self.secular.iter().filter(|&&r| r > threshold).count() as f64 / self.secular.len() as f64
    }

    pub fn passed(&self) -> bool {
        self.max_nonsecular <= self.tolerance
    }
}

/// Normalized |Tr(L·Q)| for Z = a|1⟩⟨1| + b|0⟩⟨0| seen from the eigenbasis
/// (ϑ, χ), with both the full and the secular dissipator.
pub fn charge_noise_residuals(a: f64, b: f64, theta: f64, chi: f64, samples: &SpectrumSamples, rho: &DensityMatrix) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    let ph = Complex64::from_polar(1.0, chi);
    let basis = OperatorMatrix::from_columns([Complex64::new(c, 0.0), ph * s], [Complex64::new(s, 0.0), -ph * c]);
    // Rates depend only on the traceless part of Z. Rotating diag(b, a) as a
    // whole would leave roundoff of order ε·|a| in the elements, which
    // dominates when a ≈ b.
    let half = 0.5 * (a - b);
    let z = OperatorMatrix::diag(-half, half).in_basis(&basis);
    let q = island_charge_op().in_basis(&basis);
    let rates = rates_from_samples(&z, samples);
    // natural scale: 2e times the largest rate the coupling could produce
    let smax = samples.s_plus.max(samples.s_minus).max(samples.s_zero);
    let scale = PAIR_CHARGE * (a - b).powi(2) * smax / (HBAR * HBAR);
    if scale == 0.0 {
        return (0.0, 0.0);
    }
    let full = dissipative_current(&dissipator_elements(rho, &rates, false), &q).abs() / scale;
    let sec = dissipative_current(&dissipator_elements(rho, &rates, true), &q).abs() / scale;
    (full, sec)
}

/// Samples random coupling strengths, eigenframes, spectra and states and
/// checks that the non-secular dissipative current vanishes to 1e-13.
pub fn charge_noise_null_certificate(n_trials: usize, seed: u64) -> Result<NullCertificate> {
    if n_trials < 1000 {
        return Err(Error::Argument(format!("need at least 1000 trials, got {n_trials}")));
    }
    let tolerance = 1e-13;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_nonsecular: f64 = 0.0;
    let mut worst_trial = 0;
    let mut secular = Vec::with_capacity(n_trials);
    for trial in 0..n_trials {
        // energies of order ħ·1e9 so that rates are O(S)
        let a = HBAR * rng.random_range(-1e9..1e9);
        let b = HBAR * rng.random_range(-1e9..1e9);
        let theta = rng.random_range(0.05..std::f64::consts::FRAC_PI_2 - 0.05);
        let chi = rng.random_range(0.0..std::f64::consts::TAU);
        let samples = SpectrumSamples {
            s_plus: rng.random_range(0.0..1e-9),
            s_minus: rng.random_range(0.0..1e-9),
            s_zero: rng.random_range(0.0..1e-9),
        };
        let p: f64 = rng.random();
        let r = (p * (1.0 - p)).sqrt() * rng.random::<f64>();
        let rho = DensityMatrix::new(p, Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU)));
        let (full, sec) = charge_noise_residuals(a, b, theta, chi, &samples, &rho);
        if full > max_nonsecular {
            max_nonsecular = full;
            worst_trial = trial;
        }
        secular.push(sec);
    }
    let cert = NullCertificate { n_trials, max_nonsecular, worst_trial, secular, tolerance };
    if !cert.passed() {
        return Err(Error::Argument(format!(
            "non-secular dissipative current {max_nonsecular:e} exceeds {tolerance:e} at trial {worst_trial}"
        )));
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::dissipator::RateSet;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    proptest! {
        #[test]
        fn breakdown_sums_to_total(
            p in 0.0..1.0f64, cr in -0.5..0.5f64, ci in -0.5..0.5f64,
            lg in -1e9..1e9f64, lr in -1e9..1e9f64, li in -1e9..1e9f64,
            d0 in -1e-9..1e-9f64, d1 in -1e-9..1e-9f64, xr in -1e-9..1e-9f64, xi in -1e-9..1e-9f64,
            q0 in -2e-19..2e-19f64, q1 in -2e-19..2e-19f64, yr in -2e-19..2e-19f64, yi in -2e-19..2e-19f64,
        ) {
            let rho = DensityMatrix::new(p, c(cr, ci));
            let l = DissipatorElements { l_gg: lg, l_ge: c(lr, li) };
            let i = OperatorMatrix::hermitian(d0, c(xr, xi), d1);
            let q = OperatorMatrix::hermitian(q0, c(yr, yi), q1);
            let b = current_breakdown(&rho, &l, &i, &q);
            let sum = b.i_dyn + b.i_geo + b.i_dyn_diss + b.i_geo_diss;
            let scale = b.i_dyn.abs() + b.i_geo.abs() + b.i_dyn_diss.abs() + b.i_geo_diss.abs();
            prop_assert!((sum - b.total).abs() <= 1e-12 * scale.max(1e-300));
        }

        #[test]
        fn charge_offset_does_not_matter(lg in -1e9..1e9f64, lr in -1e9..1e9f64, li in -1e9..1e9f64, shift in -1e-18..1e-18f64) {
            let l = DissipatorElements { l_gg: lg, l_ge: c(lr, li) };
            let q = OperatorMatrix::hermitian(0.3e-19, c(1e-19, -2e-19), -1e-19);
            let a = dissipative_current(&l, &q);
            let b = dissipative_current(&l, &(q + OperatorMatrix::identity().scale(shift)));
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-28));
        }
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let f = |x: f64| 2.0 * x * x * x - x * x + 3.0;
        let exact = |x: f64| 0.5 * x.powi(4) - x.powi(3) / 3.0 + 3.0 * x;
        for n in 2..9 {
            let h = 1.5 / n as f64;
            let y: Vec<f64> = (0..=n).map(|k| f(k as f64 * h)).collect();
            let got = simpson(h, &y);
            assert!((got - exact(1.5)).abs() < 1e-12, "n = {n}: {got}");
        }
    }

    #[test]
    fn diagonal_state_without_dissipation_is_purely_dynamic() {
        let rho = DensityMatrix::new(0.7, c(0.0, 0.0));
        let i = OperatorMatrix::hermitian(1e-9, c(2e-9, 1e-9), -3e-9);
        let b = current_breakdown(&rho, &DissipatorElements::default(), &i, &OperatorMatrix::diag(0.0, 1e-19));
        assert!(b.i_dyn != 0.0);
        assert_eq!((b.i_geo, b.i_dyn_diss, b.i_geo_diss), (0.0, 0.0, 0.0));
    }

    #[test]
    fn no_rates_no_dissipative_current() {
        let l = dissipator_elements(&DensityMatrix::new(0.3, c(0.1, 0.2)), &RateSet::zero(), false);
        assert_eq!(dissipative_current(&l, &island_charge_op()), 0.0);
    }

    #[test]
    fn identity_noise_is_silent_in_both_variants() {
        let s = SpectrumSamples { s_plus: 1e-10, s_minus: 2e-11, s_zero: 3e-10 };
        let rho = DensityMatrix::new(0.4, c(0.2, -0.1));
        let (full, sec) = charge_noise_residuals(2e-25, 2e-25, 0.4, 1.0, &s, &rho);
        assert_eq!((full, sec), (0.0, 0.0));
    }

    #[test]
    fn null_certificate_small_run() {
        let cert = charge_noise_null_certificate(2000, 3).unwrap();
        assert!(cert.max_nonsecular < 1e-13, "{}", cert.max_nonsecular);
        assert!(cert.secular_fraction_above(1e-3) >= 0.9, "{}", cert.secular_fraction_above(1e-3));
        assert!(charge_noise_null_certificate(10, 3).is_err());
    }

    #[test]
    fn partial_cycle_rejected() {
        let traj = Trajectory { period: 1.0, phi0: 0.0, samples: vec![] };
        assert!(matches!(integrate_cycle(&traj), Err(Error::Argument(_))));
    }
}
