//! Interference formulas against direct integration and sampling.

use std::f64::consts::FRAC_PI_4;

use cooper_pump::constants::HBAR;
use cooper_pump::lzs::{
    averaged_excitation, default_crossing, exact_gaussian_average, landau_zener_probability, mc_average, LzsParams,
};
use cooper_pump::sluice::{diagonalize, hamiltonian, ControlPoint, SluiceParams};
use num_complex::Complex64;

/// Schrödinger RK4 through the gate-ramp crossing in the charge basis, with
/// the gate swept linearly over ±`span` around degeneracy at the default rate.
/// Starts in the instantaneous ground state and returns the final excited
/// population; reading out adiabatically suppresses the finite-span ringing.
fn excitation_after_sweep(p: &SluiceParams, span: f64, steps: usize) -> f64 {
    let ng_rate = (p.ng_max - p.ng_min) / (0.2 * p.period());
    let t_total = 2.0 * span / ng_rate;
    let dt = t_total / steps as f64;
    let deriv = |t: f64, psi: [Complex64; 2]| {
        let ng = 0.5 - span + ng_rate * t;
        let h = hamiltonian(&ControlPoint::new(p.j_max, p.j_min, ng), p.phi0, p.e_c);
        // drop the common diagonal part to keep the phase rate down
        let shift = 0.5 * (h.get(0, 0) + h.get(1, 1));
        let mi = Complex64::new(0.0, -1.0 / HBAR);
        [
            mi * ((h.get(0, 0) - shift) * psi[0] + h.get(0, 1) * psi[1]),
            mi * (h.get(1, 0) * psi[0] + (h.get(1, 1) - shift) * psi[1]),
        ]
    };
    let add = |a: [Complex64; 2], b: [Complex64; 2], s: f64| [a[0] + b[0] * s, a[1] + b[1] * s];
    let h_at = |ng: f64| hamiltonian(&ControlPoint::new(p.j_max, p.j_min, ng), p.phi0, p.e_c);
    let start = diagonalize(&h_at(0.5 - span), None).unwrap().basis;
    let mut psi = [start.get(0, 0), start.get(1, 0)];
    for k in 0..steps {
        let t = k as f64 * dt;
        let k1 = deriv(t, psi);
        let k2 = deriv(t + 0.5 * dt, add(psi, k1, 0.5 * dt));
        let k3 = deriv(t + 0.5 * dt, add(psi, k2, 0.5 * dt));
        let k4 = deriv(t + dt, add(psi, k3, dt));
        for i in 0..2 {
            psi[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0);
        }
    }
    let end = diagonalize(&h_at(0.5 + span), None).unwrap().basis;
    (end.get(0, 1).conj() * psi[0] + end.get(1, 1).conj() * psi[1]).norm_sqr()
}

#[test]
fn landau_zener_matches_direct_sweep() {
    for f in [150e6, 60e6] {
        let p = SluiceParams::reference().with_frequency(f);
        let (gap, rate) = default_crossing(&p);
        let formula = landau_zener_probability(gap, rate).unwrap();
        let direct = excitation_after_sweep(&p, 3.0, 1 << 20);
        assert!((direct / formula - 1.0).abs() < 0.05, "f = {f:e}: direct {direct}, formula {formula}");
    }
}

#[test]
fn monte_carlo_agrees_with_gaussian_average() {
    let p = LzsParams::from_default_cycle(&SluiceParams::reference()).unwrap();
    for sigma2 in [1e-4, 1e-3] {
        let exact = exact_gaussian_average(&p, sigma2);
        let mc = mc_average(&p, sigma2, 1_000_000, 2024).unwrap();
        assert!(mc.std_error > 0.0);
        assert!((mc.mean - exact).abs() <= 3.0 * mc.std_error, "σ² = {sigma2}: {} ± {} vs {exact}", mc.mean, mc.std_error);
    }
}

#[test]
fn monte_carlo_error_falls_as_inverse_root() {
    let p = LzsParams::quarter_bias(0.3, 0.4).unwrap();
    let sigma2 = 0.1;
    let exact = exact_gaussian_average(&p, sigma2);
    let ns = [10_000usize, 40_000, 160_000, 640_000];
    let rms: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let seeds = 48u64;
            let sq: f64 = (0..seeds).map(|s| (mc_average(&p, sigma2, n, 1000 + s).unwrap().mean - exact).powi(2)).sum();
            (sq / seeds as f64).sqrt()
        })
        .collect();
    // least-squares slope on log-log axes
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = rms.iter().map(|r| r.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 4.0, ys.iter().sum::<f64>() / 4.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((slope + 0.5).abs() < 0.1, "slope {slope}, rms {rms:?}");
}

#[test]
fn linearized_slope_is_half_the_gaussian_slope() {
    let p = LzsParams::quarter_bias(0.2, 0.3).unwrap();
    let v = 1e-4;
    let exact_slope = (exact_gaussian_average(&p, v) - exact_gaussian_average(&p, 0.0)) / v;
    let avg = averaged_excitation(&p, v).unwrap();
    let printed = (avg.linearized - p.p_e0) / v;
    let expanded = (avg.linearized_expanded - p.p_e0) / v;
    assert!((expanded / exact_slope - 1.0).abs() < 1e-3);
    assert!((printed / exact_slope - 0.5).abs() < 1e-3);
    // the noise-free baseline sits at φ/2 = π/4
    assert!((p.p_e0 - 0.16 * (0.3 + FRAC_PI_4).cos().powi(2)).abs() < 1e-15);
}
