use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::operator::OperatorMatrix;

/// Threshold on ⟨0|g⟩ below which the relative phase is taken from the
/// previous frame.
const FALLBACK_OVERLAP: f64 = 1e-6;

/// Eigen-decomposition of a 2×2 Hermitian matrix in the form
/// |g⟩ = cosϑ|0⟩ + sinϑ·e^{iχ}|1⟩, |e⟩ = sinϑ|0⟩ − cosϑ·e^{iχ}|1⟩.
///
/// ϑ is signed, ϑ ∈ (−π/2, π/2], so ⟨0|g⟩ = cosϑ ≥ 0 always. The sign of ϑ
/// and the branch of χ are picked for continuity with a previous χ when one
/// is given, which keeps the basis smooth when ⟨0|H|1⟩ passes through zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagonalization {
    /// Lower eigenvalue, in the units of the input matrix.
    pub e_g: f64,
    pub e_e: f64,
    pub theta: f64,
    pub chi: f64,
    /// Columns |g⟩, |e⟩.
    pub basis: OperatorMatrix,
    /// Set when χ could not be read off the matrix and was carried over.
    pub fallback: bool,
}

impl Diagonalization {
    pub fn gap(&self) -> f64 {
        self.e_e - self.e_g
    }
}

/// Instantaneous eigenframe of the device Hamiltonian with its gauge velocity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eigenframe {
    pub e_g: f64,
    pub e_e: f64,
    /// Ω = (E_e − E_g)/ħ, rad/s.
    pub omega: f64,
    /// D1 with columns |g⟩, |e⟩.
    pub basis: OperatorMatrix,
    pub theta: f64,
    pub chi: f64,
    /// w1 = −i·D1†·dD1/dt, rad/s. Hermitian.
    pub w1: OperatorMatrix,
    pub fallback: bool,
}

fn wrap_pi(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(TAU) - PI;
    if y <= -PI {
        y + TAU
    } else {
        y
    }
}

fn basis_from(theta: f64, chi: f64) -> OperatorMatrix {
    let (s, c) = theta.sin_cos();
    let ph = Complex64::from_polar(1.0, chi);
    OperatorMatrix::from_columns(
        [Complex64::new(c, 0.0), ph * s],
        [Complex64::new(s, 0.0), -ph * c],
    )
}

/// Signed magnitude `v` and phase χ with −conj(h) = v·e^{iχ}.
fn polar_branch(h01: Complex64, scale: f64, prev_chi: Option<f64>) -> (f64, f64, bool) {
    let w = -h01.conj();
    let mag = w.norm();
    if mag <= 1e-14 * scale {
        return (0.0, prev_chi.unwrap_or(0.0), true);
    }
    let chi0 = w.arg();
    match prev_chi {
        None => (mag, chi0, false),
        Some(p) => {
            let d0 = wrap_pi(chi0 - p);
            let d1 = wrap_pi(chi0 + PI - p);
            if d0.abs() <= d1.abs() {
                (mag, p + d0, false)
            } else {
                (-mag, p + d1, false)
            }
        }
    }
}

/// Diagonalizes a 2×2 Hermitian matrix in the gauge described on
/// [`Diagonalization`].
pub fn diagonalize(h: &OperatorMatrix, prev_chi: Option<f64>) -> Result<Diagonalization> {
    let a = h.get(0, 0).re;
    let b = h.get(1, 1).re;
    let off = h.get(0, 1);
    let scale = h.max_abs();
    let delta = (a - b) / 2.0;
    let (v, mut chi, mut fallback) = polar_branch(off, scale, prev_chi);
    let r = delta.hypot(v);
    if !(r > 1e-14 * scale) {
        return Err(Error::DegenerateSpectrum { gap: 2.0 * r });
    }
    let theta = 0.5 * v.atan2(-delta);
    if theta.cos() < FALLBACK_OVERLAP {
        if let Some(p) = prev_chi {
            chi = p;
            fallback = true;
        }
    }
    let mean = (a + b) / 2.0;
    Ok(Diagonalization {
        e_g: mean - r,
        e_e: mean + r,
        theta,
        chi,
        basis: basis_from(theta, chi),
        fallback,
    })
}

/// Eigenframe of `h` with the gauge velocity implied by the time derivative
/// `h_dot` (J/s). Pass the previous frame of the same trajectory as `prev` to
/// keep the gauge continuous.
pub fn eigenframe(h: &OperatorMatrix, h_dot: &OperatorMatrix, prev: Option<&Eigenframe>) -> Result<Eigenframe> {
    let d = diagonalize(h, prev.map(|p| p.chi))?;
    let delta = (h.get(0, 0).re - h.get(1, 1).re) / 2.0;
    let delta_dot = (h_dot.get(0, 0).re - h_dot.get(1, 1).re) / 2.0;
    let (s2, c2) = (2.0 * d.theta).sin_cos();
    let r = (d.e_e - d.e_g) / 2.0;
    let (u, v) = (r * c2, r * s2);
    debug_assert!((u + delta).abs() <= 1e-9 * r.max(delta.abs()));

    // −conj(h) = v e^{iχ}; rotate its derivative into the same phase frame.
    let w_dot = -h_dot.get(0, 1).conj() * Complex64::from_polar(1.0, -d.chi);
    let v_dot = w_dot.re;
    let chi_dot = if d.fallback || v.abs() <= 1e-14 * h.max_abs() {
        0.0
    } else {
        w_dot.im / v
    };
    let u_dot = -delta_dot;
    let theta_dot = 0.5 * (u * v_dot - v * u_dot) / (r * r);

    let (s, c) = d.theta.sin_cos();
    let i = Complex64::i();
    let off = -i * theta_dot - chi_dot * s * c;
    let w1 = OperatorMatrix::hermitian(chi_dot * s * s, off, chi_dot * c * c);

    Ok(Eigenframe {
        e_g: d.e_g,
        e_e: d.e_e,
        omega: (d.e_e - d.e_g) / HBAR,
        basis: d.basis,
        theta: d.theta,
        chi: d.chi,
        w1,
        fallback: d.fallback,
    })
}

/// A smooth periodic re-phasing of the eigenvectors,
/// |g⟩ → e^{iα(s)}|g⟩, |e⟩ → e^{iβ(s)}|e⟩, with s the cycle fraction.
///
/// Physical outputs must not depend on it; it exists to check that.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeTwist {
    alpha: Vec<(f64, f64)>,
    beta: Vec<(f64, f64)>,
}

impl GaugeTwist {
    pub fn random(seed: u64, harmonics: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut series = || {
            (0..harmonics)
                .map(|_| (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
                .collect::<Vec<_>>()
        };
        let alpha = series();
        let beta = series();
        Self { alpha, beta }
    }

    fn eval(series: &[(f64, f64)], s: f64) -> (f64, f64) {
        let mut x = 0.0;
        let mut dx = 0.0;
        for (k, &(a, b)) in series.iter().enumerate() {
            let w = TAU * (k + 1) as f64;
            let (sn, cs) = (w * s).sin_cos();
            x += a * sn + b * cs;
            dx += w * (a * cs - b * sn);
        }
        (x, dx)
    }

    /// (α, β, dα/ds, dβ/ds) at cycle fraction `s`.
    pub fn phases(&self, s: f64) -> (f64, f64, f64, f64) {
        let (a, da) = Self::eval(&self.alpha, s);
        let (b, db) = Self::eval(&self.beta, s);
        (a, b, da, db)
    }

    /// Re-phases `frame` at cycle fraction `s` of a cycle at frequency
    /// `f_pump`: D1 → D1·P and w1 → P†·w1·P + diag(α̇, β̇).
    pub fn apply(&self, frame: &Eigenframe, s: f64, f_pump: f64) -> Eigenframe {
        let (a, b, da, db) = self.phases(s);
        let zero = Complex64::new(0.0, 0.0);
        let p = OperatorMatrix::new(Complex64::from_polar(1.0, a), zero, zero, Complex64::from_polar(1.0, b));
        let w1 = frame.w1.in_basis(&p) + OperatorMatrix::diag(da * f_pump, db * f_pump);
        Eigenframe {
            basis: frame.basis * p,
            w1,
            ..*frame
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sluice::{hamiltonian, hamiltonian_rate, ControlPoint, SluiceParams};

    fn frame_at(
        p: &SluiceParams,
        c0: &ControlPoint,
        rate: &ControlPoint,
        phi0: f64,
        t: f64,
        prev: Option<&Eigenframe>,
    ) -> Eigenframe {
        let c = ControlPoint::new(c0.j_l + t * rate.j_l, c0.j_r + t * rate.j_r, c0.n_g + t * rate.n_g);
        eigenframe(&hamiltonian(&c, phi0, p.e_c), &hamiltonian_rate(&c, rate, phi0, p.e_c), prev).unwrap()
    }

    fn fd_w1(before: &OperatorMatrix, mid: &OperatorMatrix, after: &OperatorMatrix, dt: f64) -> OperatorMatrix {
        let dd = (*after - *before).scale(0.5 / dt);
        (mid.adjoint() * dd).scale_complex(Complex64::new(0.0, -1.0))
    }

    #[test]
    fn constant_hamiltonian_has_no_gauge_velocity() {
        let p = SluiceParams::reference();
        let c = ControlPoint::new(p.j_max, p.j_min, 0.37);
        let f = eigenframe(&hamiltonian(&c, p.phi0, p.e_c), &OperatorMatrix::zeros(), None).unwrap();
        assert_eq!(f.w1.max_abs(), 0.0);
    }

    #[test]
    fn eigenvectors_diagonalize_and_are_gauge_fixed() {
        let p = SluiceParams::reference();
        for (jl, jr, ng, phi) in [(1.0, 0.03, 0.2, 0.3), (0.5, 0.7, 0.5, 2.0), (0.03, 1.0, 0.8, 5.0)] {
            let c = ControlPoint::new(jl * p.j_max, jr * p.j_max, ng);
            let h = hamiltonian(&c, phi, p.e_c);
            let f = eigenframe(&h, &OperatorMatrix::zeros(), None).unwrap();
            assert!(f.e_g <= f.e_e);
            assert!(f.basis.is_unitary(1e-12));
            let g0 = f.basis.get(0, 0);
            assert!(g0.re >= 0.0 && g0.im == 0.0);
            let d = h.in_basis(&f.basis);
            let tol = 1e-12 * h.max_abs();
            assert!((d.get(0, 0).re - f.e_g).abs() < tol);
            assert!((d.get(1, 1).re - f.e_e).abs() < tol);
            assert!(d.get(0, 1).norm() < tol);
            assert!((f.omega * HBAR - (f.e_e - f.e_g)).abs() < 1e-15 * f.e_e.abs());
        }
    }

    #[test]
    fn weak_coupling_ground_state_is_empty_island() {
        let p = SluiceParams::reference();
        let c = ControlPoint::new(1e-9 * p.j_max, 1e-9 * p.j_max, 0.3);
        let f = eigenframe(&hamiltonian(&c, p.phi0, p.e_c), &OperatorMatrix::zeros(), None).unwrap();
        assert!(f.theta.abs() < 1e-9);
        assert!((f.basis.get(0, 0).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_matrix_is_rejected() {
        let h = OperatorMatrix::diag(2.0, 2.0);
        assert!(matches!(diagonalize(&h, None), Err(Error::DegenerateSpectrum { .. })));
    }

    #[test]
    fn closed_form_matches_finite_difference() {
        let p = SluiceParams::reference();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let dt = 1e-15;
        for _ in 0..50 {
            let c0 = ControlPoint::new(
                rng.random_range(p.j_min..p.j_max),
                rng.random_range(p.j_min..p.j_max),
                rng.random_range(0.2..0.8),
            );
            // rates typical of a 150 MHz cycle, with random signs
            let r = ControlPoint::new(
                rng.random_range(-1.0..1.0) * p.j_max * 1e9,
                rng.random_range(-1.0..1.0) * p.j_max * 1e9,
                rng.random_range(-1.0..1.0) * 1e9,
            );
            let phi0 = rng.random_range(0.0..TAU);
            let mid = frame_at(&p, &c0, &r, phi0, 0.0, None);
            let before = frame_at(&p, &c0, &r, phi0, -dt, Some(&mid));
            let after = frame_at(&p, &c0, &r, phi0, dt, Some(&mid));
            let fd = fd_w1(&before.basis, &mid.basis, &after.basis, dt);
            let scale = mid.w1.max_abs();
            assert!(mid.w1.is_hermitian(1e-14));
            assert!((fd - mid.w1).max_abs() < 1e-6 * scale, "fd {fd:?} vs {:?}", mid.w1);
        }
    }

    #[test]
    fn basis_stays_continuous_through_vanishing_tunnelling() {
        // φ0 = π with J_L crossing J_R makes ⟨0|H|1⟩ pass through zero.
        let p = SluiceParams::reference();
        let c0 = ControlPoint::new(p.j_min, p.j_max, 0.3);
        let r = ControlPoint::new(p.j_max, -p.j_max, 0.0);
        let n = 400;
        let dt = 1.0 / n as f64;
        let mut prev = frame_at(&p, &c0, &r, PI, 0.0, None);
        let mut max_jump: f64 = 0.0;
        for k in 1..=n {
            let f = frame_at(&p, &c0, &r, PI, k as f64 * dt, Some(&prev));
            max_jump = max_jump.max((f.basis - prev.basis).max_abs());
            assert!(f.w1.max_abs().is_finite());
            prev = f;
        }
        assert!(max_jump < 0.05, "{max_jump}");
    }

    #[test]
    fn twisted_gauge_velocity_matches_finite_difference() {
        let p = SluiceParams::reference();
        let twist = GaugeTwist::random(3, 3);
        let c0 = ControlPoint::new(0.6 * p.j_max, 0.2 * p.j_max, 0.45);
        let r = ControlPoint::new(-0.3 * p.j_max * 1e9, 0.5 * p.j_max * 1e9, 4e8);
        let f = p.f_pump;
        let (s0, dt) = (0.3, 1e-15);
        let tw = |t: f64, prev: Option<&Eigenframe>| {
            let base = frame_at(&p, &c0, &r, p.phi0, t, prev);
            (base, twist.apply(&base, s0 + t * f, f))
        };
        let (mid_raw, mid) = tw(0.0, None);
        let (_, before) = tw(-dt, Some(&mid_raw));
        let (_, after) = tw(dt, Some(&mid_raw));
        assert!(mid.basis.is_unitary(1e-12));
        let fd = fd_w1(&before.basis, &mid.basis, &after.basis, dt);
        assert!((fd - mid.w1).max_abs() < 1e-6 * mid.w1.max_abs());
        assert!(mid.w1.is_hermitian(1e-12));
    }

    #[test]
    fn twist_is_periodic() {
        let twist = GaugeTwist::random(11, 4);
        let a = twist.phases(0.0);
        let b = twist.phases(1.0);
        assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
    }
}
