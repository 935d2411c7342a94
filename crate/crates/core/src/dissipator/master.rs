use std::ops::{Add, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::rates::{rates_from_samples, RateSet, SpectrumSamples};
use crate::error::Result;
use crate::operator::OperatorMatrix;
use crate::sluice::{diagonalize, Eigenframe};

/// Basis in which the dissipator is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// Instantaneous eigenbasis of H_S.
    #[default]
    Adiabatic,
    /// Eigenbasis of the steered Hamiltonian D1†H_S D1 + ħw1.
    Superadiabatic,
}

impl std::str::FromStr for Frame {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "adiabatic" => Ok(Self::Adiabatic),
            "superadiabatic" => Ok(Self::Superadiabatic),
            other => Err(format!("unknown frame '{other}', expected adiabatic or superadiabatic")),
        }
    }
}

/// Two-level density matrix (ρ_gg, ρ_ge); ρ_ee = 1 − ρ_gg and ρ_eg = ρ_ge*.
///
/// The same struct also carries time derivatives, where the trace
/// constraint reads dρ_ee = −dρ_gg.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    pub gg: f64,
    pub ge: Complex64,
}

impl DensityMatrix {
    pub fn ground() -> Self {
        Self { gg: 1.0, ge: Complex64::new(0.0, 0.0) }
    }

    pub fn new(gg: f64, ge: Complex64) -> Self {
        Self { gg, ge }
    }

    pub fn ee(&self) -> f64 {
        1.0 - self.gg
    }

    /// ρ_gg·ρ_ee − |ρ_ge|²; non-negative for a physical state.
    pub fn positivity_residual(&self) -> f64 {
        self.gg * (1.0 - self.gg) - self.ge.norm_sqr()
    }

    pub fn to_matrix(&self) -> OperatorMatrix {
        OperatorMatrix::hermitian(self.gg, self.ge, 1.0 - self.gg)
    }

    /// Reads ρ_gg and ρ_ge from a trace-one Hermitian matrix.
    pub fn from_matrix(m: &OperatorMatrix) -> Self {
        Self { gg: m.get(0, 0).re, ge: m.get(0, 1) }
    }

    /// Expresses the state in the basis `u` (columns), i.e. u†ρu.
    pub fn in_basis(&self, u: &OperatorMatrix) -> Self {
        Self::from_matrix(&self.to_matrix().in_basis(u))
    }

    pub fn from_basis(&self, u: &OperatorMatrix) -> Self {
        Self::from_matrix(&self.to_matrix().from_basis(u))
    }

    /// Sup-norm distance used by the steady-state driver.
    pub fn distance(&self, other: &Self) -> f64 {
        (self.gg - other.gg).abs().max((self.ge - other.ge).norm())
    }

    pub(crate) fn to_array(self) -> [f64; 3] {
        [self.gg, self.ge.re, self.ge.im]
    }

    pub(crate) fn from_array(a: [f64; 3]) -> Self {
        Self { gg: a[0], ge: Complex64::new(a[1], a[2]) }
    }
}

impl Add for DensityMatrix {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { gg: self.gg + o.gg, ge: self.ge + o.ge }
    }
}

impl Mul<f64> for DensityMatrix {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self { gg: self.gg * s, ge: self.ge * s }
    }
}

/// Independent elements of the traceless dissipator: L_ee = −L_gg, L_eg = L_ge*.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct DissipatorElements {
    pub l_gg: f64,
    pub l_ge: Complex64,
}

impl DissipatorElements {
    pub fn to_matrix(&self) -> OperatorMatrix {
        OperatorMatrix::hermitian(self.l_gg, self.l_ge, -self.l_gg)
    }

    pub fn from_matrix(m: &OperatorMatrix) -> Self {
        Self { l_gg: m.get(0, 0).re, l_ge: m.get(0, 1) }
    }
}

/// The dissipative part of the master equation for `rho`, with the
/// secular approximation optionally applied.
pub fn dissipator_elements(rho: &DensityMatrix, rates: &RateSet, secular: bool) -> DissipatorElements {
    let p = rho.gg;
    let c = rho.ge;
    let decay = rates.gamma_ge + rates.gamma_eg;
    let dephase = 0.5 * (rates.gamma_eg + rates.gamma_ge) + rates.gamma_phi;
    if secular {
        return DissipatorElements {
            l_gg: -decay * p + rates.gamma_eg,
            l_ge: -dephase * c,
        };
    }
    DissipatorElements {
        l_gg: -decay * p + (rates.tilde0 * c).re + rates.gamma_eg,
        l_ge: -(rates.tilde_plus + rates.tilde_minus) * p - dephase * c
            + rates.gamma_alpha_plus_beta * c.conj()
            + rates.tilde_plus,
    }
}

/// Coherent part −i[K, ρ] for a Hermitian generator K in rad/s.
pub fn coherent_part(rho: &DensityMatrix, k: &OperatorMatrix) -> DensityMatrix {
    let c = rho.ge;
    let k_ge = k.get(0, 1);
    let split = k.get(0, 0).re - k.get(1, 1).re;
    let i = Complex64::i();
    DensityMatrix {
        gg: 2.0 * (k_ge * c.conj()).im,
        ge: -i * (split * c + k_ge * (1.0 - 2.0 * rho.gg)),
    }
}

/// dρ/dt in the frame where H_S is diag(E_g, E_e) and the steering term is
/// ħw1. With `w1 = 0` this is the plain eigenbasis master equation.
pub fn rhs(rho: &DensityMatrix, rates: &RateSet, omega: f64, w1: &OperatorMatrix, secular: bool) -> DensityMatrix {
    let k = OperatorMatrix::diag(0.0, omega) + *w1;
    let l = dissipator_elements(rho, rates, secular);
    coherent_part(rho, &k) + DensityMatrix { gg: l.l_gg, ge: l.l_ge }
}

/// Instantaneous generator of the adiabatic-frame dynamics: the coherent
/// part K = diag(0, Ω) + w1 and the dissipator, the latter possibly evaluated
/// in the superadiabatic basis D2 and rotated back.
#[derive(Clone, Copy, Debug)]
pub struct Generator {
    pub k: OperatorMatrix,
    pub rates: RateSet,
    /// Superadiabatic rotation (columns in the adiabatic basis), if used.
    pub d2: Option<OperatorMatrix>,
    pub secular: bool,
    /// Largest frequency the integrator must resolve, rad/s.
    pub omega: f64,
    /// Relative phase of D2, for gauge continuity.
    pub chi2: f64,
}

/// D2 in the gauge closest to the identity (real, non-negative diagonal).
fn near_identity(k: &OperatorMatrix, prev_chi: Option<f64>) -> Result<(OperatorMatrix, f64, f64)> {
    let d = diagonalize(k, prev_chi)?;
    let (s, c) = d.theta.sin_cos();
    let ph = Complex64::from_polar(1.0, d.chi);
    let u = OperatorMatrix::from_columns([Complex64::new(c, 0.0), ph * s], [-ph.conj() * s, Complex64::new(c, 0.0)]);
    Ok((u, d.gap(), d.chi))
}

impl Generator {
    /// `z_adiabatic` is the coupling operator in the (possibly twisted)
    /// eigenbasis of `frame`; `spectrum` maps ω to S(ω).
    pub fn new<F: Fn(f64) -> f64>(
        frame: &Eigenframe,
        z_adiabatic: &OperatorMatrix,
        spectrum: F,
        which: Frame,
        secular: bool,
        prev_chi2: Option<f64>,
    ) -> Result<Self> {
        let k = OperatorMatrix::diag(0.0, frame.omega) + frame.w1;
        let sample = |w: f64| SpectrumSamples { s_plus: spectrum(w), s_minus: spectrum(-w), s_zero: spectrum(0.0) };
        match which {
            Frame::Adiabatic => Ok(Self {
                k,
                rates: rates_from_samples(z_adiabatic, &sample(frame.omega)),
                d2: None,
                secular,
                omega: frame.omega,
                chi2: 0.0,
            }),
            Frame::Superadiabatic => {
                let (d2, omega2, chi2) = near_identity(&k, prev_chi2)?;
                let z2 = z_adiabatic.in_basis(&d2);
                Ok(Self {
                    k,
                    rates: rates_from_samples(&z2, &sample(omega2)),
                    d2: Some(d2),
                    secular,
                    omega: frame.omega.max(omega2),
                    chi2,
                })
            }
        }
    }

    /// Dissipator in the adiabatic basis.
    pub fn dissipator(&self, rho: &DensityMatrix) -> DissipatorElements {
        match &self.d2 {
            None => dissipator_elements(rho, &self.rates, self.secular),
            Some(d2) => {
                let inner = dissipator_elements(&rho.in_basis(d2), &self.rates, self.secular);
                DissipatorElements::from_matrix(&inner.to_matrix().from_basis(d2))
            }
        }
    }

    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        let l = self.dissipator(rho);
        coherent_part(rho, &self.k) + DensityMatrix { gg: l.l_gg, ge: l.l_ge }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_rates(v: &[f64]) -> RateSet {
        RateSet {
            gamma_ge: v[0].abs(),
            gamma_eg: v[1].abs(),
            gamma_phi: v[2].abs(),
            gamma_alpha_plus_beta: c(v[3], v[4]),
            tilde0: c(v[5], v[6]),
            tilde_plus: c(v[7], v[8]),
            tilde_minus: c(v[9], v[10]),
        }
    }

    #[test]
    fn free_precession() {
        let rho = DensityMatrix::new(0.7, c(0.1, -0.2));
        let omega = 3e10;
        let d = rhs(&rho, &RateSet::zero(), omega, &OperatorMatrix::zeros(), false);
        assert_eq!(d.gg, 0.0);
        assert!((d.ge - Complex64::i() * omega * rho.ge).norm() < 1e-6);
    }

    #[test]
    fn ground_state_is_dark_at_zero_temperature() {
        let rates = RateSet { gamma_eg: 1e7, ..RateSet::zero() };
        let l = dissipator_elements(&DensityMatrix::ground(), &rates, false);
        assert_eq!(l.l_gg, 0.0);
        assert_eq!(dissipator_elements(&DensityMatrix::ground(), &RateSet::zero(), false), DissipatorElements::default());
    }

    proptest! {
        #[test]
        fn dissipator_is_rhs_minus_coherent_part(
            v in proptest::collection::vec(-1e7f64..1e7, 11),
            gg in 0.0f64..1.0, re in -0.5f64..0.5, im in -0.5f64..0.5,
            w in 1e9f64..1e11, g in proptest::collection::vec(-1e8f64..1e8, 4),
        ) {
            let rates = random_rates(&v);
            let rho = DensityMatrix::new(gg, c(re, im));
            let w1 = OperatorMatrix::hermitian(g[0], c(g[1], g[2]), g[3]);
            for secular in [false, true] {
                let full = rhs(&rho, &rates, w, &w1, secular);
                let k = OperatorMatrix::diag(0.0, w) + w1;
                let coh = coherent_part(&rho, &k);
                let l = dissipator_elements(&rho, &rates, secular);
                prop_assert!((full.gg - coh.gg - l.l_gg).abs() <= 1e-12 * (full.gg.abs() + coh.gg.abs() + 1.0));
                prop_assert!((full.ge - coh.ge - l.l_ge).norm() <= 1e-12 * (full.ge.norm() + coh.ge.norm() + 1.0));
            }
        }

        #[test]
        fn coherent_part_matches_commutator(
            gg in 0.0f64..1.0, re in -0.5f64..0.5, im in -0.5f64..0.5,
            g in proptest::collection::vec(-1e9f64..1e9, 4),
        ) {
            let rho = DensityMatrix::new(gg, c(re, im));
            let k = OperatorMatrix::hermitian(g[0], c(g[1], g[2]), g[3]);
            let direct = k.commutator(&rho.to_matrix()).scale_complex(c(0.0, -1.0));
            let fast = coherent_part(&rho, &k);
            prop_assert!((direct.get(0, 0).re - fast.gg).abs() <= 1e-6);
            prop_assert!((direct.get(0, 1) - fast.ge).norm() <= 1e-6);
            // trace preserved: the ee entry is minus the gg entry
            prop_assert!((direct.get(1, 1).re + direct.get(0, 0).re).abs() <= 1e-6);
        }
    }

    #[test]
    fn superadiabatic_reduces_to_adiabatic_without_steering() {
        let frame = Eigenframe {
            e_g: 0.0,
            e_e: 1e-23,
            omega: 9e10,
            basis: OperatorMatrix::identity(),
            theta: 0.0,
            chi: 0.0,
            w1: OperatorMatrix::zeros(),
            fallback: false,
        };
        let z = OperatorMatrix::hermitian(1e-25, c(2e-25, 1e-25), -3e-25);
        let s = |w: f64| if w > 0.0 { 1e-23 * w } else { 0.0 };
        let a = Generator::new(&frame, &z, s, Frame::Adiabatic, false, None).unwrap();
        let b = Generator::new(&frame, &z, s, Frame::Superadiabatic, false, None).unwrap();
        let rho = DensityMatrix::new(0.8, c(0.1, 0.05));
        let (da, db) = (a.apply(&rho), b.apply(&rho));
        assert!((da.gg - db.gg).abs() < 1e-9 * da.gg.abs());
        assert!((da.ge - db.ge).norm() < 1e-9 * da.ge.norm());
        assert!(b.d2.unwrap().is_unitary(1e-14));
    }

    #[test]
    fn matrix_round_trip() {
        let rho = DensityMatrix::new(0.3, c(0.2, -0.1));
        assert_eq!(DensityMatrix::from_matrix(&rho.to_matrix()), rho);
        assert!((rho.positivity_residual() - (0.21 - 0.05)).abs() < 1e-15);
        let l = DissipatorElements { l_gg: 2.0, l_ge: c(1.0, 3.0) };
        assert_eq!(l.to_matrix().trace(), c(0.0, 0.0));
        assert_eq!(DissipatorElements::from_matrix(&l.to_matrix()), l);
    }
}
