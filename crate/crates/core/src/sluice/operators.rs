use num_complex::Complex64;

use super::schedule::ControlPoint;
use crate::constants::{E_CHARGE, HBAR};
use crate::operator::OperatorMatrix;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Island excess-pair number n̂ = |1⟩⟨1|.
pub fn number_op() -> OperatorMatrix {
    OperatorMatrix::diag(0.0, 1.0)
}

/// ⟨0|H_J|1⟩ for SQUID energies `j_l`, `j_r` at phase bias `phi0`.
fn josephson_offdiag(j_l: f64, j_r: f64, phi0: f64) -> Complex64 {
    let half = Complex64::from_polar(1.0, phi0 / 2.0);
    -(half * j_l + half.conj() * j_r) / 2.0
}

/// Charging plus Josephson Hamiltonian restricted to {|0⟩, |1⟩}.
pub fn hamiltonian(ctrl: &ControlPoint, phi0: f64, e_c: f64) -> OperatorMatrix {
    let ng = ctrl.n_g;
    OperatorMatrix::hermitian(
        e_c * ng * ng,
        josephson_offdiag(ctrl.j_l, ctrl.j_r, phi0),
        e_c * (1.0 - ng) * (1.0 - ng),
    )
}

/// Time derivative of [`hamiltonian`] along a control trajectory with
/// derivative `rate`.
pub fn hamiltonian_rate(ctrl: &ControlPoint, rate: &ControlPoint, phi0: f64, e_c: f64) -> OperatorMatrix {
    let ng = ctrl.n_g;
    OperatorMatrix::hermitian(
        2.0 * e_c * ng * rate.n_g,
        josephson_offdiag(rate.j_l, rate.j_r, phi0),
        -2.0 * e_c * (1.0 - ng) * rate.n_g,
    )
}

/// Current operators of the left and right SQUID, in amperes.
///
/// `I_L = (2ie/ħ)[n̂, H_L]` and `I_R = −(2ie/ħ)[n̂, H_R]`, where `H_k` is the
/// Josephson term of SQUID k. Hence `I_L − I_R = −(i/ħ)[Q̂, H]` with
/// `Q̂ = −2e n̂`: `I_L` flows onto the island, `I_R` flows off it.
pub fn current_operators(ctrl: &ControlPoint, phi0: f64) -> (OperatorMatrix, OperatorMatrix) {
    let n = number_op();
    let pref = Complex64::new(0.0, 2.0 * E_CHARGE / HBAR);
    let h_l = OperatorMatrix::hermitian(0.0, josephson_offdiag(ctrl.j_l, 0.0, phi0), 0.0);
    let h_r = OperatorMatrix::hermitian(0.0, josephson_offdiag(0.0, ctrl.j_r, phi0), 0.0);
    let i_l = n.commutator(&h_l).scale_complex(pref);
    let i_r = n.commutator(&h_r).scale_complex(-pref);
    (i_l, i_r)
}

/// Island charge Q̂ = −2e|1⟩⟨1|, in coulombs.
pub fn island_charge_op() -> OperatorMatrix {
    OperatorMatrix::diag(0.0, -2.0 * E_CHARGE)
}

/// Reduced SQUID charge operators `(Q_L, Q_R) = (−e n̂, +e n̂)`.
///
/// Identity parts are dropped: the dissipator is traceless, so they never
/// contribute to `Tr(L·Q_k)`.
pub fn squid_charge_ops() -> (OperatorMatrix, OperatorMatrix) {
    (
        OperatorMatrix::diag(0.0, -E_CHARGE),
        OperatorMatrix::diag(0.0, E_CHARGE),
    )
}

/// System part of the phase-noise coupling, ½(δJ*|0⟩⟨1| + δJ|1⟩⟨0|), in
/// joules per radian of δφ, with δJ = sin(φ0/2)·J₊ + i·cos(φ0/2)·J₋.
/// It equals ∂H/∂(φ/2) at φ0.
pub fn flux_coupling_op(ctrl: &ControlPoint, phi0: f64) -> OperatorMatrix {
    let j_plus = ctrl.j_l + ctrl.j_r;
    let j_minus = ctrl.j_l - ctrl.j_r;
    let (s, c) = (phi0 / 2.0).sin_cos();
    let delta_j = Complex64::new(s * j_plus, c * j_minus);
    OperatorMatrix::new(ZERO, delta_j.conj() / 2.0, delta_j / 2.0, ZERO)
}

/// System part of the gate-charge coupling, −2eλ·n̂.
pub fn charge_coupling_op(lambda: f64) -> OperatorMatrix {
    OperatorMatrix::diag(0.0, -2.0 * E_CHARGE * lambda)
}
