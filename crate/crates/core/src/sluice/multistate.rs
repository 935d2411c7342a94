use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::schedule::ControlPoint;
use crate::constants::{E_CHARGE, HBAR};
use crate::error::{Error, Result};

/// Hamiltonian and current operators on `n` charge states centred on the
/// {|0⟩, |1⟩} pair. Used to check the two-state truncation.
#[derive(Clone, Debug)]
pub struct MultiStateOracle {
    /// Island charge number of each basis state, ascending.
    pub charges: Vec<i64>,
    pub h: DMatrix<Complex64>,
    pub i_l: DMatrix<Complex64>,
    pub i_r: DMatrix<Complex64>,
}

impl MultiStateOracle {
    /// Basis index of charge state `n`.
    pub fn index_of(&self, n: i64) -> Option<usize> {
        self.charges.iter().position(|&c| c == n)
    }

    /// Island charge −2e·n̂ on the full space.
    pub fn island_charge(&self) -> DMatrix<Complex64> {
        DMatrix::from_diagonal(&DVector::from_iterator(
            self.charges.len(),
            self.charges.iter().map(|&n| Complex64::new(-2.0 * E_CHARGE * n as f64, 0.0)),
        ))
    }

    /// Lowest eigenvalue and its normalized eigenvector.
    pub fn ground_state(&self) -> (f64, DVector<Complex64>) {
        let eig = self.h.clone().symmetric_eigen();
        let k = eig.eigenvalues.imin();
        (eig.eigenvalues[k], eig.eigenvectors.column(k).into_owned())
    }

    /// ⟨ψ|A|ψ⟩ for a normalized ψ.
    pub fn expectation(a: &DMatrix<Complex64>, psi: &DVector<Complex64>) -> Complex64 {
        psi.dotc(&(a * psi))
    }
}

fn ladder(n: usize, amp: Complex64) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(n, n);
    for k in 0..n - 1 {
        m[(k, k + 1)] = amp;
        m[(k + 1, k)] = amp.conj();
    }
    m
}

/// Builds the `n_states`-level oracle. Charges run from −(n−1)/2 to (n−1)/2.
pub fn oracle_multistate(ctrl: &ControlPoint, phi0: f64, e_c: f64, n_states: usize) -> Result<MultiStateOracle> {
    if n_states < 5 || n_states % 2 == 0 {
        return Err(Error::Argument(format!(
            "multistate oracle needs an odd number of states >= 5, got {n_states}"
        )));
    }
    let half = (n_states as i64 - 1) / 2;
    let charges: Vec<i64> = (-half..=half).collect();
    let ph = Complex64::from_polar(1.0, phi0 / 2.0);
    let h_l = ladder(n_states, -ph * ctrl.j_l / 2.0);
    let h_r = ladder(n_states, -ph.conj() * ctrl.j_r / 2.0);
    let mut h = &h_l + &h_r;
    for (k, &n) in charges.iter().enumerate() {
        let x = n as f64 - ctrl.n_g;
        h[(k, k)] += Complex64::new(e_c * x * x, 0.0);
    }
    let num = DMatrix::from_diagonal(&DVector::from_iterator(
        n_states,
        charges.iter().map(|&n| Complex64::new(n as f64, 0.0)),
    ));
    let pref = Complex64::new(0.0, 2.0 * E_CHARGE / HBAR);
    let i_l = (&num * &h_l - &h_l * &num) * pref;
    let i_r = (&num * &h_r - &h_r * &num) * (-pref);
    Ok(MultiStateOracle { charges, h, i_l, i_r })
}
