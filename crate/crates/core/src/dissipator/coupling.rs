use std::fmt;
use std::sync::Arc;

use crate::noise::{EnvCircuitParams, SpectralDensity};
use crate::operator::OperatorMatrix;
use crate::sluice::{charge_coupling_op, flux_coupling_op, ControlPoint};

/// System operator provider for a custom coupling: (control point, φ0) → Z.
pub type OperatorFn = dyn Fn(&ControlPoint, f64) -> OperatorMatrix + Send + Sync;

/// The system–environment coupling H_I = Z ⊗ X, as the system factor Z in the
/// charge basis and the spectrum S of X.
#[derive(Clone)]
pub enum CouplingSpec {
    /// Closed system.
    None,
    /// Phase noise from the engineered circuit: Z = ∂H/∂(φ/2), X = δφ.
    Flux(EnvCircuitParams),
    /// Gate-charge noise: Z = −2eλ·n̂.
    Charge { lambda: f64, spectrum: Arc<dyn SpectralDensity> },
    Custom { op: Arc<OperatorFn>, spectrum: Arc<dyn SpectralDensity> },
}

impl CouplingSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Flux(_) => "flux",
            Self::Charge { .. } => "charge",
            Self::Custom { .. } => "custom",
        }
    }

    /// Z in the charge basis at `ctrl`.
    pub fn system_op(&self, ctrl: &ControlPoint, phi0: f64) -> OperatorMatrix {
        match self {
            Self::None => OperatorMatrix::zeros(),
            Self::Flux(_) => flux_coupling_op(ctrl, phi0),
            Self::Charge { lambda, .. } => charge_coupling_op(*lambda),
            Self::Custom { op, .. } => op(ctrl, phi0),
        }
    }

    pub fn spectrum(&self, omega: f64) -> f64 {
        match self {
            Self::None => 0.0,
            Self::Flux(env) => env.s(omega),
            Self::Charge { spectrum, .. } | Self::Custom { spectrum, .. } => spectrum.s(omega),
        }
    }

    /// True when every rate is identically zero.
    pub fn is_null(&self) -> bool {
        match self {
            Self::None => true,
            Self::Flux(env) => env.m == 0.0,
            Self::Charge { lambda, .. } => *lambda == 0.0,
            Self::Custom { .. } => false,
        }
    }
}

impl fmt::Debug for CouplingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Flux(env) => f.debug_tuple("Flux").field(env).finish(),
            Self::Charge { lambda, .. } => f.debug_struct("Charge").field("lambda", lambda).finish_non_exhaustive(),
            other => f.write_str(other.kind()),
        }
    }
}
