use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate spectrum: gap {gap:e} J")]
    DegenerateSpectrum { gap: f64 },

    #[error("inductance pole at phi/phi0 = {phi_ctrl}")]
    InductancePole { phi_ctrl: f64 },

    #[error("near-resonance approximation is singular at phi/phi0 = {phi_ctrl}")]
    SingularApproximation { phi_ctrl: f64 },

    #[error("step too large: omega*dt = {phase:.3e} rad (limit {limit})")]
    StepSize { phase: f64, limit: f64 },

    #[error("positivity violated at t = {t:e} s: residual {residual:e}")]
    Positivity { t: f64, residual: f64 },

    #[error("steady state not reached after {cycles} cycles (residual {residual:e})")]
    SteadyStateNotReached { cycles: usize, residual: f64 },

    #[error(
        "quadrature did not converge on [{lo:e}, {hi:e}]: estimate {estimate:e}, \
         error {error:e} after {intervals} intervals"
    )]
    Quadrature {
        lo: f64,
        hi: f64,
        estimate: f64,
        error: f64,
        intervals: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
