//! Run configuration: one TOML section per module, every key optional.

use std::path::{Path, PathBuf};

use cooper_pump::constants::K_B;
use cooper_pump::dissipator::{Frame, IntegratorConfig, SteadyMethod};
use cooper_pump::noise::{EnvCircuitParams, L0Convention};
use cooper_pump::sluice::{ControlPoint, PumpSchedule, Segment, SluiceParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::grid::GridSpec;
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SluiceSection {
    /// E_C/k_B, K.
    pub e_c_kelvin: f64,
    /// J_max/E_C.
    pub j_max_ratio: f64,
    /// J_min/J_max.
    pub j_min_ratio: f64,
    pub ng_min: f64,
    pub ng_max: f64,
    /// Phase bias, rad.
    pub phi0: f64,
    /// Hz.
    pub f_pump: f64,
    pub lambda_charge: f64,
}

impl Default for SluiceSection {
    fn default() -> Self {
        let p = SluiceParams::reference();
        // literal ratios, so that spelling out a default leaves the hash alone
        Self {
            e_c_kelvin: 1.0,
            j_max_ratio: 0.1,
            j_min_ratio: 0.03,
            ng_min: p.ng_min,
            ng_max: p.ng_max,
            phi0: p.phi0,
            f_pump: p.f_pump,
            lambda_charge: p.lambda_charge,
        }
    }
}

impl SluiceSection {
    pub fn params(&self) -> SluiceParams {
        let e_c = self.e_c_kelvin * K_B;
        let j_max = self.j_max_ratio * e_c;
        SluiceParams {
            e_c,
            j_max,
            j_min: self.j_min_ratio * j_max,
            ng_min: self.ng_min,
            ng_max: self.ng_max,
            phi0: self.phi0,
            f_pump: self.f_pump,
            lambda_charge: self.lambda_charge,
        }
    }
}

/// Control point with Josephson energies in units of E_C.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub j_l: f64,
    pub j_r: f64,
    pub n_g: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub fraction: f64,
    pub start: PointSpec,
    pub end: PointSpec,
}

/// Optional waveform override; absent means the five-segment default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleSection {
    pub segments: Vec<SegmentSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvironmentSection {
    /// Ω.
    pub r: f64,
    /// Ω.
    pub r_s: f64,
    /// F.
    pub c_s: f64,
    /// A.
    pub i_c: f64,
    /// H.
    pub l: f64,
    /// H.
    pub m: f64,
    pub l0_convention: L0Convention,
}

impl Default for EnvironmentSection {
    fn default() -> Self {
        let e = EnvCircuitParams::default();
        Self { r: e.r, r_s: e.r_s, c_s: e.c_s, i_c: e.i_c, l: e.l, m: e.m, l0_convention: e.l0_convention }
    }
}

impl EnvironmentSection {
    pub fn params(&self, phi_ctrl: f64) -> EnvCircuitParams {
        EnvCircuitParams {
            r: self.r,
            r_s: self.r_s,
            c_s: self.c_s,
            i_c: self.i_c,
            l: self.l,
            m: self.m,
            phi_ctrl,
            l0_convention: self.l0_convention,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSection {
    pub steps_per_cycle: usize,
    pub frame: Frame,
    pub secular: bool,
    pub steady_tol: f64,
    pub max_cycles: usize,
    pub method: SteadyMethod,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let c = IntegratorConfig::default();
        Self {
            steps_per_cycle: c.steps_per_cycle,
            frame: c.frame,
            secular: c.secular,
            steady_tol: c.steady_tol,
            max_cycles: c.max_cycles,
            method: c.method,
        }
    }
}

impl IntegratorSection {
    pub fn config(&self) -> IntegratorConfig {
        IntegratorConfig {
            steps_per_cycle: self.steps_per_cycle,
            frame: self.frame,
            secular: self.secular,
            steady_tol: self.steady_tol,
            max_cycles: self.max_cycles,
            method: self.method,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    /// Frequency of the flux sweep, rad/s.
    pub omega_ref: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    /// Log-spaced frequencies per probe flux.
    pub n_omega: usize,
    /// Control fluxes of the frequency sweeps, units of Φ0.
    pub phi_probes: Vec<f64>,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self { omega_ref: 1.7e10, omega_min: 1e10, omega_max: 1e11, n_omega: 181, phi_probes: vec![0.5, 0.4991, 0.5003] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceSection {
    /// Units of Φ0.
    pub phi_ctrl: f64,
    /// Keep every `stride`-th grid node.
    pub stride: usize,
    /// left, right or device.
    pub squid: String,
}

impl Default for TraceSection {
    fn default() -> Self {
        Self { phi_ctrl: 1.0, stride: 16, squid: "left".into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatesSection {
    /// Frequency at which S_φ is evaluated per flux, rad/s.
    pub omega_ref: f64,
    /// Coupling matrix element in units of E_C.
    pub coupling_ratio: f64,
    /// Spectral densities whose decoherence times go in the summary, s.
    pub quoted_s: Vec<f64>,
    /// Alternative E_C given as a frequency E_C/h, Hz; 0 disables.
    pub e_c_frequency: f64,
    /// √A_Φ in units of Φ0.
    pub flux_noise_amplitude: f64,
    /// Reference 1/f dephasing time for the discrepancy factor, s.
    pub dephasing_target: f64,
}

impl Default for RatesSection {
    fn default() -> Self {
        Self {
            omega_ref: 7.9e10,
            coupling_ratio: 0.1,
            quoted_s: vec![3e-12, 2.8e-15],
            e_c_frequency: 21e9,
            flux_noise_amplitude: 1.7e-6,
            dephasing_target: 28e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LzsSection {
    /// Integration band of the phase variance, rad/s.
    pub omega_lo: f64,
    pub omega_hi: f64,
    pub n_samples: usize,
    /// Overrides for the crossing parameters; derived from the cycle when absent.
    pub p_lz: Option<f64>,
    pub alpha: Option<f64>,
}

impl Default for LzsSection {
    fn default() -> Self {
        Self { omega_lo: 1.7e10, omega_hi: 7.9e10, n_samples: 100_000, p_lz: None, alpha: None }
    }
}

/// Everything a run depends on. Worker count and output path are excluded
/// from the fingerprint since they never change the numbers.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(skip_serializing)]
    pub workers: Option<usize>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    pub sluice: SluiceSection,
    pub schedule: ScheduleSection,
    pub environment: EnvironmentSection,
    pub integrator: IntegratorSection,
    pub grid: GridSpec,
    pub spectrum: SpectrumSection,
    pub trace: TraceSection,
    pub rates: RatesSection,
    pub lzs: LzsSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn sluice(&self) -> SluiceParams {
        self.sluice.params()
    }

    pub fn schedule(&self) -> Result<PumpSchedule, CliError> {
        let p = self.sluice();
        if self.schedule.segments.is_empty() {
            return Ok(PumpSchedule::default_cycle(&p));
        }
        let pt = |s: &PointSpec| ControlPoint::new(s.j_l * p.e_c, s.j_r * p.e_c, s.n_g);
        let segs = self
            .schedule
            .segments
            .iter()
            .map(|s| Segment { duration_fraction: s.fraction, start: pt(&s.start), end: pt(&s.end) })
            .collect();
        Ok(PumpSchedule::new(segs)?)
    }

    pub fn environment(&self, phi_ctrl: f64) -> EnvCircuitParams {
        self.environment.params(phi_ctrl)
    }

    /// Checks every section before any computation starts.
    pub fn validate(&self) -> Result<(), CliError> {
        let p = self.sluice();
        p.validate()?;
        self.schedule()?.validate_ranges(&p)?;
        self.environment(0.0).validate()?;
        self.integrator.config().validate()?;
        self.grid.validate()?;
        let s = &self.spectrum;
        if !(s.omega_ref > 0.0 && s.omega_min > 0.0 && s.omega_max > s.omega_min) {
            return Err(CliError::Config("spectrum frequencies must satisfy 0 < omega_min < omega_max, omega_ref > 0".into()));
        }
        if s.n_omega < 2 {
            return Err(CliError::Config("spectrum.n_omega must be at least 2".into()));
        }
        if s.phi_probes.iter().any(|v| !(0.0..=2.0).contains(v)) {
            return Err(CliError::Config("spectrum.phi_probes must lie in [0, 2]".into()));
        }
        if !(0.0..=2.0).contains(&self.trace.phi_ctrl) {
            return Err(CliError::Config("trace.phi_ctrl must lie in [0, 2]".into()));
        }
        if self.trace.stride == 0 {
            return Err(CliError::Config("trace.stride must be at least 1".into()));
        }
        self.trace
            .squid
            .parse::<cooper_pump::observables::Squid>()
            .map_err(|e| CliError::Config(e.to_string()))?;
        let r = &self.rates;
        if !(r.omega_ref > 0.0 && r.coupling_ratio > 0.0 && r.e_c_frequency >= 0.0) {
            return Err(CliError::Config("rates.omega_ref and rates.coupling_ratio must be positive".into()));
        }
        if r.quoted_s.iter().any(|s| !(*s >= 0.0)) || !(r.flux_noise_amplitude >= 0.0) || !(r.dephasing_target > 0.0) {
            return Err(CliError::Config("rates: spectral densities and flux noise must be non-negative".into()));
        }
        let l = &self.lzs;
        if !(l.omega_lo > 0.0 && l.omega_hi > l.omega_lo) {
            return Err(CliError::Config("lzs band must satisfy 0 < omega_lo < omega_hi".into()));
        }
        if l.n_samples < 10_000 {
            return Err(CliError::Config(format!("lzs.n_samples must be at least 10000, got {}", l.n_samples)));
        }
        if l.p_lz.is_some_and(|p| !(0.0..=1.0).contains(&p)) {
            return Err(CliError::Config("lzs.p_lz must lie in [0, 1]".into()));
        }
        if self.workers == Some(0) {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        if let Some(out) = &self.out {
            check_writable(out)?;
        }
        Ok(())
    }

    /// SHA-256 of the canonical TOML rendering of the effective settings.
    pub fn fingerprint(&self) -> String {
        let text = toml::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

fn check_writable(out: &Path) -> Result<(), CliError> {
    let dir = match out.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let meta = std::fs::metadata(dir)
        .map_err(|e| CliError::Config(format!("output directory {} unusable: {e}", dir.display())))?;
    if !meta.is_dir() || meta.permissions().readonly() {
        return Err(CliError::Config(format!("output directory {} is not writable", dir.display())));
    }
    if out.is_dir() {
        return Err(CliError::Config(format!("output path {} is a directory", out.display())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.sluice(), SluiceParams::reference());
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(RunConfig::from_toml("[sluice]\nfoo = 1\n"), Err(CliError::Config(_))));
        assert!(matches!(RunConfig::from_toml("bogus = 2\n"), Err(CliError::Config(_))));
    }

    #[test]
    fn bad_values_fail_validation() {
        let c = RunConfig::from_toml("[grid]\nstop = 2.5\n").unwrap();
        assert!(matches!(c.validate(), Err(CliError::Config(_))));
        let c = RunConfig::from_toml("[sluice]\nng_max = 0.4\n").unwrap();
        assert!(matches!(c.validate(), Err(CliError::Config(_))));
        let c = RunConfig::from_toml("[integrator]\nsteps_per_cycle = 100\n").unwrap();
        assert!(matches!(c.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn schedule_override() {
        let text = r#"
[[schedule.segments]]
fraction = 0.5
start = { j_l = 0.1, j_r = 0.003, n_g = 0.2 }
end = { j_l = 0.1, j_r = 0.003, n_g = 0.8 }
[[schedule.segments]]
fraction = 0.5
start = { j_l = 0.1, j_r = 0.003, n_g = 0.8 }
end = { j_l = 0.1, j_r = 0.003, n_g = 0.2 }
"#;
        let c = RunConfig::from_toml(text).unwrap();
        let s = c.schedule().unwrap();
        assert_eq!(s.segments().len(), 2);
        assert!((s.segments()[0].start.j_l - 0.1 * K_B).abs() < 1e-30);
    }

    #[test]
    fn fingerprint_ignores_workers_and_output() {
        let a = RunConfig::default();
        let b = RunConfig { workers: Some(7), out: Some("x.csv".into()), ..Default::default() };
        assert_eq!(a.fingerprint(), b.fingerprint());
        let c = RunConfig { seed: 3, ..Default::default() };
        assert_ne!(a.fingerprint(), c.fingerprint());
        assert_eq!(a.fingerprint().len(), 64);
    }

    #[test]
    fn spelled_out_defaults_keep_the_fingerprint() {
        let text = "[sluice]\ne_c_kelvin = 1.0\nj_max_ratio = 0.1\nj_min_ratio = 0.03\nf_pump = 150e6\n";
        assert_eq!(RunConfig::from_toml(text).unwrap().fingerprint(), RunConfig::default().fingerprint());
    }
}
