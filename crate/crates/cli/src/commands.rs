//! The five report generators. Each returns a table; grid points are
//! independent and run on the current rayon pool, results kept in grid order.

use cooper_pump::constants::{PAIR_CHARGE, PLANCK};
use cooper_pump::dissipator::{CouplingSpec, DensityMatrix, Propagator};
use cooper_pump::lzs::{averaged_excitation, exact_gaussian_average, mc_average, LzsParams};
use cooper_pump::noise::{
    decoherence_time, gap_phase_slope, one_over_f_dephasing, phase_variance, resonance_features, s_phase,
    s_phase_approx, OneOverFParams,
};
use cooper_pump::observables::{breakdown_trace, integrate_cycle, Squid};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::table::{Cell, CsvTable};
use crate::CliError;

/// Result of one steady-state solve on the sweep grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PumpPoint {
    pub phi: f64,
    /// Device pumped charge per cycle, units of 2e.
    pub q_pumped: f64,
    /// Left-SQUID dissipative pumped charge per cycle, units of 2e.
    pub q_diss: f64,
    pub n_cycles: usize,
    pub residual: f64,
    /// Raw positivity residual minimum over the final cycle.
    pub min_positivity: f64,
    pub converged: bool,
}

fn propagator(cfg: &RunConfig, phi: f64) -> Result<Propagator, CliError> {
    let p = cfg.sluice();
    let coupling = CouplingSpec::Flux(cfg.environment(phi));
    Ok(Propagator::new(p, cfg.schedule()?, coupling, cfg.integrator.config())?)
}

/// A closed system has no unique steady state; it runs one cycle from the
/// ground state instead.
pub fn is_closed(cfg: &RunConfig) -> bool {
    cfg.environment.m == 0.0
}

/// Steady state and pumped charge at one control flux. Convergence failures
/// are reported in the returned record rather than as errors.
pub fn pump_point(cfg: &RunConfig, phi: f64) -> Result<PumpPoint, CliError> {
    let prop = propagator(cfg, phi)?;
    if is_closed(cfg) {
        let cyc = prop.run_cycle(DensityMatrix::ground(), true)?;
        let q = integrate_cycle(cyc.trajectory.as_ref().expect("recorded"))?;
        return Ok(PumpPoint {
            phi,
            q_pumped: q.device.q_pumped / PAIR_CHARGE,
            q_diss: q.left.q_pumped_diss / PAIR_CHARGE,
            n_cycles: 1,
            residual: 0.0,
            min_positivity: cyc.min_positivity,
            converged: true,
        });
    }
    let failed = |n_cycles, residual| PumpPoint {
        phi,
        q_pumped: 0.0,
        q_diss: 0.0,
        n_cycles,
        residual,
        min_positivity: 0.0,
        converged: false,
    };
    let ss = match prop.steady_state(true) {
        Ok(ss) => ss,
        Err(cooper_pump::Error::SteadyStateNotReached { cycles, residual }) => {
            return Ok(failed(cycles, if residual.is_finite() { residual } else { f64::MAX }))
        }
        Err(e) => return Err(e.into()),
    };
    let cyc = ss.last_cycle.expect("recorded");
    let q = integrate_cycle(cyc.trajectory.as_ref().expect("recorded"))?;
    Ok(PumpPoint {
        phi,
        q_pumped: q.device.q_pumped / PAIR_CHARGE,
        q_diss: q.left.q_pumped_diss / PAIR_CHARGE,
        n_cycles: ss.n_cycles,
        residual: ss.residual,
        min_positivity: cyc.min_positivity,
        converged: true,
    })
}

pub fn pump_sweep(cfg: &RunConfig, phis: &[f64]) -> Result<Vec<PumpPoint>, CliError> {
    phis.par_iter().map(|&phi| pump_point(cfg, phi)).collect()
}

/// Steady-state pumped charge over the flux grid.
pub fn cmd_pump(cfg: &RunConfig) -> Result<(CsvTable, usize), CliError> {
    let pts = pump_sweep(cfg, &cfg.grid.points())?;
    let mut t = CsvTable::new(
        "pump",
        &[
            ("phi_over_phi0", "Phi0"),
            ("q_pumped_over_2e", "2e"),
            ("q_diss_over_2e", "2e"),
            ("n_cycles", "count"),
            ("residual", "1"),
            ("min_positivity", "1"),
            ("converged", "bool"),
        ],
    );
    t.note("frame", format!("{:?}", cfg.integrator.frame).to_lowercase());
    if is_closed(cfg) {
        t.note("start", "closed system: one cycle from the ground state");
    }
    t.note("q_diss", "left SQUID; the device average vanishes identically");
    let mut ok = 0;
    for p in &pts {
        ok += p.converged as usize;
        t.push(vec![
            Cell::Num(p.phi),
            Cell::Num(p.q_pumped),
            Cell::Num(p.q_diss),
            Cell::Int(p.n_cycles as i64),
            Cell::Num(p.residual),
            Cell::Num(p.min_positivity),
            Cell::Int(p.converged as i64),
        ])?;
    }
    t.note("converged", format!("{ok}/{}", pts.len()));
    Ok((t, ok))
}

/// Current breakdown along the steady-state cycle at one control flux.
pub fn cmd_trace(cfg: &RunConfig) -> Result<CsvTable, CliError> {
    let squid: Squid = cfg.trace.squid.parse()?;
    let prop = propagator(cfg, cfg.trace.phi_ctrl)?;
    let (traj, cycles) = if is_closed(cfg) {
        let cyc = prop.run_cycle(DensityMatrix::ground(), true)?;
        (cyc.trajectory.expect("recorded"), "closed system: one cycle from the ground state".to_string())
    } else {
        let ss = prop.steady_state(true)?;
        let traj = ss.last_cycle.and_then(|c| c.trajectory).expect("recorded");
        (traj, format!("{} (residual {:e})", ss.n_cycles, ss.residual))
    };
    let parts = breakdown_trace(&traj, squid);
    let mut t = CsvTable::new(
        "trace",
        &[
            ("t_over_T", "1"),
            ("i_dyn", "A"),
            ("i_geo", "A"),
            ("i_dyn_diss", "A"),
            ("i_geo_diss", "A"),
            ("rho_gg", "1"),
        ],
    );
    let n = traj.samples.len();
    let stride = cfg.trace.stride;
    for k in (0..n).filter(|k| k % stride == 0 || *k == n - 1) {
        let (s, b) = (&traj.samples[k], &parts[k]);
        t.push(vec![
            Cell::Num(s.t / traj.period),
            Cell::Num(b.i_dyn),
            Cell::Num(b.i_geo),
            Cell::Num(b.i_dyn_diss),
            Cell::Num(b.i_geo_diss),
            Cell::Num(s.rho.gg),
        ])?;
    }
    let max = |f: fn(&cooper_pump::observables::CurrentBreakdown) -> f64| parts.iter().map(|b| f(b).abs()).fold(0.0, f64::max);
    let geo = max(|b| b.i_geo);
    let diss = max(|b| b.i_dyn_diss).max(max(|b| b.i_geo_diss));
    let q = integrate_cycle(&traj)?;
    t.note("phi_over_phi0", format!("{}", cfg.trace.phi_ctrl));
    t.note("squid", cfg.trace.squid.clone());
    t.note("max_abs_i_geo_A", format!("{geo:e}"));
    t.note("max_abs_i_diss_A", format!("{diss:e}"));
    t.note("diss_over_geo", format!("{:e}", if geo > 0.0 { diss / geo } else { 0.0 }));
    t.note("q_pumped_device_over_2e", format!("{:e}", q.device.q_pumped / PAIR_CHARGE));
    t.note("q_diss_left_over_2e", format!("{:e}", q.left.q_pumped_diss / PAIR_CHARGE));
    t.note("steady_cycles", cycles);
    Ok(t)
}

/// Near-resonance closed form, shifted to the nearest resonance; `None` away
/// from the resonances or exactly on one.
pub fn approx_near_resonance(cfg: &RunConfig, omega: f64, phi: f64) -> Option<f64> {
    [0.5, 1.5].iter().find_map(|&c| {
        let x = phi - c;
        if x.abs() > 0.05 || x == 0.0 {
            return None;
        }
        // cos(π(3/2 + x)) = cos(π(1/2 − x)): the upper resonance is mirrored
        let y = if c > 1.0 { -x } else { x };
        s_phase_approx(omega, &cfg.environment(0.5 + y)).ok()
    })
}

pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
}

/// Phase-noise spectrum: a flux sweep at the reference frequency followed by
/// frequency sweeps at the probe fluxes.
pub fn cmd_spectrum(cfg: &RunConfig) -> Result<CsvTable, CliError> {
    let sc = &cfg.spectrum;
    let mut t = CsvTable::new(
        "spectrum",
        &[
            ("sweep", "0 flux | 1 frequency"),
            ("phi_over_phi0", "Phi0"),
            ("omega", "rad/s"),
            ("s_phase", "s"),
            ("s_phase_approx", "s"),
            ("approx_valid", "bool"),
            ("ratio_to_zero_flux", "1"),
        ],
    );
    let row = |t: &mut CsvTable, sweep: i64, phi: f64, omega: f64| -> Result<f64, CliError> {
        let s = s_phase(omega, &cfg.environment(phi));
        let base = s_phase(omega, &cfg.environment(0.0));
        let approx = approx_near_resonance(cfg, omega, phi);
        t.push(vec![
            Cell::Int(sweep),
            Cell::Num(phi),
            Cell::Num(omega),
            Cell::Num(s),
            Cell::Num(approx.unwrap_or(0.0)),
            Cell::Int(approx.is_some() as i64),
            Cell::Num(if base > 0.0 { s / base } else { 0.0 }),
        ])?;
        Ok(s)
    };
    let mut flux = Vec::new();
    for phi in cfg.grid.points() {
        flux.push(row(&mut t, 0, phi, sc.omega_ref)?);
    }
    for &phi in &sc.phi_probes {
        for w in log_space(sc.omega_min, sc.omega_max, sc.n_omega) {
            row(&mut t, 1, phi, w)?;
        }
    }
    let f = resonance_features(sc.omega_ref, &cfg.environment(0.5));
    let (lo, hi) = flux.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    t.note("phi_max_closed_form", format!("{:e}", f.phi_max));
    t.note("width_closed_form", format!("{:e}", f.width));
    t.note("s_max_closed_form_s", format!("{:e}", f.s_max));
    t.note("s_min_s", format!("{:e}", f.s_min));
    t.note("flux_sweep_min_over_max", format!("{:e}", if hi > 0.0 { lo / hi } else { 0.0 }));
    Ok(t)
}

/// Decoherence times from the spectrum, plus the fixed-input budget.
pub fn cmd_rates(cfg: &RunConfig) -> Result<CsvTable, CliError> {
    let rc = &cfg.rates;
    if cfg.environment.m == 0.0 {
        return Err(CliError::Config("rates needs a coupled environment (M > 0)".into()));
    }
    let p = cfg.sluice();
    let coupling = rc.coupling_ratio * p.e_c;
    let mut t = CsvTable::new("rates", &[("phi_over_phi0", "Phi0"), ("s_at_omega_ref", "s"), ("tau", "s")]);
    for phi in cfg.grid.points() {
        let s = s_phase(rc.omega_ref, &cfg.environment(phi));
        t.push(vec![Cell::Num(phi), Cell::Num(s), Cell::Num(decoherence_time(coupling, s))])?;
    }
    for b in budget(cfg) {
        t.note(b.0, b.1);
    }
    Ok(t)
}

/// Summary lines of the decoherence budget.
pub fn budget(cfg: &RunConfig) -> Vec<(String, String)> {
    let rc = &cfg.rates;
    let p = cfg.sluice();
    let mut out = Vec::new();
    for &s in &rc.quoted_s {
        let from_kelvin = decoherence_time(rc.coupling_ratio * p.e_c, s);
        let mut line = format!("{from_kelvin:e} (E_C/k_B = {} K)", p.e_c_kelvin());
        if rc.e_c_frequency > 0.0 {
            let from_freq = decoherence_time(rc.coupling_ratio * PLANCK * rc.e_c_frequency, s);
            line += &format!("; {from_freq:e} (E_C/h = {:e} Hz)", rc.e_c_frequency);
        }
        out.push((format!("tau_s[S={s:e} s]"), line));
    }
    let slope = gap_phase_slope(p.j_min, p.j_max, p.phi0);
    let flux = OneOverFParams::from_flux_quanta(rc.flux_noise_amplitude);
    if let Ok(d) = one_over_f_dephasing(&flux, slope) {
        out.push(("one_over_f_slope_rad_per_s".into(), format!("{slope:e}")));
        out.push(("one_over_f_tau_s".into(), format!("{:e}", d.tau)));
        out.push(("one_over_f_reference_s".into(), format!("{:e}", rc.dephasing_target)));
        out.push(("one_over_f_factor".into(), format!("{:e}", d.tau / rc.dephasing_target)));
    }
    out
}

/// Crossing parameters from the config overrides or the pump cycle.
pub fn lzs_params(cfg: &RunConfig) -> Result<LzsParams, CliError> {
    let derived = LzsParams::from_default_cycle(&cfg.sluice())?;
    let l = &cfg.lzs;
    if l.p_lz.is_none() && l.alpha.is_none() {
        return Ok(derived);
    }
    Ok(LzsParams::quarter_bias(l.p_lz.unwrap_or(derived.p_lz), l.alpha.unwrap_or(derived.alpha))?)
}

/// Excitation probability estimates against the band-limited phase variance.
pub fn cmd_lzs(cfg: &RunConfig) -> Result<CsvTable, CliError> {
    let l = &cfg.lzs;
    let p = lzs_params(cfg)?;
    let phis = cfg.grid.points();
    let rows: Vec<Vec<Cell>> = phis
        .par_iter()
        .enumerate()
        .map(|(k, &phi)| {
            let var = phase_variance(&cfg.environment(phi), l.omega_lo, l.omega_hi)?;
            let avg = averaged_excitation(&p, var)?;
            let mc = mc_average(&p, var, l.n_samples, cfg.seed.wrapping_add(k as u64))?;
            Ok(vec![
                Cell::Num(phi),
                Cell::Num(var),
                Cell::Num(avg.linearized),
                Cell::Num(avg.linearized_expanded),
                Cell::Num(exact_gaussian_average(&p, var)),
                Cell::Num(mc.mean),
                Cell::Num(mc.std_error),
                Cell::Int(avg.valid as i64),
            ])
        })
        .collect::<Result<_, CliError>>()?;
    let mut t = CsvTable::new(
        "lzs",
        &[
            ("phi_over_phi0", "Phi0"),
            ("variance", "rad^2"),
            ("p_e_linearized", "1"),
            ("p_e_linearized_expanded", "1"),
            ("p_e_exact_gaussian", "1"),
            ("p_e_mc", "1"),
            ("mc_std_error", "1"),
            ("linear_valid", "bool"),
        ],
    );
    for r in rows {
        t.push(r)?;
    }
    t.note("p_lz", format!("{:e}", p.p_lz));
    t.note("alpha_rad", format!("{:e}", p.alpha));
    t.note("p_e0", format!("{:e}", p.p_e0));
    t.note("band_rad_per_s", format!("[{:e}, {:e}]", l.omega_lo, l.omega_hi));
    Ok(t)
}
