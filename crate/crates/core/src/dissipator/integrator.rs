use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::coupling::CouplingSpec;
use super::master::{DensityMatrix, DissipatorElements, Frame, Generator};
use crate::error::{Error, Result};
use crate::operator::OperatorMatrix;
use crate::sluice::{
    eigenframe, hamiltonian, hamiltonian_rate, ControlPoint, Eigenframe, GaugeTwist, PumpSchedule, SluiceParams,
};

/// Largest phase Ω·dt a single RK4 step may advance.
pub const MAX_PHASE_PER_STEP: f64 = 0.05;

/// A single step ending below this residual is rejected as a numerical
/// failure. Smaller excursions are clipped back onto the physical boundary:
/// the non-secular dissipator pushes nearly pure states outward at a rate of
/// order Γ·ρ_ee, so some clipping is expected whenever the state is close to
/// pure. Mixed states stay well inside and are never touched.
const POSITIVITY_FLOOR: f64 = -1e-4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteadyMethod {
    /// Solve for the fixed point of the one-cycle affine map, then verify it
    /// by direct propagation.
    #[default]
    FixedPoint,
    /// Propagate cycle after cycle from the ground state.
    Iterate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub steps_per_cycle: usize,
    pub frame: Frame,
    pub secular: bool,
    pub steady_tol: f64,
    pub max_cycles: usize,
    pub method: SteadyMethod,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            steps_per_cycle: 65536,
            frame: Frame::Adiabatic,
            secular: false,
            steady_tol: 1e-8,
            max_cycles: 200,
            method: SteadyMethod::FixedPoint,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps_per_cycle < 4096 {
            return Err(Error::Config(format!(
                "steps_per_cycle must be at least 4096, got {}",
                self.steps_per_cycle
            )));
        }
        if !(self.steady_tol > 0.0) {
            return Err(Error::Config(format!("steady_tol must be positive, got {}", self.steady_tol)));
        }
        if self.max_cycles == 0 {
            return Err(Error::Config("max_cycles must be at least 1".into()));
        }
        Ok(())
    }

    /// Power-of-two step count keeping Ω_max·dt ≤ `phase_per_step`, never
    /// below the default 65536.
    pub fn steps_for(omega_max: f64, f_pump: f64, phase_per_step: f64) -> usize {
        let need = (omega_max / f_pump / phase_per_step).ceil() as usize;
        need.next_power_of_two().max(65536)
    }
}

/// One point of the integration grid: segment index and cycle fraction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridNode {
    pub segment: usize,
    pub s: f64,
}

/// Everything recorded at a grid node, in the frame the state is stored in.
#[derive(Clone, Copy, Debug)]
pub struct TrajectorySample {
    pub t: f64,
    pub segment: usize,
    pub ctrl: ControlPoint,
    pub rho: DensityMatrix,
    /// Eigenbasis (columns |g⟩, |e⟩) the state and dissipator refer to.
    pub basis: OperatorMatrix,
    pub omega: f64,
    pub dissipator: DissipatorElements,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub period: f64,
    pub phi0: f64,
    pub samples: Vec<TrajectorySample>,
}

#[derive(Clone, Debug)]
pub struct CycleResult {
    /// State at the end of the cycle, in the basis of the cycle start.
    pub rho_final: DensityMatrix,
    pub trajectory: Option<Trajectory>,
    /// Smallest positivity residual met along the cycle.
    pub min_positivity: f64,
}

#[derive(Clone, Debug)]
pub struct SteadyState {
    pub rho_start: DensityMatrix,
    /// Number of full-cycle propagations performed.
    pub n_cycles: usize,
    pub residual: f64,
    /// The last verification cycle, when recording was requested.
    pub last_cycle: Option<CycleResult>,
}

struct Node {
    raw: Eigenframe,
    frame: Eigenframe,
    ctrl: ControlPoint,
    gen: Generator,
}

/// Fixed-step RK4 propagation of the two-level master equation over pump
/// cycles.
#[derive(Clone, Debug)]
pub struct Propagator {
    params: SluiceParams,
    schedule: PumpSchedule,
    coupling: CouplingSpec,
    cfg: IntegratorConfig,
    twist: Option<GaugeTwist>,
    /// Steps in each segment.
    steps: Vec<usize>,
}

fn rk4(rho: &DensityMatrix, a: &Generator, m: &Generator, b: &Generator, dt: f64) -> DensityMatrix {
    let k1 = a.apply(rho);
    let k2 = m.apply(&(*rho + k1 * (0.5 * dt)));
    let k3 = m.apply(&(*rho + k2 * (0.5 * dt)));
    let k4 = b.apply(&(*rho + k3 * dt));
    *rho + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// Clips tiny negative positivity residuals; rejects larger ones.
fn project(rho: DensityMatrix, t: f64) -> Result<(DensityMatrix, f64)> {
    let r = rho.positivity_residual();
    if r >= 0.0 {
        return Ok((rho, r));
    }
    if r < POSITIVITY_FLOOR || !r.is_finite() {
        return Err(Error::Positivity { t, residual: r });
    }
    let gg = rho.gg.clamp(0.0, 1.0);
    let allowed = (gg * (1.0 - gg)).sqrt();
    let norm = rho.ge.norm();
    let ge = if norm > allowed { rho.ge * (allowed / norm) } else { rho.ge };
    Ok((DensityMatrix::new(gg, ge), r))
}

impl Propagator {
    pub fn new(params: SluiceParams, schedule: PumpSchedule, coupling: CouplingSpec, cfg: IntegratorConfig) -> Result<Self> {
        params.validate()?;
        cfg.validate()?;
        schedule.validate_ranges(&params)?;
        let steps = schedule
            .segments()
            .iter()
            .map(|seg| ((cfg.steps_per_cycle as f64 * seg.duration_fraction).round() as usize).max(1))
            .collect();
        Ok(Self { params, schedule, coupling, cfg, twist: None, steps })
    }

    pub fn with_twist(mut self, twist: GaugeTwist) -> Self {
        self.twist = Some(twist);
        self
    }

    pub fn params(&self) -> &SluiceParams {
        &self.params
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.cfg
    }

    pub fn schedule(&self) -> &PumpSchedule {
        &self.schedule
    }

    pub fn coupling(&self) -> &CouplingSpec {
        &self.coupling
    }

    /// All grid nodes of one cycle, segment boundaries included once per side.
    pub fn grid(&self) -> Vec<GridNode> {
        let mut out = Vec::new();
        for (k, seg) in self.schedule.segments().iter().enumerate() {
            let n = self.steps[k];
            let s0 = self.schedule.segment_start(k);
            let start = if k == 0 { 0 } else { 1 };
            for j in start..=n {
                out.push(GridNode { segment: k, s: s0 + seg.duration_fraction * j as f64 / n as f64 });
            }
        }
        out
    }

    fn node(&self, segment: usize, s: f64, prev: Option<&Node>) -> Result<Node> {
        let p = &self.params;
        let (ctrl, per_cycle) = self.schedule.eval_in_segment(segment, s);
        let rate = ControlPoint::new(per_cycle.j_l * p.f_pump, per_cycle.j_r * p.f_pump, per_cycle.n_g * p.f_pump);
        let h = hamiltonian(&ctrl, p.phi0, p.e_c);
        let hd = hamiltonian_rate(&ctrl, &rate, p.phi0, p.e_c);
        let raw = eigenframe(&h, &hd, prev.map(|n| &n.raw))?;
        let frame = match &self.twist {
            Some(tw) => tw.apply(&raw, s, p.f_pump),
            None => raw,
        };
        let gen = if self.coupling.is_null() {
            Generator::new(&frame, &OperatorMatrix::zeros(), |_| 0.0, self.cfg.frame, self.cfg.secular, prev.map(|n| n.gen.chi2))?
        } else {
            let z = self.coupling.system_op(&ctrl, p.phi0).in_basis(&frame.basis);
            Generator::new(
                &frame,
                &z,
                |w| self.coupling.spectrum(w),
                self.cfg.frame,
                self.cfg.secular,
                prev.map(|n| n.gen.chi2),
            )?
        };
        Ok(Node { raw, frame, ctrl, gen })
    }

    fn check_step(&self, nodes: [&Node; 3], dt: f64) -> Result<()> {
        let omega = nodes.iter().map(|n| n.gen.omega).fold(0.0, f64::max);
        let phase = omega * dt.abs();
        if phase >= MAX_PHASE_PER_STEP {
            return Err(Error::StepSize { phase, limit: MAX_PHASE_PER_STEP });
        }
        Ok(())
    }

    /// One RK4 step of length `ds` (cycle fraction, may be negative) inside
    /// segment `segment`, starting at fraction `s`. `prev` keeps the eigenbasis
    /// gauge continuous; the returned frame is the one at `s + ds`.
    pub fn step(&self, rho: &DensityMatrix, segment: usize, s: f64, ds: f64, prev: Option<&Eigenframe>) -> Result<(DensityMatrix, Eigenframe)> {
        let seed = match prev {
            Some(f) => Some(self.node_from_frame(segment, s, f)?),
            None => None,
        };
        let a = self.node(segment, s, seed.as_ref())?;
        let m = self.node(segment, s + 0.5 * ds, Some(&a))?;
        let b = self.node(segment, s + ds, Some(&m))?;
        let dt = ds * self.params.period();
        self.check_step([&a, &m, &b], dt)?;
        let (out, _) = project(rk4(rho, &a.gen, &m.gen, &b.gen, dt), (s + ds) * self.params.period())?;
        Ok((out, b.raw))
    }

    fn node_from_frame(&self, segment: usize, s: f64, f: &Eigenframe) -> Result<Node> {
        let mut n = self.node(segment, s, None)?;
        n.raw = *f;
        Ok(n)
    }

    /// Propagates several states through one cycle on the shared grid.
    /// The first state is checked for positivity and handed to `visit` at
    /// every grid node. Returns the smallest positivity residual seen.
    fn sweep(&self, states: &mut [DensityMatrix], check: bool, mut visit: Option<&mut dyn FnMut(&TrajectorySample)>) -> Result<f64> {
        let period = self.params.period();
        let mut min_pos = f64::INFINITY;
        let mut first: Option<OperatorMatrix> = None;
        let mut prev: Option<Node> = None;
        let mut emit = |node: &Node, rho: &DensityMatrix, s: f64, segment: usize| {
            if let Some(f) = visit.as_mut() {
                f(&TrajectorySample {
                    t: s * period,
                    segment,
                    ctrl: node.ctrl,
                    rho: *rho,
                    basis: node.frame.basis,
                    omega: node.frame.omega,
                    dissipator: node.gen.dissipator(rho),
                });
            }
        };
        for (k, seg) in self.schedule.segments().iter().enumerate() {
            let n = self.steps[k];
            let s0 = self.schedule.segment_start(k);
            let ds = seg.duration_fraction / n as f64;
            let dt = ds * period;
            let mut a = self.node(k, s0, prev.as_ref())?;
            if first.is_none() {
                first = Some(a.frame.basis);
                emit(&a, &states[0], s0, k);
            }
            for j in 0..n {
                let s = s0 + ds * j as f64;
                let m = self.node(k, s + 0.5 * ds, Some(&a))?;
                let s_end = if j + 1 == n { s0 + seg.duration_fraction } else { s + ds };
                let b = self.node(k, s_end, Some(&m))?;
                self.check_step([&a, &m, &b], dt)?;
                for (i, rho) in states.iter_mut().enumerate() {
                    let next = rk4(rho, &a.gen, &m.gen, &b.gen, dt);
                    *rho = if check && i == 0 {
                        let (r, res) = project(next, s_end * period)?;
                        min_pos = min_pos.min(res);
                        r
                    } else {
                        next
                    };
                }
                emit(&b, &states[0], s_end, k);
                a = b;
            }
            prev = Some(a);
        }
        // Re-express the end state in the basis the cycle started from; the
        // two differ only by eigenvector phases.
        if let (Some(start), Some(end)) = (first, prev) {
            let p = start.adjoint() * end.frame.basis;
            let rot = p.get(0, 0) * p.get(1, 1).conj();
            for rho in states.iter_mut() {
                *rho = DensityMatrix::new(rho.gg, rho.ge * rot);
            }
        }
        Ok(min_pos)
    }

    /// Integrates one period from `rho0`, calling `visit` at every grid node
    /// (states in the instantaneous eigenbasis).
    pub fn visit_cycle<F: FnMut(&TrajectorySample)>(&self, rho0: DensityMatrix, mut visit: F) -> Result<CycleResult> {
        let mut st = [rho0];
        let min_positivity = self.sweep(&mut st, true, Some(&mut visit))?;
        Ok(CycleResult { rho_final: st[0], trajectory: None, min_positivity })
    }

    /// Integrates one period starting from `rho0` at t = 0.
    pub fn run_cycle(&self, rho0: DensityMatrix, record: bool) -> Result<CycleResult> {
        if !record {
            let mut st = [rho0];
            let min_positivity = self.sweep(&mut st, true, None)?;
            return Ok(CycleResult { rho_final: st[0], trajectory: None, min_positivity });
        }
        let mut samples = Vec::with_capacity(self.cfg.steps_per_cycle + 1);
        let mut res = self.visit_cycle(rho0, |s| samples.push(*s))?;
        res.trajectory = Some(Trajectory { period: self.params.period(), phi0: self.params.phi0, samples });
        Ok(res)
    }

    /// One-cycle affine map ρ → Aρ + b on (ρ_gg, Re ρ_ge, Im ρ_ge).
    pub fn cycle_map(&self) -> Result<(Matrix3<f64>, Vector3<f64>)> {
        let c = num_complex::Complex64::new;
        let mut st = [
            DensityMatrix::new(0.0, c(0.0, 0.0)),
            DensityMatrix::new(1.0, c(0.0, 0.0)),
            DensityMatrix::new(0.0, c(1.0, 0.0)),
            DensityMatrix::new(0.0, c(0.0, 1.0)),
        ];
        self.sweep(&mut st, false, None)?;
        let b = Vector3::from(st[0].to_array());
        let mut a = Matrix3::zeros();
        for i in 0..3 {
            let col = Vector3::from(st[i + 1].to_array()) - b;
            a.set_column(i, &col);
        }
        Ok((a, b))
    }

    /// Periodic steady state ρ(T) = ρ(0).
    pub fn steady_state(&self, record_last: bool) -> Result<SteadyState> {
        let tol = self.cfg.steady_tol;
        let mut n_cycles = 0;
        let mut rho = DensityMatrix::ground();
        if self.cfg.method == SteadyMethod::FixedPoint {
            let (a, b) = self.cycle_map()?;
            n_cycles += 1;
            let radius = a.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
            if radius < 1.0 - 1e-9 {
                if let Some(x) = (Matrix3::identity() - a).lu().solve(&b) {
                    let cand = DensityMatrix::from_array([x[0], x[1], x[2]]);
                    if let Ok((r, _)) = project(cand, 0.0) {
                        rho = r;
                    }
                }
            }
        }
        let mut residual = f64::INFINITY;
        while n_cycles < self.cfg.max_cycles.max(2) {
            let cyc = self.run_cycle(rho, record_last)?;
            n_cycles += 1;
            residual = cyc.rho_final.distance(&rho);
            if residual < tol {
                return Ok(SteadyState {
                    rho_start: rho,
                    n_cycles,
                    residual,
                    last_cycle: record_last.then_some(cyc),
                });
            }
            rho = cyc.rho_final;
        }
        Err(Error::SteadyStateNotReached { cycles: n_cycles, residual })
    }

    /// Largest gap frequency met on the grid, rad/s.
    pub fn omega_max(&self) -> Result<f64> {
        let mut w: f64 = 0.0;
        for k in 0..self.schedule.segments().len() {
            let s0 = self.schedule.segment_start(k);
            let len = self.schedule.segments()[k].duration_fraction;
            for j in 0..=64 {
                let n = self.node(k, s0 + len * j as f64 / 64.0, None)?;
                w = w.max(n.frame.omega);
            }
        }
        Ok(w)
    }
}
