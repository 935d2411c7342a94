use serde::{Deserialize, Serialize};

use super::params::SluiceParams;
use crate::error::{Error, Result};

/// Instantaneous control values: Josephson energies of the two SQUIDs (J) and
/// the normalized gate charge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlPoint {
    pub j_l: f64,
    pub j_r: f64,
    pub n_g: f64,
}

impl ControlPoint {
    pub fn new(j_l: f64, j_r: f64, n_g: f64) -> Self {
        Self { j_l, j_r, n_g }
    }

    fn lerp(&self, other: &Self, s: f64) -> Self {
        Self {
            j_l: self.j_l + (other.j_l - self.j_l) * s,
            j_r: self.j_r + (other.j_r - self.j_r) * s,
            n_g: self.n_g + (other.n_g - self.n_g) * s,
        }
    }

    fn diff(&self, other: &Self) -> Self {
        Self {
            j_l: other.j_l - self.j_l,
            j_r: other.j_r - self.j_r,
            n_g: other.n_g - self.n_g,
        }
    }

    fn scaled(&self, s: f64) -> Self {
        Self {
            j_l: self.j_l * s,
            j_r: self.j_r * s,
            n_g: self.n_g * s,
        }
    }
}

/// One linear piece of the control waveform.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub duration_fraction: f64,
    pub start: ControlPoint,
    pub end: ControlPoint,
}

/// A periodic piecewise-linear waveform for (J_L, J_R, n_g) over one period.
#[derive(Clone, Debug, PartialEq)]
pub struct PumpSchedule {
    segments: Vec<Segment>,
    /// Cumulative start fraction of each segment.
    starts: Vec<f64>,
}

/// Control values together with their time derivative (per second) and the
/// index of the segment that produced them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleSample {
    pub ctrl: ControlPoint,
    pub rate: ControlPoint,
    pub segment: usize,
}

const FRACTION_TOL: f64 = 1e-12;

impl PumpSchedule {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Config("schedule has no segments".into()));
        }
        let mut starts = Vec::with_capacity(segments.len());
        let mut acc = 0.0;
        for (k, seg) in segments.iter().enumerate() {
            if !(seg.duration_fraction > 0.0) || !seg.duration_fraction.is_finite() {
                return Err(Error::Config(format!(
                    "segment {k} has non-positive duration fraction {}",
                    seg.duration_fraction
                )));
            }
            starts.push(acc);
            acc += seg.duration_fraction;
        }
        if (acc - 1.0).abs() > FRACTION_TOL {
            return Err(Error::Config(format!("segment fractions sum to {acc}, expected 1")));
        }
        let n = segments.len();
        for k in 0..n {
            let a = segments[k].end;
            let b = segments[(k + 1) % n].start;
            let scale = [a.j_l, a.j_r, b.j_l, b.j_r]
                .iter()
                .fold(0.0_f64, |m, v| m.max(v.abs()));
            let d = a.diff(&b);
            if d.j_l.abs() > 1e-12 * scale || d.j_r.abs() > 1e-12 * scale || d.n_g.abs() > 1e-12 {
                return Err(Error::Config(format!(
                    "waveform is discontinuous between segment {k} and {}",
                    (k + 1) % n
                )));
            }
        }
        Ok(Self { segments, starts })
    }

    /// Five equal segments: open the left SQUID, ramp the gate up, hand over
    /// from left to right, ramp the gate down, close the right SQUID.
    pub fn default_cycle(p: &SluiceParams) -> Self {
        let (lo, hi) = (p.j_min, p.j_max);
        let pts = [
            ControlPoint::new(lo, lo, p.ng_min),
            ControlPoint::new(hi, lo, p.ng_min),
            ControlPoint::new(hi, lo, p.ng_max),
            ControlPoint::new(lo, hi, p.ng_max),
            ControlPoint::new(lo, hi, p.ng_min),
        ];
        let segments = (0..5)
            .map(|k| Segment {
                duration_fraction: 0.2,
                start: pts[k],
                end: pts[(k + 1) % 5],
            })
            .collect();
        Self::new(segments).expect("default cycle is well formed")
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment_start(&self, k: usize) -> f64 {
        self.starts[k]
    }

    /// The same path traversed backwards in time.
    pub fn reversed(&self) -> Self {
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|s| Segment {
                duration_fraction: s.duration_fraction,
                start: s.end,
                end: s.start,
            })
            .collect();
        Self::new(segments).expect("reversal preserves validity")
    }

    /// Every control value must stay inside the device ranges.
    pub fn validate_ranges(&self, p: &SluiceParams) -> Result<()> {
        let j_ok = |j: f64| j >= p.j_min * (1.0 - 1e-12) && j <= p.j_max * (1.0 + 1e-12);
        let ng_ok = |n: f64| n >= p.ng_min - 1e-12 && n <= p.ng_max + 1e-12;
        for (k, s) in self.segments.iter().enumerate() {
            for c in [s.start, s.end] {
                if !(j_ok(c.j_l) && j_ok(c.j_r) && ng_ok(c.n_g)) {
                    return Err(Error::Config(format!(
                        "segment {k} leaves the allowed control range: {c:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Segment containing cycle fraction `s ∈ [0, 1)`.
    pub fn locate(&self, s: f64) -> usize {
        match self.starts.partition_point(|&st| st <= s) {
            0 => 0,
            k => k - 1,
        }
    }

    /// Values at cycle fraction `s` using segment `k`'s linear law, together
    /// with the derivative with respect to the cycle fraction. `s` may sit on
    /// either boundary of the segment.
    pub fn eval_in_segment(&self, k: usize, s: f64) -> (ControlPoint, ControlPoint) {
        let seg = &self.segments[k];
        let u = ((s - self.starts[k]) / seg.duration_fraction).clamp(0.0, 1.0);
        let ctrl = seg.start.lerp(&seg.end, u);
        let rate = seg.start.diff(&seg.end).scaled(1.0 / seg.duration_fraction);
        (ctrl, rate)
    }
}

fn cycle_fraction(p: &SluiceParams, t: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Argument(format!("time must be finite and non-negative, got {t}")));
    }
    let s = (t * p.f_pump).fract();
    Ok(if s >= 1.0 { 0.0 } else { s })
}

/// Control values at time `t` (periodic with T_ad = 1/f).
pub fn eval_schedule(schedule: &PumpSchedule, p: &SluiceParams, t: f64) -> Result<ControlPoint> {
    Ok(sample_schedule(schedule, p, t)?.ctrl)
}

/// Control values and their time derivative at `t`.
pub fn sample_schedule(schedule: &PumpSchedule, p: &SluiceParams, t: f64) -> Result<ScheduleSample> {
    let s = cycle_fraction(p, t)?;
    let k = schedule.locate(s);
    let (ctrl, rate) = schedule.eval_in_segment(k, s);
    Ok(ScheduleSample {
        ctrl,
        rate: rate.scaled(p.f_pump),
        segment: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params() -> SluiceParams {
        SluiceParams::reference()
    }

    #[test]
    fn starts_closed_at_low_gate() {
        let p = params();
        let s = PumpSchedule::default_cycle(&p);
        let c = eval_schedule(&s, &p, 0.0).unwrap();
        assert_eq!(c, ControlPoint::new(p.j_min, p.j_min, p.ng_min));
    }

    #[test]
    fn gate_ramp_midpoint() {
        let p = params();
        let s = PumpSchedule::default_cycle(&p);
        let c = eval_schedule(&s, &p, 0.3 * p.period()).unwrap();
        assert!((c.j_l - p.j_max).abs() < 1e-12 * p.j_max);
        assert!((c.j_r - p.j_min).abs() < 1e-12 * p.j_max);
        assert!((c.n_g - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_fractions_not_summing_to_one() {
        let p = params();
        let mut segs = PumpSchedule::default_cycle(&p).segments().to_vec();
        segs[0].duration_fraction = 0.3;
        assert!(matches!(PumpSchedule::new(segs), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_discontinuity() {
        let p = params();
        let mut segs = PumpSchedule::default_cycle(&p).segments().to_vec();
        segs[2].start.n_g = 0.7;
        assert!(PumpSchedule::new(segs).is_err());
    }

    #[test]
    fn derivative_is_piecewise_constant() {
        let p = params();
        let s = PumpSchedule::default_cycle(&p);
        let a = sample_schedule(&s, &p, 0.25 * p.period()).unwrap();
        let b = sample_schedule(&s, &p, 0.35 * p.period()).unwrap();
        assert_eq!(a.segment, 1);
        assert_eq!(a.rate, b.rate);
        let expect = (p.ng_max - p.ng_min) / (0.2 * p.period());
        assert!((a.rate.n_g - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn reversed_visits_same_points() {
        let p = params();
        let s = PumpSchedule::default_cycle(&p);
        let r = s.reversed();
        let t = 0.37 * p.period();
        let a = eval_schedule(&s, &p, t).unwrap();
        let b = eval_schedule(&r, &p, p.period() - t).unwrap();
        assert!((a.n_g - b.n_g).abs() < 1e-12);
        assert!((a.j_l - b.j_l).abs() < 1e-12 * p.j_max);
    }

    #[test]
    fn negative_time_is_rejected() {
        let p = params();
        let s = PumpSchedule::default_cycle(&p);
        assert!(matches!(eval_schedule(&s, &p, -1e-12), Err(Error::Argument(_))));
    }

    proptest! {
        #[test]
        fn periodic_and_in_range(u in 0.0f64..1.0, cycles in 1u32..4) {
            let p = params();
            let s = PumpSchedule::default_cycle(&p);
            let t = u * p.period();
            let a = eval_schedule(&s, &p, t).unwrap();
            let b = eval_schedule(&s, &p, t + cycles as f64 * p.period()).unwrap();
            prop_assert!((a.n_g - b.n_g).abs() < 1e-9);
            prop_assert!((a.j_l - b.j_l).abs() < 1e-9 * p.j_max);
            prop_assert!((a.j_r - b.j_r).abs() < 1e-9 * p.j_max);
            prop_assert!(a.j_l >= p.j_min * (1.0 - 1e-12) && a.j_l <= p.j_max * (1.0 + 1e-12));
            prop_assert!(a.j_r >= p.j_min * (1.0 - 1e-12) && a.j_r <= p.j_max * (1.0 + 1e-12));
            prop_assert!(a.n_g >= p.ng_min - 1e-12 && a.n_g <= p.ng_max + 1e-12);
        }
    }
}
