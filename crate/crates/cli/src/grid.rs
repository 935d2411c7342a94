//! Control-flux sweep grids.

use serde::{Deserialize, Serialize};

use crate::CliError;

/// A uniform base grid in φ/Φ0, optionally densified with logarithmically
/// spaced offsets on both sides of each resonance. An explicit `values` list
/// replaces both.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub values: Option<Vec<f64>>,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub densify: bool,
    pub centers: Vec<f64>,
    pub offset_min: f64,
    pub offset_max: f64,
    pub offsets_per_side: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            values: None,
            start: 0.0,
            stop: 2.0,
            step: 0.01,
            densify: true,
            centers: vec![0.5, 1.5],
            offset_min: 1e-4,
            offset_max: 1e-2,
            offsets_per_side: 16,
        }
    }
}

/// Points closer than this are treated as one.
const MERGE_TOL: f64 = 1e-12;

impl GridSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        let in_range = |v: f64| (0.0..=2.0).contains(&v);
        if let Some(vals) = &self.values {
            if vals.is_empty() {
                return Err(CliError::Config("grid.values is empty".into()));
            }
            if let Some(v) = vals.iter().find(|v| !in_range(**v)) {
                return Err(CliError::Config(format!("grid value {v} outside [0, 2]")));
            }
            return Ok(());
        }
        if !(in_range(self.start) && in_range(self.stop) && self.start <= self.stop) {
            return Err(CliError::Config(format!(
                "grid range [{}, {}] must lie inside [0, 2]",
                self.start, self.stop
            )));
        }
        if !(self.step > 0.0) {
            return Err(CliError::Config(format!("grid.step must be positive, got {}", self.step)));
        }
        if self.densify {
            if !(self.offset_min > 0.0 && self.offset_max >= self.offset_min) {
                return Err(CliError::Config("grid offsets must satisfy 0 < offset_min <= offset_max".into()));
            }
            if self.centers.iter().any(|c| !in_range(*c)) {
                return Err(CliError::Config("grid centers must lie in [0, 2]".into()));
            }
        }
        Ok(())
    }

    /// Sorted, de-duplicated sweep points.
    pub fn points(&self) -> Vec<f64> {
        let mut pts = match &self.values {
            Some(v) => v.clone(),
            None => {
                let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
                // integer multiples keep 0.01-step values exact to the last bit
                let mut pts: Vec<f64> = (0..=n).map(|k| self.start + k as f64 * self.step).collect();
                if self.densify {
                    for off in self.offsets() {
                        for c in &self.centers {
                            pts.extend([c - off, c + off]);
                        }
                    }
                }
                pts.retain(|v| (self.start - MERGE_TOL..=self.stop + MERGE_TOL).contains(v));
                pts
            }
        };
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() < MERGE_TOL);
        pts
    }

    fn offsets(&self) -> Vec<f64> {
        let n = self.offsets_per_side;
        if n == 1 {
            return vec![self.offset_min];
        }
        let (lo, hi) = (self.offset_min.ln(), self.offset_max.ln());
        (0..n).map(|k| (lo + (hi - lo) * k as f64 / (n - 1) as f64).exp()).collect()
    }
}
