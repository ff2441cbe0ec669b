use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::numtheory::threshold_from_delta;

/// Output files written by [`emit`](super::emit).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Histogram,
}

impl std::str::FromStr for Format {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "histogram" | "hist" => Ok(Format::Histogram),
            other => Err(LabError::Config(format!("unknown format {other:?} (json, csv, histogram)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub x: u64,
    pub y: Option<u64>,
    pub delta: Option<f64>,
    pub trials: u64,
    pub master_seed: u64,
    pub z_override: Option<f64>,
    pub workers: usize,
    pub output_path: Option<PathBuf>,
    pub formats: Vec<Format>,
    /// Also count square quadruples for the exact fourth moment.
    pub exact_fourth: bool,
    /// Record wall-clock time in the report. Off makes reports byte-reproducible.
    pub record_timing: bool,
}

impl ExperimentConfig {
    /// Config for the interval `(x, x+y]` with defaults for everything else.
    pub fn new(x: u64, y: u64) -> Self {
        Self {
            x,
            y: Some(y),
            delta: None,
            trials: 1000,
            master_seed: 0,
            z_override: None,
            workers: 1,
            output_path: None,
            formats: vec![Format::Json],
            exact_fourth: false,
            record_timing: true,
        }
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    /// Interval length, from `y` or from `round(δ·x)`.
    pub fn interval_length(&self) -> Result<u64> {
        match (self.y, self.delta) {
            (Some(y), None) => Ok(y),
            (None, Some(d)) => {
                if !(d.is_finite() && d > 0.0) {
                    return Err(LabError::Config(format!("delta must be positive, got {d}")));
                }
                let y = (d * self.x as f64).round();
                if y < 1.0 || y > u64::MAX as f64 {
                    return Err(LabError::Config(format!("delta={d} gives an empty interval at x={}", self.x)));
                }
                Ok(y as u64)
            }
            (Some(_), Some(_)) => Err(LabError::Config("give exactly one of y and delta, not both".into())),
            (None, None) => Err(LabError::Config("one of y and delta is required".into())),
        }
    }

    pub fn resolved(&self) -> Result<ResolvedConfig> {
        if self.x < 2 {
            return Err(LabError::Config(format!("x must be at least 2, got {}", self.x)));
        }
        let y = self.interval_length()?;
        if y < 2 {
            return Err(LabError::Config(format!("y must be at least 2, got {y}")));
        }
        if self.trials == 0 {
            return Err(LabError::Config("trials must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(LabError::Config("workers must be at least 1".into()));
        }
        self.x.checked_add(y).ok_or_else(|| LabError::Config("x + y overflows".into()))?;
        let delta = y as f64 / self.x as f64;
        let z = match self.z_override {
            Some(z) if !(z.is_finite() && z > 0.0) => {
                return Err(LabError::Config(format!("z must be positive, got {z}")));
            }
            Some(z) => z,
            None => threshold_from_delta(delta),
        };
        Ok(ResolvedConfig { x: self.x, y, delta, z, trials: self.trials, master_seed: self.master_seed })
    }

    /// Warning for runs outside `δ < 1/10`; such runs still proceed.
    pub fn range_warning(&self) -> Option<String> {
        let r = self.resolved().ok()?;
        (r.delta >= 0.1).then(|| format!("delta = {} is outside (0, 1/10); bounds are not meaningful there", r.delta))
    }
}

/// The parameters that determine a report's contents, echoed into it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub x: u64,
    pub y: u64,
    pub delta: f64,
    pub z: f64,
    pub trials: u64,
    pub master_seed: u64,
}
