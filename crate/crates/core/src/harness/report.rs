use serde::{Deserialize, Serialize};

use super::config::ResolvedConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// Empirical moments `m_k = mean(W^k)` with standard errors `sd(W^k)/sqrt(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
    pub se: [f64; 4],
}

impl Moments {
    /// Standard errors are 0 for a single sample.
    pub fn from_sample(w: &[f64]) -> Self {
        let n = w.len() as f64;
        let mut m = [0.0; 4];
        let mut se = [0.0; 4];
        for k in 0..4 {
            let powers: Vec<f64> = w.iter().map(|v| v.powi(k as i32 + 1)).collect();
            let mean = powers.iter().sum::<f64>() / n;
            m[k] = mean;
            if w.len() > 1 {
                let var = powers.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / (n - 1.0);
                se[k] = (var / n).sqrt();
            }
        }
        Self { m1: m[0], m2: m[1], m3: m[2], m4: m[3], se }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ExactFourth {
    /// `E(Σ X(n))⁴`; divide by `S²` to compare with `m4`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fourth_moment: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nondiagonal: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distances {
    pub ks: f64,
    pub w1: f64,
    /// `ks / (2·sqrt(w1))`; at most 1.
    pub kkw_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundValues {
    pub theorem: f64,
    pub corollary: f64,
    pub prop31: f64,
    pub est3: f64,
    pub goal: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ratios {
    pub w1_over_theorem: f64,
    pub ks_over_corollary: f64,
}

/// Wall-clock milliseconds per phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub sieve: f64,
    pub trials: f64,
    pub exact: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub config: ResolvedConfig,
    pub s_count: u64,
    pub moments: Moments,
    pub exact: ExactFourth,
    pub distances: Distances,
    pub bounds: BoundValues,
    pub ratios: Ratios,
    /// `null` when timing is disabled.
    pub timing_ms: Option<Timing>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> crate::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub const HISTOGRAM_BINS: usize = 64;
pub const HISTOGRAM_RANGE: (f64, f64) = (-5.0, 5.0);

/// Equal-width bins on `[lo, hi)` plus underflow and overflow counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    pub fn new(values: &[f64], bins: usize, lo: f64, hi: f64) -> Self {
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|i| if i == bins { hi } else { lo + i as f64 * width }).collect();
        let mut h = Self { edges, counts: vec![0; bins], underflow: 0, overflow: 0 };
        for &v in values {
            if v < lo {
                h.underflow += 1;
            } else if v >= hi {
                h.overflow += 1;
            } else {
                let i = (((v - lo) / width) as usize).min(bins - 1);
                h.counts[i] += 1;
            }
        }
        h
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }

    /// `lo,hi,count` rows, with the open-ended underflow and overflow rows first and last.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("lo,hi,count\n");
        s.push_str(&format!("-inf,{:?},{}\n", self.edges[0], self.underflow));
        for (i, c) in self.counts.iter().enumerate() {
            s.push_str(&format!("{:?},{:?},{}\n", self.edges[i], self.edges[i + 1], c));
        }
        s.push_str(&format!("{:?},inf,{}\n", self.edges[self.edges.len() - 1], self.overflow));
        s
    }
}
