//! Experiment runner: configures an interval, runs seeded parallel trials,
//! aggregates moments and distances, evaluates bounds and writes reports.

mod config;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{ExperimentConfig, Format, ResolvedConfig};
pub use report::{
    BoundValues, Distances, ExactFourth, ExperimentReport, Histogram, Moments, Ratios, Timing, HISTOGRAM_BINS,
    HISTOGRAM_RANGE, SCHEMA_VERSION,
};

use crate::bounds::{self, BoundInputs};
use crate::distances::{kkw_check, SampleSet};
use crate::error::{LabError, Result};
use crate::numtheory::IntervalTable;
use crate::quadruples::{self, FourthMoment, ORACLE_LIMIT};
use crate::rmf::{IntervalSampler, SignSource};
use crate::stein::{
    conditional_t_decomposition_check, lemma21_check, putnam_identity_sum, var_t_monte_carlo, DecompositionReport,
    Lemma21Report, DEFAULT_LARGE_PRIME_BUDGET,
};
use crate::Rational;

pub const REPORT_FILE: &str = "report.json";
pub const TRIALS_FILE: &str = "trials.csv";
pub const HISTOGRAM_FILE: &str = "histogram.csv";

/// A finished simulation: the report and the per-trial `W` values in trial order.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub report: ExperimentReport,
    pub samples: Vec<f64>,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| LabError::Config(format!("cannot start {workers} workers: {e}")))
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Interval sums for trials `0..trials`, in trial order.
pub fn sample_sums(table: &IntervalTable, trials: u64, master_seed: u64, workers: usize) -> Result<Vec<i64>> {
    let sampler = IntervalSampler::new(table);
    Ok(pool(workers)?.install(|| {
        (0..trials)
            .into_par_iter()
            .map_init(Vec::new, |scratch, i| sampler.sum(&SignSource::for_trial(master_seed, i), scratch))
            .collect()
    }))
}

fn bound_values(r: &ResolvedConfig, s_count: u64) -> Result<BoundValues> {
    let inputs = BoundInputs::<f64>::new(r.x, r.y, s_count)?.with_z(r.z);
    Ok(BoundValues {
        theorem: bounds::theorem_bound(&inputs),
        corollary: bounds::corollary_bound(&inputs),
        prop31: bounds::prop31_bound(r.x, r.delta),
        est3: bounds::est3_bound(r.x, r.y, r.z),
        goal: bounds::goal_bound(r.x, r.delta, r.z),
    })
}

/// Runs `trials` seeded draws of `W` and assembles the report.
pub fn run_simulate(config: &ExperimentConfig) -> Result<Simulation> {
    let r = config.resolved()?;
    let start = Instant::now();
    let table = IntervalTable::segmented_factorize(r.x, r.y)?;
    let s_count = table.squarefree_count();
    if s_count == 0 {
        return Err(LabError::Degenerate(format!("no square-free integer in ({}, {}]", r.x, r.x + r.y)));
    }
    let sieve_ms = ms(start);

    let t = Instant::now();
    let sums = sample_sums(&table, r.trials, r.master_seed, config.workers)?;
    let norm = (s_count as f64).sqrt();
    let samples: Vec<f64> = sums.iter().map(|&v| v as f64 / norm).collect();
    let moments = Moments::from_sample(&samples);
    let chk = kkw_check(&SampleSet::new(samples.clone())?);
    let trials_ms = ms(t);

    let t = Instant::now();
    let exact = if config.exact_fourth {
        let fm = quadruples::fourth_moment_exact(&table, quadruples::DEFAULT_BUDGET)?;
        ExactFourth { fourth_moment: Some(fm.total), nondiagonal: Some(fm.nondiagonal) }
    } else {
        ExactFourth::default()
    };
    let exact_ms = ms(t);

    let bounds = bound_values(&r, s_count)?;
    let report = ExperimentReport {
        schema_version: SCHEMA_VERSION,
        config: r,
        s_count,
        moments,
        exact,
        distances: Distances { ks: chk.ks, w1: chk.w1, kkw_ratio: chk.ratio },
        ratios: Ratios { w1_over_theorem: chk.w1 / bounds.theorem, ks_over_corollary: chk.ks / bounds.corollary },
        bounds,
        timing_ms: config
            .record_timing
            .then(|| Timing { sieve: sieve_ms, trials: trials_ms, exact: exact_ms, total: ms(start) }),
    };
    Ok(Simulation { report, samples })
}

/// Exact fourth moment of the interval sum and its comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentsFragment {
    pub config: ResolvedConfig,
    pub fourth: FourthMoment,
    /// `E(ΣX)⁴ / (3S² − 2S)`; absent when `S = 0`.
    pub over_diagonal: Option<f64>,
    pub prop31: f64,
    pub nondiagonal_over_prop31: f64,
    /// Oracle total, computed when `S` is small enough.
    pub oracle_total: Option<u64>,
}

pub fn run_moments(config: &ExperimentConfig) -> Result<MomentsFragment> {
    let r = config.resolved()?;
    let table = IntervalTable::segmented_factorize(r.x, r.y)?;
    let fourth = pool(config.workers)?.install(|| quadruples::fourth_moment_exact(&table, quadruples::DEFAULT_BUDGET))?;
    let oracle_total = if fourth.s_count <= ORACLE_LIMIT {
        Some(quadruples::oracle_count_square_quadruples(&table)?)
    } else {
        None
    };
    let prop31 = bounds::prop31_bound(r.x, r.delta);
    Ok(MomentsFragment {
        config: r,
        over_diagonal: (fourth.diagonal > 0).then(|| fourth.total as f64 / fourth.diagonal as f64),
        nondiagonal_over_prop31: fourth.nondiagonal as f64 / prop31,
        prop31,
        oracle_total,
        fourth,
    })
}

/// Outcome of one sub-check; errors are recorded instead of aborting the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubCheck<T> {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl<T> From<Result<T>> for SubCheck<T> {
    fn from(r: Result<T>) -> Self {
        match r {
            Ok(v) => Self { result: Some(v), error: None },
            Err(e) => Self { result: None, error: Some(e.to_string()) },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityTable {
    pub max_l: usize,
    pub cases: usize,
    /// `(L, ω)` pairs where the sum differs from `1/ω`.
    pub failures: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarTRatio {
    pub estimate: f64,
    pub goal: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteinFragment {
    pub config: ResolvedConfig,
    pub identity: IdentityTable,
    pub lemma21: SubCheck<Lemma21Report>,
    pub decomposition: SubCheck<DecompositionReport>,
    pub var_t: SubCheck<VarTRatio>,
}

/// Exact check of `Σ_k C(L−ω,k)/(L·C(L−1,k)) = 1/ω` for `1 <= ω <= L <= max_l`.
pub fn identity_table(max_l: usize) -> IdentityTable {
    let mut cases = 0;
    let mut failures = Vec::new();
    for l in 1..=max_l {
        for omega in 1..=l {
            cases += 1;
            let ok = putnam_identity_sum::<Rational>(l, omega)
                .map(|v| v == Rational::new(1.into(), (omega as i64).into()))
                .unwrap_or(false);
            if !ok {
                failures.push((l, omega));
            }
        }
    }
    IdentityTable { max_l, cases, failures }
}

/// Small-prime assignments used by the conditional-moment check.
pub const SMALL_ASSIGNMENTS: u64 = 5;

pub fn run_stein_checks(config: &ExperimentConfig) -> Result<SteinFragment> {
    let r = config.resolved()?;
    let table = IntervalTable::segmented_factorize(r.x, r.y)?;
    let assignments: Vec<SignSource> =
        (0..SMALL_ASSIGNMENTS).map(|i| SignSource::for_trial(r.master_seed, i)).collect();
    let lemma21 = lemma21_check(&table, r.delta, &assignments, DEFAULT_LARGE_PRIME_BUDGET).into();
    let decomposition = conditional_t_decomposition_check(&table, r.z, &SignSource::new(r.master_seed)).into();
    let var_t = pool(config.workers)?
        .install(|| var_t_monte_carlo(&table, r.z, r.trials, r.master_seed))
        .map(|estimate| {
            let goal = bounds::goal_bound(r.x, r.delta, r.z);
            VarTRatio { estimate, goal, ratio: estimate / goal }
        })
        .into();
    Ok(SteinFragment { config: r, identity: identity_table(30), lemma21, decomposition, var_t })
}

/// Writes the requested files into `dir`, returning their paths.
///
/// On failure every file written so far is removed.
pub fn emit(sim: &Simulation, formats: &[Format], dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let result = (|| {
        fs::create_dir_all(dir)?;
        let mut formats = formats.to_vec();
        formats.sort();
        formats.dedup();
        for f in formats {
            let (name, body) = match f {
                Format::Json => (REPORT_FILE, sim.report.to_json()),
                Format::Csv => (TRIALS_FILE, trials_csv(&sim.samples)),
                Format::Histogram => {
                    let (lo, hi) = HISTOGRAM_RANGE;
                    (HISTOGRAM_FILE, Histogram::new(&sim.samples, HISTOGRAM_BINS, lo, hi).to_csv())
                }
            };
            let path = dir.join(name);
            written.push(path.clone());
            fs::write(&path, body)?;
        }
        Ok(())
    })();
    match result {
        Ok(()) => Ok(written),
        Err(e) => {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            Err(e)
        }
    }
}

/// `trial,w` rows in trial order.
pub fn trials_csv(samples: &[f64]) -> String {
    let mut s = String::from("trial,w\n");
    for (i, w) in samples.iter().enumerate() {
        s.push_str(&format!("{i},{w:?}\n"));
    }
    s
}
