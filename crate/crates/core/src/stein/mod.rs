//! Ingredients of the Stein-method bound for the normalized interval sum.
//!
//! For a large prime `p`, resampling `X(p)` changes the interval sum by
//! `Δ_p f = (X(p) − X'(p))·Σ_{k∈N(p)} X(k)`, where `N(p)` collects the
//! square-free `k` with `k·p` a square-free member of the interval. The
//! moments of `Δ_p f`, the exchange statistic `T` and its per-prime quadratic
//! parts `T_p` are computed here, exactly on tiny instances and by Monte Carlo
//! at desk scale.

mod exchange;
mod lemma;

use serde::{Deserialize, Serialize};

pub use exchange::{
    conditional_t_decomposition_check, nu_weight, putnam_identity_sum, t_p_statistic, t_p_value,
    var_t_monte_carlo, DecompositionReport, MAX_DECOMPOSITION_PRIMES,
};
pub use lemma::{lemma21_check, Lemma21Report, DEFAULT_LARGE_PRIME_BUDGET};

use crate::error::{LabError, Result};
use crate::numtheory::{IntervalTable, PrimeSplit};
use crate::quadruples::{count_square_quadruples, ORACLE_LIMIT};
use crate::scalar::Rational;

/// Largest number of distinct primes [`delta3_exact_tiny`] enumerates over.
pub const DELTA3_PRIME_LIMIT: usize = 20;

/// `E|X(p) − X'(p)|³`: the difference is −2, 0, 2 with probabilities ¼, ½, ¼.
pub const DIFF_THIRD_MOMENT: u64 = 4;
/// `E|X(p) − X'(p)|²`.
pub const DIFF_SECOND_MOMENT: u64 = 2;
/// `E|X(p) − X'(p)|⁴`.
pub const DIFF_FOURTH_MOMENT: u64 = 8;

/// `N(p)` with the prime factors of each member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NpSet {
    pub p: u64,
    /// Square-free `k` with `k·p` a square-free member, increasing.
    pub members: Vec<u64>,
    /// Distinct primes of each member, increasing.
    pub member_primes: Vec<Vec<u64>>,
}

impl NpSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Distinct primes occurring in the members, sorted.
    pub fn primes(&self) -> Vec<u64> {
        let mut all: Vec<u64> = self.member_primes.iter().flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        all
    }
}

/// Builds `N(p)` by scanning the multiples of `p` in the interval.
pub fn n_of_p(p: u64, table: &IntervalTable) -> NpSet {
    let mut members = Vec::new();
    let mut member_primes = Vec::new();
    let mut m = (table.x_lo() / p + 1).saturating_mul(p);
    while m <= table.hi() {
        let e = table.entry(m).expect("multiple inside interval");
        if e.squarefree {
            members.push(m / p);
            member_primes.push(e.primes().filter(|&q| q != p).collect());
        }
        m += p;
    }
    NpSet { p, members, member_primes }
}

/// `E|Δ_p f|² = 2·|N(p)|`.
pub fn delta2_exact(np: &NpSet) -> u64 {
    DIFF_SECOND_MOMENT * np.len() as u64
}

/// `E|Δ_p f|⁴ = 8·#{k1k2k3k4 = □ in N(p)}`.
pub fn delta4_exact(np: &NpSet) -> Result<u64> {
    if np.len() as u64 > ORACLE_LIMIT {
        return Err(LabError::Scale(format!("|N({})| = {} exceeds {ORACLE_LIMIT}", np.p, np.len())));
    }
    Ok(DIFF_FOURTH_MOMENT * count_square_quadruples(&np.members))
}

/// Incremental evaluation of `f(v) = Σ_i c_i·(−1)^{|mask_i ∩ v|}` while `v`
/// walks all subsets of the tracked primes in Gray-code order.
pub(crate) struct SignWalk {
    by_prime: Vec<Vec<usize>>,
    values: Vec<i64>,
    f: i64,
}

impl SignWalk {
    /// `members[i] = (c_i, indices of tracked primes dividing member i)`.
    pub(crate) fn new(prime_count: usize, members: &[(i64, Vec<usize>)]) -> Self {
        let mut by_prime = vec![Vec::new(); prime_count];
        for (i, (_, idx)) in members.iter().enumerate() {
            for &j in idx {
                by_prime[j].push(i);
            }
        }
        let values: Vec<i64> = members.iter().map(|m| m.0).collect();
        let f = values.iter().sum();
        Self { by_prime, values, f }
    }

    /// Visits `f` once for every sign vector of the tracked primes.
    pub(crate) fn run(mut self, mut visit: impl FnMut(i64)) {
        let k = self.by_prime.len();
        visit(self.f);
        for step in 1u64..(1u64 << k) {
            let j = step.trailing_zeros() as usize;
            for &i in &self.by_prime[j] {
                self.values[i] = -self.values[i];
                self.f += 2 * self.values[i];
            }
            visit(self.f);
        }
    }
}

/// Exact `E|Δ_p f|³ = 4·E|Σ_{k∈N(p)} X(k)|³`, averaging over every sign
/// vector of the primes occurring in `N(p)`.
pub fn delta3_exact_tiny(np: &NpSet) -> Result<Rational> {
    let primes = np.primes();
    if primes.len() > DELTA3_PRIME_LIMIT {
        return Err(LabError::Scale(format!(
            "N({}) involves {} primes, limit {DELTA3_PRIME_LIMIT}",
            np.p,
            primes.len()
        )));
    }
    let members: Vec<(i64, Vec<usize>)> = np
        .member_primes
        .iter()
        .map(|ps| (1, ps.iter().map(|q| primes.binary_search(q).unwrap()).collect()))
        .collect();
    let mut cubes: i128 = 0;
    SignWalk::new(primes.len(), &members).run(|g| cubes += i128::from(g.abs()).pow(3));
    Ok(Rational::new(
        (cubes * i128::from(DIFF_THIRD_MOMENT)).into(),
        (1i128 << primes.len()).into(),
    ))
}

/// Moments of `Δ_p f` for one prime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimeMoments {
    pub p: u64,
    pub n_size: usize,
    pub delta2: u64,
    pub delta4: u64,
    /// Exact third absolute moment when enumerable, otherwise the
    /// Cauchy–Schwarz bound `sqrt(delta2·delta4)`.
    pub delta3: f64,
    pub delta3_exact: bool,
}

pub fn prime_moments(np: &NpSet) -> Result<PrimeMoments> {
    let delta2 = delta2_exact(np);
    let delta4 = delta4_exact(np)?;
    let (delta3, delta3_exact) = match delta3_exact_tiny(np) {
        Ok(v) => (rational_to_f64(&v), true),
        Err(LabError::Scale(_)) => (((delta2 * delta4) as f64).sqrt(), false),
        Err(e) => return Err(e),
    };
    Ok(PrimeMoments { p: np.p, n_size: np.len(), delta2, delta4, delta3, delta3_exact })
}

/// Right-hand-side ingredients of the Stein bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteinTerms {
    /// `Σ_{p∈L} E|Δ_p f|³` (exact terms where enumerable, otherwise bounded).
    pub sum_delta3: f64,
    /// Monte Carlo estimate of `Var(Σ_p T_p)`.
    pub var_t_estimate: f64,
    /// Large primes with non-empty `N(p)`.
    pub per_prime: Vec<PrimeMoments>,
}

pub fn stein_terms(table: &IntervalTable, split: &PrimeSplit, trials: u64, master_seed: u64) -> Result<SteinTerms> {
    let per_prime = split
        .large_primes
        .iter()
        .map(|&p| n_of_p(p, table))
        .filter(|np| !np.is_empty())
        .map(|np| prime_moments(&np))
        .collect::<Result<Vec<_>>>()?;
    let sum_delta3 = per_prime.iter().map(|m| m.delta3).sum();
    let var_t_estimate = var_t_monte_carlo(table, split.z, trials, master_seed)?;
    Ok(SteinTerms { sum_delta3, var_t_estimate, per_prime })
}

pub(crate) fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}
