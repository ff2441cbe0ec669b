//! Exhaustive check of the conditional mean and variance of the interval sum
//! given the small-prime signs.

use serde::{Deserialize, Serialize};

use super::SignWalk;
use crate::error::{LabError, Result};
use crate::numtheory::{IntervalTable, PrimeSplit};
use crate::rmf::SignSource;
use crate::scalar::{rational_string, Rational};

/// Default cap on the number of large primes enumerated over.
pub const DEFAULT_LARGE_PRIME_BUDGET: usize = 22;

/// Conditional moments for one fixed small-prime assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalMoments {
    pub small_seed: u64,
    #[serde(with = "rational_string")]
    pub mean: Rational,
    #[serde(with = "rational_string")]
    pub second_moment: Rational,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma21Report {
    pub z: f64,
    pub small_primes: Vec<u64>,
    pub large_prime_count: usize,
    pub s_count: u64,
    pub outcomes: Vec<ConditionalMoments>,
    pub all_hold: bool,
}

/// For each small-prime assignment, averages `f` and `f²` over all `2^k` sign
/// vectors of the `k` large primes dividing square-free members and compares
/// them with 0 and `S` exactly.
///
/// Only the signs of small primes (`p <= z`) are read from each assignment.
pub fn lemma21_check(
    table: &IntervalTable,
    delta: f64,
    small_assignments: &[SignSource],
    large_prime_budget: usize,
) -> Result<Lemma21Report> {
    let split = PrimeSplit::from_delta(delta, table)?;
    let large: Vec<u64> = table.squarefree_primes().into_iter().filter(|&p| split.is_large(p)).collect();
    if large.len() > large_prime_budget || large.len() > 62 {
        return Err(LabError::Scale(format!(
            "{} large primes exceed the budget of {large_prime_budget}",
            large.len()
        )));
    }
    let s = table.squarefree_count();
    let vectors = 1i128 << large.len();
    let mut outcomes = Vec::with_capacity(small_assignments.len());
    for assignment in small_assignments {
        let members: Vec<(i64, Vec<usize>)> = table
            .squarefree_entries()
            .map(|e| {
                let mut c = 1i64;
                let mut idx = Vec::new();
                for p in e.primes() {
                    match large.binary_search(&p) {
                        Ok(j) => idx.push(j),
                        Err(_) => c *= i64::from(assignment.sign(p)),
                    }
                }
                (c, idx)
            })
            .collect();
        let (mut sum1, mut sum2) = (0i128, 0i128);
        SignWalk::new(large.len(), &members).run(|f| {
            sum1 += i128::from(f);
            sum2 += i128::from(f) * i128::from(f);
        });
        let mean = Rational::new(sum1.into(), vectors.into());
        let second_moment = Rational::new(sum2.into(), vectors.into());
        let holds = sum1 == 0 && sum2 == i128::from(s) * vectors;
        outcomes.push(ConditionalMoments { small_seed: assignment.seed(), mean, second_moment, holds });
    }
    Ok(Lemma21Report {
        z: split.z,
        small_primes: split.small_primes,
        large_prime_count: large.len(),
        s_count: s,
        all_hold: outcomes.iter().all(|o| o.holds),
        outcomes,
    })
}
