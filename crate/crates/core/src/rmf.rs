//! Seeded random multiplicative functions and their interval sums.

use std::hash::Hasher;

use serde::{Deserialize, Serialize};
use siphasher::sip::SipHasher13;

use crate::error::{LabError, Result};
use crate::numtheory::{for_each_factored_up_to, IntervalTable, PrimePower};
use crate::scalar::Real;

const SIGN_DOMAIN: u64 = 0x7369_676e_5f70_7266; // "sign_prf"
const TRIAL_DOMAIN: u64 = 0x7472_6961_6c5f_6964; // "trial_id"

/// Largest `x` accepted by [`partial_sum_m`].
pub const PARTIAL_SUM_LIMIT: u64 = 100_000_000;

fn prf(key0: u64, key1: u64, input: u64) -> u64 {
    let mut h = SipHasher13::new_with_keys(key0, key1);
    h.write_u64(input);
    h.finish()
}

/// Deterministic assignment of independent fair signs to primes.
///
/// `sign(p)` is a keyed SipHash of `p`, so no per-prime state is stored and
/// the same `(seed, p)` always yields the same sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignSource {
    master_seed: u64,
}

impl SignSource {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    /// Source for one Monte Carlo trial. Trial seeds depend only on
    /// `(master_seed, trial_index)`, so appending trials never changes
    /// earlier ones.
    pub fn for_trial(master_seed: u64, trial_index: u64) -> Self {
        Self::new(prf(master_seed, TRIAL_DOMAIN, trial_index))
    }

    pub fn seed(&self) -> u64 {
        self.master_seed
    }

    /// `X(p)` as `+1` or `-1`.
    #[inline]
    pub fn sign(&self, p: u64) -> i8 {
        if prf(self.master_seed, SIGN_DOMAIN, p) & 1 == 0 {
            1
        } else {
            -1
        }
    }

    /// `X(n)` from a factorization: 0 unless square-free, else the product of
    /// the prime signs. The empty factorization (n = 1) gives +1.
    #[inline]
    pub fn value_of(&self, factors: &[PrimePower]) -> i8 {
        let mut v = 1i8;
        for &(p, e) in factors {
            if e > 1 {
                return 0;
            }
            v *= self.sign(p);
        }
        v
    }
}

/// `X(n)` for a member of the table.
pub fn x_value(n: u64, table: &IntervalTable, signs: &SignSource) -> Result<i8> {
    let factors = table
        .factors(n)
        .ok_or_else(|| LabError::Range(format!("{n} outside ({}, {}]", table.x_lo(), table.hi())))?;
    Ok(signs.value_of(factors))
}

/// Exact `Σ_{x<n<=x+y} X(n)`.
pub fn interval_sum(table: &IntervalTable, signs: &SignSource) -> i64 {
    table.squarefree_entries().map(|e| i64::from(signs.value_of(e.factors))).sum()
}

/// Interval sum together with its normalization by `sqrt(S)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WStatistic<T> {
    pub raw_sum: i64,
    pub s_count: u64,
    pub w: T,
}

impl<T: Real> WStatistic<T> {
    pub fn new(raw_sum: i64, s_count: u64) -> Result<Self> {
        if s_count == 0 {
            return Err(LabError::Degenerate("no square-free integer in the interval".into()));
        }
        let w = T::from_i64(raw_sum).expect("sum representable") / T::count(s_count).sqrt();
        Ok(Self { raw_sum, s_count, w })
    }
}

/// `W = S^{-1/2} Σ X(n)`.
pub fn normalized_w<T: Real>(table: &IntervalTable, signs: &SignSource) -> Result<WStatistic<T>> {
    WStatistic::new(interval_sum(table, signs), table.squarefree_count())
}

/// `M(x) = Σ_{n<=x} X(n)`, streaming the factorization of `[1, x]`.
pub fn partial_sum_m(x: u64, signs: &SignSource) -> Result<i64> {
    if x == 0 {
        return Err(LabError::Domain("M(x) requires x >= 1".into()));
    }
    if x > PARTIAL_SUM_LIMIT {
        return Err(LabError::Range(format!("x={x} exceeds the desk-scale limit {PARTIAL_SUM_LIMIT}")));
    }
    let mut total = 0i64;
    for_each_factored_up_to(x, |_, f| total += i64::from(signs.value_of(f)));
    Ok(total)
}

/// Precomputed square-free structure of an interval for repeated sampling.
///
/// Each square-free member is stored as indices into the list of distinct
/// primes it involves, so a trial costs one PRF call per distinct prime.
#[derive(Debug, Clone)]
pub struct IntervalSampler {
    primes: Vec<u64>,
    offsets: Vec<usize>,
    members: Vec<u32>,
}

impl IntervalSampler {
    pub fn new(table: &IntervalTable) -> Self {
        let primes = table.squarefree_primes();
        let mut offsets = vec![0];
        let mut members = Vec::new();
        for e in table.squarefree_entries() {
            for p in e.primes() {
                let idx = primes.binary_search(&p).expect("prime of a square-free member");
                members.push(idx as u32);
            }
            offsets.push(members.len());
        }
        Self { primes, offsets, members }
    }

    pub fn squarefree_count(&self) -> u64 {
        (self.offsets.len() - 1) as u64
    }

    pub fn distinct_primes(&self) -> &[u64] {
        &self.primes
    }

    /// Interval sum under `signs`; `scratch` is reused between calls.
    pub fn sum(&self, signs: &SignSource, scratch: &mut Vec<i8>) -> i64 {
        scratch.clear();
        scratch.extend(self.primes.iter().map(|&p| signs.sign(p)));
        self.offsets
            .windows(2)
            .map(|w| {
                self.members[w[0]..w[1]].iter().fold(1i64, |acc, &i| acc * i64::from(scratch[i as usize]))
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::{factorize, is_squarefree};
    use num_integer::Integer;

    /// Sign source backed by an explicit table, for hand-built examples.
    fn with_signs(table: &IntervalTable, wanted: &[(u64, i8)]) -> i64 {
        table
            .squarefree_entries()
            .map(|e| {
                e.primes()
                    .map(|p| wanted.iter().find(|w| w.0 == p).map_or(1, |w| w.1) as i64)
                    .product::<i64>()
            })
            .sum()
    }

    /// First seed at which the listed primes carry the listed signs.
    fn seed_matching(wanted: &[(u64, i8)]) -> SignSource {
        (0..)
            .map(SignSource::new)
            .find(|s| wanted.iter().all(|&(p, v)| s.sign(p) == v))
            .unwrap()
    }

    #[test]
    fn x_value_examples() {
        let t = IntervalTable::segmented_factorize(10, 10).unwrap();
        let s = seed_matching(&[(3, 1), (5, -1)]);
        assert_eq!(x_value(12, &t, &s).unwrap(), 0);
        assert_eq!(x_value(15, &t, &s).unwrap(), -1);
        assert_eq!(x_value(13, &t, &s).unwrap(), s.sign(13));
        assert!(matches!(x_value(21, &t, &s), Err(LabError::Range(_))));
    }

    #[test]
    fn interval_sum_examples() {
        let t = IntervalTable::segmented_factorize(10, 10).unwrap();
        // X(11)=X(13)=+1, X(14)=X(15)=X(17)=X(19)=-1
        let wanted = [(2, 1), (3, 1), (5, -1), (7, -1), (11, 1), (13, 1), (17, -1), (19, -1)];
        assert_eq!(with_signs(&t, &wanted), -2);
        let s = seed_matching(&wanted);
        assert_eq!(interval_sum(&t, &s), -2);
        let w: WStatistic<f64> = normalized_w(&t, &s).unwrap();
        assert!((w.w + 2.0 / 6f64.sqrt()).abs() < 1e-15);

        let all_plus = seed_matching(&[(2, 1), (3, 1), (5, 1), (7, 1), (11, 1), (13, 1), (17, 1), (19, 1)]);
        assert_eq!(interval_sum(&t, &all_plus), 6);
        let w: WStatistic<f64> = normalized_w(&t, &all_plus).unwrap();
        assert!((w.w - 6f64.sqrt()).abs() < 1e-15);

        let empty = IntervalTable::segmented_factorize(47, 1).unwrap();
        assert_eq!(interval_sum(&empty, &s), 0);
        assert!(matches!(normalized_w::<f64>(&empty, &s), Err(LabError::Degenerate(_))));
    }

    #[test]
    fn partial_sums() {
        let s = SignSource::new(5);
        assert_eq!(partial_sum_m(1, &s).unwrap(), 1);
        let s = seed_matching(&[(2, 1), (3, -1)]);
        assert_eq!(partial_sum_m(4, &s).unwrap(), 1);
        let s = seed_matching(&[(2, -1)]);
        assert_eq!(partial_sum_m(2, &s).unwrap(), 0);
        assert!(partial_sum_m(PARTIAL_SUM_LIMIT + 1, &s).is_err());
        let t = IntervalTable::segmented_factorize(0, 5000).unwrap();
        assert_eq!(partial_sum_m(5000, &s).unwrap(), interval_sum(&t, &s));
    }

    #[test]
    fn multiplicative_on_coprime_squarefree_pairs() {
        let s = SignSource::new(42);
        let x = |n: u64| s.value_of(&factorize(n));
        let sf: Vec<u64> = (1..=10_000).filter(|&n| is_squarefree(n)).collect();
        for &m in sf.iter().take_while(|&&m| m <= 100) {
            for &n in sf.iter().take_while(|&&n| m * n <= 10_000) {
                if m.gcd(&n) == 1 {
                    assert_eq!(x(m * n), x(m) * x(n), "m={m} n={n}");
                }
            }
        }
    }

    #[test]
    fn signs_are_unbiased_over_seeds() {
        for p in [2u64, 3, 101, 7919, 1_000_003] {
            let mean: f64 = (0..10_000).map(|k| f64::from(SignSource::new(k).sign(p))).sum::<f64>() / 1e4;
            assert!(mean.abs() <= 4.0 / 100.0, "p={p} mean={mean}");
        }
    }

    #[test]
    fn trial_sources_are_deterministic() {
        let t = IntervalTable::segmented_factorize(100_000, 300).unwrap();
        let a = SignSource::for_trial(9, 17);
        assert_eq!(a, SignSource::for_trial(9, 17));
        assert_ne!(a, SignSource::for_trial(9, 18));
        assert_eq!(interval_sum(&t, &a), interval_sum(&t, &SignSource::for_trial(9, 17)));
    }

    #[test]
    fn sampler_matches_direct_sum() {
        let t = IntervalTable::segmented_factorize(123_456, 777).unwrap();
        let sampler = IntervalSampler::new(&t);
        assert_eq!(sampler.squarefree_count(), t.squarefree_count());
        let mut scratch = Vec::new();
        for k in 0..50 {
            let s = SignSource::for_trial(3, k);
            assert_eq!(sampler.sum(&s, &mut scratch), interval_sum(&t, &s));
        }
    }

    #[test]
    fn exhaustive_sign_moments() {
        // every sign vector over the primes involved: mean 0, second moment S
        let t = IntervalTable::segmented_factorize(1000, 8).unwrap();
        let primes = t.squarefree_primes();
        assert!(primes.len() <= 20);
        let s = t.squarefree_count() as i64;
        let (mut sum1, mut sum2) = (0i64, 0i64);
        for mask in 0u32..(1 << primes.len()) {
            let f: i64 = t
                .squarefree_entries()
                .map(|e| {
                    e.primes()
                        .map(|p| {
                            let i = primes.binary_search(&p).unwrap();
                            if mask >> i & 1 == 1 { -1 } else { 1 }
                        })
                        .product::<i64>()
                })
                .sum();
            sum1 += f;
            sum2 += f * f;
        }
        assert_eq!(sum1, 0);
        assert_eq!(sum2, s << primes.len());
    }
}
