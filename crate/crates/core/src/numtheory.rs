//! Segmented sieving, interval factorization and square-free bookkeeping.
//!
//! Intervals are half-open: an [`IntervalTable`] built from `(x, y)` covers
//! the integers `x < n <= x + y`.

use std::collections::BTreeSet;

use num_integer::Integer;

use crate::error::{LabError, Result};

/// A `(prime, exponent)` pair.
pub type PrimePower = (u64, u32);

/// Primes up to and including `limit`, by the sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = usize::try_from(limit).expect("sieve limit fits in memory");
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        let mut j = i * i;
        while j <= limit {
            composite[j] = true;
            j += i;
        }
    }
    primes
}

/// Factors every integer of `(lo, lo + len]` against the given sieving primes,
/// which must contain every prime up to `sqrt(lo + len)`. Buffers are reused
/// across calls.
fn factor_segment(
    lo: u64,
    len: u64,
    sieving: &[u64],
    remaining: &mut Vec<u64>,
    per_entry: &mut Vec<Vec<PrimePower>>,
) {
    let len_us = len as usize;
    remaining.clear();
    remaining.extend((1..=len).map(|i| lo + i));
    per_entry.iter_mut().for_each(Vec::clear);
    per_entry.resize_with(len_us, Vec::new);
    let hi = lo + len;
    for &p in sieving {
        if p.saturating_mul(p) > hi {
            break;
        }
        let mut m = (lo / p + 1) * p;
        while m <= hi {
            let idx = (m - lo - 1) as usize;
            let mut e = 0;
            while remaining[idx] % p == 0 {
                remaining[idx] /= p;
                e += 1;
            }
            per_entry[idx].push((p, e));
            m += p;
        }
    }
    for (rest, entry) in remaining.iter().zip(per_entry.iter_mut()) {
        if *rest > 1 {
            entry.push((*rest, 1));
        }
    }
}

/// Factorization and square-free flags for every integer of `(x, x+y]`.
#[derive(Debug, Clone)]
pub struct IntervalTable {
    x_lo: u64,
    y_len: u64,
    offsets: Vec<usize>,
    factors: Vec<PrimePower>,
    squarefree: Vec<bool>,
    squarefree_count: u64,
}

/// Borrowed view of one interval member.
#[derive(Debug, Clone, Copy)]
pub struct Entry<'a> {
    pub n: u64,
    pub factors: &'a [PrimePower],
    pub squarefree: bool,
}

impl<'a> Entry<'a> {
    /// Distinct prime divisors in increasing order.
    pub fn primes(&self) -> impl Iterator<Item = u64> + 'a {
        self.factors.iter().map(|&(p, _)| p)
    }
}

impl IntervalTable {
    /// Sieves `(x, x+y]`: primes up to `sqrt(x+y)` are sieved once, their
    /// multiples marked in the segment, and any leftover cofactor above the
    /// square root recorded as a single large prime.
    pub fn segmented_factorize(x: u64, y: u64) -> Result<Self> {
        if y == 0 {
            return Err(LabError::Domain("interval length y must be at least 1".into()));
        }
        let hi = x
            .checked_add(y)
            .ok_or_else(|| LabError::Range(format!("x + y overflows u64 (x={x}, y={y})")))?;
        let len = usize::try_from(y).map_err(|_| LabError::Range(format!("y={y} too large")))?;
        let sieving = primes_up_to(hi.isqrt());
        let mut remaining = Vec::with_capacity(len);
        let mut per_entry = Vec::with_capacity(len);
        factor_segment(x, y, &sieving, &mut remaining, &mut per_entry);

        let mut offsets = Vec::with_capacity(len + 1);
        let mut factors = Vec::with_capacity(len * 3);
        let mut squarefree = Vec::with_capacity(len);
        offsets.push(0);
        for entry in &per_entry {
            factors.extend_from_slice(entry);
            offsets.push(factors.len());
            squarefree.push(entry.iter().all(|&(_, e)| e == 1));
        }
        let squarefree_count = squarefree.iter().filter(|&&f| f).count() as u64;
        Ok(Self { x_lo: x, y_len: y, offsets, factors, squarefree, squarefree_count })
    }

    /// Exclusive lower endpoint `x`.
    pub fn x_lo(&self) -> u64 {
        self.x_lo
    }

    /// Interval length `y`.
    pub fn y_len(&self) -> u64 {
        self.y_len
    }

    /// Inclusive upper endpoint `x + y`.
    pub fn hi(&self) -> u64 {
        self.x_lo + self.y_len
    }

    /// `S(x, y)`, the number of square-free members.
    pub fn squarefree_count(&self) -> u64 {
        self.squarefree_count
    }

    pub fn contains(&self, n: u64) -> bool {
        n > self.x_lo && n <= self.hi()
    }

    fn index(&self, n: u64) -> Option<usize> {
        self.contains(n).then(|| (n - self.x_lo - 1) as usize)
    }

    pub fn entry(&self, n: u64) -> Option<Entry<'_>> {
        self.index(n).map(|i| self.entry_at(i))
    }

    fn entry_at(&self, i: usize) -> Entry<'_> {
        Entry {
            n: self.x_lo + 1 + i as u64,
            factors: &self.factors[self.offsets[i]..self.offsets[i + 1]],
            squarefree: self.squarefree[i],
        }
    }

    pub fn factors(&self, n: u64) -> Option<&[PrimePower]> {
        self.entry(n).map(|e| e.factors)
    }

    pub fn is_squarefree(&self, n: u64) -> Option<bool> {
        self.index(n).map(|i| self.squarefree[i])
    }

    /// All members in increasing order.
    pub fn entries(&self) -> impl Iterator<Item = Entry<'_>> + '_ {
        (0..self.y_len as usize).map(move |i| self.entry_at(i))
    }

    /// Square-free members in increasing order.
    pub fn squarefree_entries(&self) -> impl Iterator<Item = Entry<'_>> + '_ {
        self.entries().filter(|e| e.squarefree)
    }

    pub fn squarefree_members(&self) -> Vec<u64> {
        self.squarefree_entries().map(|e| e.n).collect()
    }

    /// Distinct primes dividing at least one square-free member, sorted.
    pub fn squarefree_primes(&self) -> Vec<u64> {
        let set: BTreeSet<u64> = self.squarefree_entries().flat_map(|e| e.primes()).collect();
        set.into_iter().collect()
    }

    /// Distinct primes dividing at least one member, sorted.
    pub fn all_primes(&self) -> Vec<u64> {
        let set: BTreeSet<u64> = self.factors.iter().map(|&(p, _)| p).collect();
        set.into_iter().collect()
    }
}

/// Streams the factorizations of `1..=limit` in chunks, without holding the
/// whole range in memory. `n = 1` is reported with an empty factorization.
pub(crate) fn for_each_factored_up_to(limit: u64, mut visit: impl FnMut(u64, &[PrimePower])) {
    const CHUNK: u64 = 1 << 16;
    if limit == 0 {
        return;
    }
    let sieving = primes_up_to(limit.isqrt());
    let mut remaining = Vec::new();
    let mut per_entry = Vec::new();
    let mut lo = 0;
    while lo < limit {
        let len = CHUNK.min(limit - lo);
        factor_segment(lo, len, &sieving, &mut remaining, &mut per_entry);
        for (i, f) in per_entry.iter().enumerate() {
            visit(lo + 1 + i as u64, f);
        }
        lo += len;
    }
}

/// Trial-division square-free test.
pub fn is_squarefree(mut n: u64) -> bool {
    if n == 0 {
        return false;
    }
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return false;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    true
}

/// Trial-division factorization, for integers outside any sieved table.
pub fn factorize(mut n: u64) -> Vec<PrimePower> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Square-free kernel of the product of two square-free numbers:
/// `a·b / gcd(a,b)²`, the symmetric difference of their prime sets.
///
/// A product of square-free numbers is a perfect square iff folding them with
/// this operation yields 1.
pub fn kernel_xor(a: u64, b: u64) -> Result<u64> {
    for v in [a, b] {
        if !is_squarefree(v) {
            return Err(LabError::Contract(format!("{v} is not square-free")));
        }
    }
    let k = kernel_xor_wide(u128::from(a), u128::from(b));
    u64::try_from(k).map_err(|_| LabError::Range(format!("kernel of {a} and {b} exceeds u64")))
}

/// Unchecked kernel product in 128-bit arithmetic. Inputs must be square-free
/// and the result must fit in `u128` (always true for two `u64` inputs).
#[inline]
pub fn kernel_xor_wide(a: u128, b: u128) -> u128 {
    let g = a.gcd(&b);
    (a / g) * (b / g)
}

/// Number of distinct prime factors of `n` strictly greater than `z`.
pub fn omega_large(n: u64, z: f64) -> usize {
    count_large(&factorize(n), z)
}

/// Number of entries of a factorization with prime strictly greater than `z`.
#[inline]
pub fn count_large(factors: &[PrimePower], z: f64) -> usize {
    factors.iter().filter(|&&(p, _)| is_large(p, z)).count()
}

/// Strict membership in the large-prime set.
#[inline]
pub fn is_large(p: u64, z: f64) -> bool {
    p as f64 > z
}

/// Split of the relevant primes at the threshold `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimeSplit {
    pub z: f64,
    /// Every prime `p <= z`.
    pub small_primes: Vec<u64>,
    /// Primes `p > z` dividing some member of the interval.
    pub large_primes: Vec<u64>,
}

impl PrimeSplit {
    /// Split at `z = ½·ln(1/δ)`; requires `0 < δ < 1/10`.
    pub fn from_delta(delta: f64, table: &IntervalTable) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.1) {
            return Err(LabError::Domain(format!("delta must lie in (0, 1/10), got {delta}")));
        }
        Self::with_threshold(threshold_from_delta(delta), table)
    }

    /// Split at an explicit threshold `z > 0`.
    pub fn with_threshold(z: f64, table: &IntervalTable) -> Result<Self> {
        if !(z.is_finite() && z > 0.0) {
            return Err(LabError::Domain(format!("threshold z must be positive, got {z}")));
        }
        let small_primes = primes_up_to(z.floor() as u64);
        let large_primes = table.all_primes().into_iter().filter(|&p| is_large(p, z)).collect();
        Ok(Self { z, small_primes, large_primes })
    }

    pub fn is_large(&self, p: u64) -> bool {
        is_large(p, self.z)
    }
}

/// `z = ½·ln(1/δ)`.
pub fn threshold_from_delta(delta: f64) -> f64 {
    0.5 * (1.0 / delta).ln()
}
