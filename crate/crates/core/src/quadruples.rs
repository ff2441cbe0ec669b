//! Ordered square quadruples `n1·n2·n3·n4 = □` of square-free interval members.
//!
//! `E(Σ X(n))⁴` equals the number of ordered quadruples of square-free members
//! whose product is a perfect square. Two independent counting routes are
//! provided: a kernel-folding oracle and an enumeration over the six-variable
//! parametrization
//!
//! ```text
//! n1 = A·r·u,  n2 = A·s·v,  n3 = B·r·v,  n4 = B·s·u,  gcd(r,s) = gcd(u,v) = 1,
//! ```
//!
//! where `A = gcd(n1,n2)`, `B = gcd(n3,n4)`, `r = gcd(n1/A, n3/B)` and
//! `s = gcd(n2/A, n4/B)`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::numtheory::{kernel_xor_wide, Entry, IntervalTable};

/// Largest number of members the oracle accepts.
pub const ORACLE_LIMIT: u64 = 400;

/// Default cap on inner loop iterations of the parametrized enumeration.
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

/// Number of diagonal (equal-in-pairs) ordered quadruples over `s` values:
/// three pairings `(12)(34)`, `(13)(24)`, `(14)(23)` of `s²` each, with the
/// `s` all-equal quadruples counted three times.
pub fn diagonal_count(s: u64) -> u64 {
    3 * s * s - 2 * s
}

/// Counts ordered quadruples of `members` (distinct square-free integers)
/// whose product is a square.
///
/// `kernel(kernel(n1,n2), kernel(n3,n4)) = 1` iff the two pair kernels are
/// equal, so the count is `Σ_k c(k)²` with `c(k)` the number of ordered pairs
/// of kernel `k`.
pub fn count_square_quadruples(members: &[u64]) -> u64 {
    let mut pairs: HashMap<u128, u64> = HashMap::with_capacity(members.len() * members.len() / 2 + 1);
    for &a in members {
        for &b in members {
            *pairs.entry(kernel_xor_wide(a.into(), b.into())).or_default() += 1;
        }
    }
    pairs.values().map(|c| c * c).sum()
}

/// Oracle count of ordered square quadruples in the interval. Refuses
/// intervals with more than [`ORACLE_LIMIT`] square-free members.
pub fn oracle_count_square_quadruples(table: &IntervalTable) -> Result<u64> {
    let s = table.squarefree_count();
    if s > ORACLE_LIMIT {
        return Err(LabError::Scale(format!("oracle limited to S <= {ORACLE_LIMIT}, got S = {s}")));
    }
    Ok(count_square_quadruples(&table.squarefree_members()))
}

/// Six-variable parametrization of a square quadruple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadrupleParam {
    pub a: u64,
    pub b: u64,
    pub r: u64,
    pub s: u64,
    pub u: u64,
    pub v: u64,
}

impl QuadrupleParam {
    /// `(A·r·u, A·s·v, B·r·v, B·s·u)`, or `None` on overflow.
    pub fn reconstruct(&self) -> Option<[u64; 4]> {
        let m = |x: u64, y: u64, z: u64| x.checked_mul(y)?.checked_mul(z);
        Some([
            m(self.a, self.r, self.u)?,
            m(self.a, self.s, self.v)?,
            m(self.b, self.r, self.v)?,
            m(self.b, self.s, self.u)?,
        ])
    }

    /// Checks every structural invariant against the interval: coprimality,
    /// reconstruction inside `(x, x+y]` with square-free members, the ratio
    /// bounds `(1+δ)⁻¹ <= A/B, r/s, u/v <= 1+δ`, and that unequal partners
    /// are at least `1/δ`.
    pub fn check(&self, table: &IntervalTable) -> std::result::Result<(), String> {
        if self.r.gcd(&self.s) != 1 || self.u.gcd(&self.v) != 1 {
            return Err(format!("{self:?}: r,s or u,v not coprime"));
        }
        let ns = self.reconstruct().ok_or_else(|| format!("{self:?}: overflow"))?;
        for n in ns {
            if table.is_squarefree(n) != Some(true) {
                return Err(format!("{self:?}: {n} not a square-free member"));
            }
        }
        let x = u128::from(table.x_lo());
        let hi = u128::from(table.hi());
        for (p, q) in [(self.a, self.b), (self.r, self.s), (self.u, self.v)] {
            let (p, q) = (u128::from(p), u128::from(q));
            if !within_ratio(p, q, x, hi) {
                return Err(format!("{self:?}: ratio {p}/{q} outside (1+δ)^±1"));
            }
            // p != q forces p, q >= 1/δ = x/y
            if p != q && (p.min(q) * (hi - x) < x) {
                return Err(format!("{self:?}: unequal pair {p},{q} below 1/δ"));
            }
        }
        Ok(())
    }
}

#[inline]
fn within_ratio(p: u128, q: u128, x: u128, hi: u128) -> bool {
    p * x <= q * hi && q * x <= p * hi
}

/// Recovers the parametrization of a square quadruple by the gcd construction.
pub fn param_of_quadruple(n: [u64; 4]) -> Result<QuadrupleParam> {
    for &v in &n {
        if !crate::numtheory::is_squarefree(v) {
            return Err(LabError::Contract(format!("{v} is not square-free")));
        }
    }
    let k12 = kernel_xor_wide(n[0].into(), n[1].into());
    let k34 = kernel_xor_wide(n[2].into(), n[3].into());
    if k12 != k34 {
        return Err(LabError::Contract(format!("{n:?} has non-square product")));
    }
    let a = n[0].gcd(&n[1]);
    let b = n[2].gcd(&n[3]);
    let r = (n[0] / a).gcd(&(n[2] / b));
    let s = (n[1] / a).gcd(&(n[3] / b));
    let u = n[0] / (a * r);
    let v = n[1] / (a * s);
    let p = QuadrupleParam { a, b, r, s, u, v };
    debug_assert_eq!(p.reconstruct(), Some(n));
    Ok(p)
}

/// Whether the quadruple is equal in pairs.
#[inline]
pub fn is_diagonal(n: &[u64; 4]) -> bool {
    (n[0] == n[1] && n[2] == n[3]) || (n[0] == n[2] && n[1] == n[3]) || (n[0] == n[3] && n[1] == n[2])
}

/// Integer range `[ceil(p·x/hi), floor(p·hi/x)]` of partners `q` with
/// `(1+δ)⁻¹ <= p/q <= 1+δ`, where `1+δ = hi/x`.
fn ratio_range(p: u64, x: u64, hi: u64) -> (u64, u64) {
    let (p, x, hi) = (u128::from(p), u128::from(x), u128::from(hi));
    let lo = (p * x).div_ceil(hi);
    let up = p * hi / x;
    (lo.max(1) as u64, up.min(u128::from(u64::MAX)) as u64)
}

/// Integer range of `t` with `c·t` in `(x, hi]`.
fn multiplier_range(c: u64, x: u64, hi: u64) -> (u64, u64) {
    (x / c + 1, hi / c)
}

fn intersect(a: (u64, u64), b: (u64, u64)) -> (u64, u64) {
    (a.0.max(b.0), a.1.min(b.1))
}

/// Walks every parameter tuple whose first member `n1 = A·r·u` is `first`,
/// calling `visit` on each non-diagonal square quadruple. Returns the number
/// of loop iterations spent.
fn walk_from_first(
    table: &IntervalTable,
    first: Entry<'_>,
    visit: &mut impl FnMut(QuadrupleParam, [u64; 4]),
) -> u64 {
    let x = table.x_lo();
    let hi = table.hi();
    let sqf = |n: u64| table.is_squarefree(n) == Some(true);
    let primes: Vec<u64> = first.primes().collect();
    let mut iterations = 0u64;
    // each prime of n1 goes to exactly one of A, r, u
    let assignments = 3u64.pow(primes.len() as u32);
    for code in 0..assignments {
        let (mut a, mut r, mut u) = (1u64, 1u64, 1u64);
        let mut c = code;
        for &p in &primes {
            match c % 3 {
                0 => a *= p,
                1 => r *= p,
                _ => u *= p,
            }
            c /= 3;
        }
        let (s_lo, s_hi) = ratio_range(r, x, hi);
        for s in s_lo..=s_hi {
            iterations += 1;
            if r.gcd(&s) != 1 {
                continue;
            }
            let Some(as_) = a.checked_mul(s) else { continue };
            let (v_lo, v_hi) = intersect(ratio_range(u, x, hi), multiplier_range(as_, x, hi));
            for v in v_lo..=v_hi {
                iterations += 1;
                if u.gcd(&v) != 1 {
                    continue;
                }
                let n2 = as_ * v;
                if !sqf(n2) {
                    continue;
                }
                let (Some(rv), Some(su)) = (r.checked_mul(v), s.checked_mul(u)) else { continue };
                let b_range = intersect(
                    ratio_range(a, x, hi),
                    intersect(multiplier_range(rv, x, hi), multiplier_range(su, x, hi)),
                );
                for b in b_range.0..=b_range.1 {
                    iterations += 1;
                    let n3 = b * rv;
                    let n4 = b * su;
                    if !sqf(n3) || !sqf(n4) {
                        continue;
                    }
                    let quad = [first.n, n2, n3, n4];
                    if !is_diagonal(&quad) {
                        visit(QuadrupleParam { a, b, r, s, u, v }, quad);
                    }
                }
            }
        }
    }
    iterations
}

fn budget_error(budget: u64) -> LabError {
    LabError::Scale(format!("parametrized enumeration exceeded its budget of {budget} iterations"))
}

/// Calls `visit` once per parameter tuple of a non-diagonal square quadruple,
/// in increasing order of `n1`. Sequential; meant for inspection and tests.
pub fn for_each_nondiagonal(
    table: &IntervalTable,
    budget: u64,
    mut visit: impl FnMut(QuadrupleParam, [u64; 4]),
) -> Result<u64> {
    let mut spent = 0u64;
    for first in table.squarefree_entries() {
        spent += walk_from_first(table, first, &mut visit);
        if spent > budget {
            return Err(budget_error(budget));
        }
    }
    Ok(spent)
}

/// Number of ordered non-diagonal square quadruples in the table, counted by
/// the parametrized enumeration. Outer loops run in parallel.
pub fn nondiagonal_count_in(table: &IntervalTable, budget: u64) -> Result<u64> {
    let spent = AtomicU64::new(0);
    let firsts: Vec<Entry<'_>> = table.squarefree_entries().collect();
    firsts
        .par_iter()
        .map(|&first| {
            let mut count = 0u64;
            let it = walk_from_first(table, first, &mut |_, _| count += 1);
            if spent.fetch_add(it, Ordering::Relaxed) + it > budget {
                Err(budget_error(budget))
            } else {
                Ok(count)
            }
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// Non-diagonal count for the interval `(x, x+y]` with the default budget.
pub fn param_enumerate_nondiagonal(x: u64, y: u64) -> Result<u64> {
    let table = IntervalTable::segmented_factorize(x, y)?;
    nondiagonal_count_in(&table, DEFAULT_BUDGET)
}

/// Route used to obtain the exact fourth moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountingRoute {
    Oracle,
    Parametrized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FourthMoment {
    pub s_count: u64,
    pub diagonal: u64,
    pub nondiagonal: u64,
    /// `E(Σ X(n))⁴`, the total number of ordered square quadruples.
    pub total: u64,
    pub route: CountingRoute,
}

/// Exact fourth moment via the parametrized enumeration.
pub fn fourth_moment_exact(table: &IntervalTable, budget: u64) -> Result<FourthMoment> {
    let s = table.squarefree_count();
    let nondiagonal = nondiagonal_count_in(table, budget)?;
    let diagonal = diagonal_count(s);
    Ok(FourthMoment { s_count: s, diagonal, nondiagonal, total: diagonal + nondiagonal, route: CountingRoute::Parametrized })
}

/// Exact fourth moment via the oracle.
pub fn fourth_moment_oracle(table: &IntervalTable) -> Result<FourthMoment> {
    let s = table.squarefree_count();
    let total = oracle_count_square_quadruples(table)?;
    let diagonal = diagonal_count(s);
    Ok(FourthMoment { s_count: s, diagonal, nondiagonal: total - diagonal, total, route: CountingRoute::Oracle })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    /// Literal O(S⁴) fold over all ordered quadruples.
    fn brute_force(members: &[u64]) -> u64 {
        let mut count = 0;
        for &a in members {
            for &b in members {
                let ab = kernel_xor_wide(a.into(), b.into());
                for &c in members {
                    let abc = kernel_xor_wide(ab, c.into());
                    for &d in members {
                        if kernel_xor_wide(abc, d.into()) == 1 {
                            count += 1;
                        }
                    }
                }
            }
        }
        count
    }

    #[test]
    fn diagonal_formula() {
        assert_eq!(diagonal_count(0), 0);
        assert_eq!(diagonal_count(1), 1);
        assert_eq!(diagonal_count(6), 96);
    }

    #[test]
    fn oracle_examples() {
        let t = IntervalTable::segmented_factorize(10, 10).unwrap();
        assert_eq!(oracle_count_square_quadruples(&t).unwrap(), 96);
        assert_eq!(brute_force(&t.squarefree_members()), 96);
        let one = IntervalTable::segmented_factorize(10, 1).unwrap();
        assert_eq!(oracle_count_square_quadruples(&one).unwrap(), 1);
        let none = IntervalTable::segmented_factorize(47, 1).unwrap();
        assert_eq!(oracle_count_square_quadruples(&none).unwrap(), 0);
        let big = IntervalTable::segmented_factorize(100_000, 1000).unwrap();
        assert!(matches!(oracle_count_square_quadruples(&big), Err(LabError::Scale(_))));
    }

    #[test]
    fn pair_histogram_matches_brute_force() {
        for (x, y) in [(100, 40), (30, 30), (1000, 60), (2, 50)] {
            let t = IntervalTable::segmented_factorize(x, y).unwrap();
            let m = t.squarefree_members();
            assert_eq!(count_square_quadruples(&m), brute_force(&m), "x={x} y={y}");
        }
    }

    #[test]
    fn parametrized_examples() {
        assert_eq!(param_enumerate_nondiagonal(10, 10).unwrap(), 0);
        let t = IntervalTable::segmented_factorize(100, 40).unwrap();
        let oracle = oracle_count_square_quadruples(&t).unwrap();
        let nd = nondiagonal_count_in(&t, DEFAULT_BUDGET).unwrap();
        assert_eq!(nd, oracle - diagonal_count(t.squarefree_count()));
        assert!(nd > 0);
    }

    #[test]
    fn param_of_quadruple_examples() {
        let p = param_of_quadruple([6, 10, 15, 1]).unwrap();
        assert_eq!(p, QuadrupleParam { a: 2, b: 1, r: 3, s: 1, u: 1, v: 5 });
        assert_eq!(p.reconstruct(), Some([6, 10, 15, 1]));
        let p = param_of_quadruple([35, 35, 35, 35]).unwrap();
        assert_eq!(p, QuadrupleParam { a: 35, b: 35, r: 1, s: 1, u: 1, v: 1 });
        let p = param_of_quadruple([30, 42, 30, 42]).unwrap();
        assert_eq!((p.a, p.b), (6, 6));
        assert_eq!(p.reconstruct(), Some([30, 42, 30, 42]));
        assert!(matches!(param_of_quadruple([6, 10, 15, 2]), Err(LabError::Contract(_))));
        assert!(matches!(param_of_quadruple([4, 1, 1, 1]), Err(LabError::Contract(_))));
    }

    #[test]
    fn enumeration_is_a_bijection_onto_nondiagonal_solutions() {
        let t = IntervalTable::segmented_factorize(300, 30).unwrap();
        let mut seen = HashSet::new();
        for_each_nondiagonal(&t, DEFAULT_BUDGET, |p, q| {
            assert!(seen.insert(q), "duplicate {q:?}");
            assert_eq!(param_of_quadruple(q).unwrap(), p);
            p.check(&t).unwrap();
        })
        .unwrap();
        let oracle = oracle_count_square_quadruples(&t).unwrap();
        assert_eq!(seen.len() as u64 + diagonal_count(t.squarefree_count()), oracle);
    }

    #[test]
    fn budget_is_enforced() {
        let t = IntervalTable::segmented_factorize(1000, 100).unwrap();
        assert!(matches!(nondiagonal_count_in(&t, 10), Err(LabError::Scale(_))));
        assert!(matches!(for_each_nondiagonal(&t, 10, |_, _| {}), Err(LabError::Scale(_))));
    }

    #[test]
    fn fourth_moment_routes_agree() {
        let t = IntervalTable::segmented_factorize(2000, 150).unwrap();
        let a = fourth_moment_oracle(&t).unwrap();
        let b = fourth_moment_exact(&t, DEFAULT_BUDGET).unwrap();
        assert_eq!(a.total, b.total);
        let none = IntervalTable::segmented_factorize(47, 1).unwrap();
        assert_eq!(fourth_moment_exact(&none, DEFAULT_BUDGET).unwrap().total, 0);
    }
}
