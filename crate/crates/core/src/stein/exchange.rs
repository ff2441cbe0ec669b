//! The exchange statistic `T`, its subset weights and per-prime parts `T_p`.

use num_traits::{FromPrimitive, Num, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{n_of_p, NpSet};
use crate::error::{LabError, Result};
use crate::numtheory::{is_large, IntervalTable, PrimeSplit};
use crate::rmf::SignSource;
use crate::scalar::{rational_string, Rational};

/// Largest `|L|` accepted by [`conditional_t_decomposition_check`].
pub const MAX_DECOMPOSITION_PRIMES: usize = 12;

fn from_usize<F: FromPrimitive>(v: usize) -> F {
    F::from_usize(v).expect("small integer representable")
}

fn binomial<F: Clone + Num + FromPrimitive>(n: usize, k: usize) -> F {
    (1..=k).fold(F::one(), |acc, i| acc * from_usize::<F>(n - k + i) / from_usize::<F>(i))
}

/// Subset weight `ν(A) = 1/(C(|L|,|A|)·(|L|−|A|)) = 1/(|L|·C(|L|−1,|A|))`.
pub fn nu_weight<F: Clone + Num + FromPrimitive>(l_size: usize, a_size: usize) -> Result<F> {
    if a_size >= l_size {
        return Err(LabError::Domain(format!("need |A| < |L|, got |A|={a_size} |L|={l_size}")));
    }
    Ok(F::one() / (from_usize::<F>(l_size) * binomial::<F>(l_size - 1, a_size)))
}

/// `Σ_{k=0}^{L−ω} C(L−ω, k)/(L·C(L−1, k))`, which equals `1/ω`.
///
/// This is the total `ν`-weight of the subsets `A ⊆ L \ {p}` avoiding the
/// `ω − 1` other large primes of a fixed `ℓ`.
pub fn putnam_identity_sum<F: Clone + Num + FromPrimitive>(l_size: usize, omega: usize) -> Result<F> {
    if omega == 0 || omega > l_size {
        return Err(LabError::Domain(format!("need 1 <= ω <= L, got ω={omega} L={l_size}")));
    }
    (0..=l_size - omega).try_fold(F::zero(), |acc, k| {
        Ok(acc + binomial::<F>(l_size - omega, k) * nu_weight::<F>(l_size, k)?)
    })
}

/// `T_p = Σ_{k∈N(p)} Σ_{ℓ∈N(p), ℓ≠k} X(k)X(ℓ)/ω_L(ℓp)`, evaluated as
/// `Σ_ℓ (X(ℓ)·G − 1)/ω_L(ℓp)` with `G = Σ_k X(k)`. Requires `p > z`.
pub fn t_p_value<F: Clone + Num + FromPrimitive>(np: &NpSet, signs: &SignSource, z: f64) -> F {
    let x_of = |ps: &[u64]| ps.iter().fold(1i64, |acc, &q| acc * i64::from(signs.sign(q)));
    let xs: Vec<i64> = np.member_primes.iter().map(|ps| x_of(ps)).collect();
    let g: i64 = xs.iter().sum();
    // group numerators by ω so the exact sum has at most a handful of divisions
    let mut by_omega: Vec<i64> = Vec::new();
    for (ps, &x) in np.member_primes.iter().zip(&xs) {
        let omega = ps.iter().filter(|&&q| is_large(q, z)).count() + 1;
        if by_omega.len() <= omega {
            by_omega.resize(omega + 1, 0);
        }
        by_omega[omega] += x * g - 1;
    }
    by_omega.iter().enumerate().skip(1).fold(F::zero(), |acc, (omega, &num)| {
        if num == 0 {
            acc
        } else {
            acc + F::from_i64(num).expect("representable") / from_usize::<F>(omega)
        }
    })
}

/// Exact `T_p` for a large prime.
pub fn t_p_statistic(p: u64, table: &IntervalTable, signs: &SignSource, z: f64) -> Result<Rational> {
    if !is_large(p, z) {
        return Err(LabError::Domain(format!("T_p is defined for p > z, got p={p} z={z}")));
    }
    Ok(t_p_value(&n_of_p(p, table), signs, z))
}

/// Sample variance of `Σ_{p∈L} T_p` over `trials` seeded sign draws.
///
/// Only primes with `|N(p)| >= 2` contribute. Trials run in parallel and are
/// folded in trial order, so the result does not depend on thread count.
pub fn var_t_monte_carlo(table: &IntervalTable, z: f64, trials: u64, master_seed: u64) -> Result<f64> {
    if trials < 2 {
        return Err(LabError::Domain("variance needs at least 2 trials".into()));
    }
    let sets: Vec<NpSet> = table
        .squarefree_primes()
        .into_iter()
        .filter(|&p| is_large(p, z))
        .map(|p| n_of_p(p, table))
        .filter(|np| np.len() >= 2)
        .collect();
    let values: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let signs = SignSource::for_trial(master_seed, i);
            sets.iter().map(|np| t_p_value::<f64>(np, &signs, z)).sum()
        })
        .collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    Ok(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0))
}

/// Both sides of the closed form for `E(T | X)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub large_primes: Vec<u64>,
    /// `½ Σ_A ν(A) Σ_{p∉A} E'[Δ_p f · Δ_p f^A]` by exhaustive resampling.
    #[serde(with = "rational_string")]
    pub direct: Rational,
    /// `Σ_p Σ_A ν(A)·|N^A(p)|`.
    #[serde(with = "rational_string")]
    pub diagonal_part: Rational,
    /// `Σ_p T_p`.
    #[serde(with = "rational_string")]
    pub off_diagonal_part: Rational,
    pub equal: bool,
}

struct Member {
    /// Product of the signs of its primes outside `L`.
    coefficient: i64,
    /// Bit `j` set when `L[j]` divides the member.
    mask: u32,
}

#[inline]
fn parity_sign(bits: u32) -> i64 {
    if bits.count_ones() & 1 == 0 {
        1
    } else {
        -1
    }
}

/// Interval sum with the large primes set by `v` (bit set means sign −1).
fn f_of(members: &[Member], v: u32) -> i64 {
    members.iter().map(|m| m.coefficient * parity_sign(m.mask & v)).sum()
}

fn submasks(mask: u32) -> impl Iterator<Item = u32> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & mask) };
        Some(cur)
    })
}

/// Checks `E(T|X) = Σ_p Σ_A ν(A)|N^A(p)| + Σ_p T_p` in exact arithmetic.
///
/// The left side follows the definition of `T`: for each `p ∈ L` and
/// `A ⊆ L \ {p}` it averages `Δ_p f · Δ_p f^A` over every resampled sign
/// vector `X'` on `A ∪ {p}`. The right side uses `N^A(p)`, the members of
/// `N(p)` coprime to every prime of `A`, and [`t_p_value`].
pub fn conditional_t_decomposition_check(
    table: &IntervalTable,
    z: f64,
    signs: &SignSource,
) -> Result<DecompositionReport> {
    let split = PrimeSplit::with_threshold(z, table)?;
    let large = split.large_primes;
    let l = large.len();
    if l > MAX_DECOMPOSITION_PRIMES {
        return Err(LabError::Scale(format!("|L| = {l} exceeds {MAX_DECOMPOSITION_PRIMES}")));
    }
    if l == 0 {
        return Err(LabError::Domain("no large primes divide the interval".into()));
    }
    let index = |p: u64| large.binary_search(&p).ok();
    let members: Vec<Member> = table
        .squarefree_entries()
        .map(|e| {
            let mut coefficient = 1i64;
            let mut mask = 0u32;
            for p in e.primes() {
                match index(p) {
                    Some(j) => mask |= 1 << j,
                    None => coefficient *= i64::from(signs.sign(p)),
                }
            }
            Member { coefficient, mask }
        })
        .collect();
    let v: u32 = large.iter().enumerate().filter(|(_, &p)| signs.sign(p) < 0).map(|(j, _)| 1u32 << j).sum();
    let full: u32 = (1u32 << l) - 1;
    let weights: Vec<Rational> = (0..l).map(|a| nu_weight(l, a)).collect::<Result<_>>()?;

    // direct: totals per |A| of Σ_{X'} Δ_p f · Δ_p f^A
    let mut direct_totals = vec![0i128; l];
    let f_v = f_of(&members, v);
    for j in 0..l {
        let bit = 1u32 << j;
        for a in submasks(full & !bit) {
            let m = a | bit;
            let mut acc = 0i128;
            for w in submasks(m) {
                let v_p = (v & !bit) | (w & bit);
                let v_a = (v & !a) | (w & a);
                let v_m = (v & !m) | (w & m);
                let lhs = f_v - f_of(&members, v_p);
                let rhs = f_of(&members, v_a) - f_of(&members, v_m);
                acc += i128::from(lhs * rhs);
            }
            direct_totals[a.count_ones() as usize] += acc;
        }
    }
    // E' averages over 2^{|A|+1} vectors, and T carries a factor ½
    let direct = direct_totals.iter().enumerate().fold(Rational::zero(), |acc, (a, &tot)| {
        acc + &weights[a] * Rational::new(tot.into(), (1i128 << (a + 2)).into())
    });

    let mut diagonal_totals = vec![0u64; l];
    let mut off_diagonal_part = Rational::zero();
    for (j, &p) in large.iter().enumerate() {
        let np = n_of_p(p, table);
        let masks: Vec<u32> = np
            .member_primes
            .iter()
            .map(|ps| ps.iter().filter_map(|&q| index(q)).map(|i| 1u32 << i).sum())
            .collect();
        for a in submasks(full & !(1 << j)) {
            diagonal_totals[a.count_ones() as usize] += masks.iter().filter(|&&mk| mk & a == 0).count() as u64;
        }
        off_diagonal_part += t_p_value::<Rational>(&np, signs, z);
    }
    let diagonal_part = diagonal_totals
        .iter()
        .enumerate()
        .fold(Rational::zero(), |acc, (a, &c)| acc + &weights[a] * Rational::from_integer(c.into()));
    let closed = &diagonal_part + &off_diagonal_part;
    Ok(DecompositionReport { large_primes: large, equal: direct == closed, direct, diagonal_part, off_diagonal_part })
}
