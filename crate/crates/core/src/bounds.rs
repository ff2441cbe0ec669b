//! Closed-form evaluators for the explicit bounds of the normal approximation.
//!
//! All logarithms are natural. Except for [`prop31_bound`], which carries its
//! explicit constant 80, the evaluators omit the unknown implicit constants
//! and are meant for observed/bound ratios.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::numtheory::threshold_from_delta;
use crate::scalar::Real;

/// Inputs shared by the theorem and corollary bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs<T> {
    pub x: u64,
    pub y: u64,
    pub s_count: u64,
    /// `y / x`.
    pub delta: T,
    /// Small/large prime threshold, `½·ln(1/δ)` unless overridden.
    pub z: T,
}

impl<T: Real> BoundInputs<T> {
    pub fn new(x: u64, y: u64, s_count: u64) -> Result<Self> {
        if x < 2 || y == 0 {
            return Err(LabError::Domain(format!("need x >= 2 and y >= 1, got x={x} y={y}")));
        }
        if s_count > y {
            return Err(LabError::Domain(format!("S={s_count} exceeds y={y}")));
        }
        let delta = T::count(y) / T::count(x);
        let z = T::lit(threshold_from_delta(y as f64 / x as f64));
        Ok(Self { x, y, s_count, delta, z })
    }

    pub fn with_z(mut self, z: T) -> Self {
        self.z = z;
        self
    }

    /// Whether `δ < 1/10`, the regime in which the normal approximation is stated.
    pub fn in_theorem_range(&self) -> bool {
        self.delta < T::lit(0.1)
    }
}

/// The three terms of the Wasserstein bound, before the `min(1, ·)` clamp:
/// `(y/S)^{3/2}(ln 1/δ)^{-1/2}`, `(y/S)·sqrt(δ ln x)`, `y ln x / (S^{3/2} ln y)`.
pub fn theorem_terms<T: Real>(b: &BoundInputs<T>) -> [T; 3] {
    let (y, s, x) = (T::count(b.y), T::count(b.s_count), T::count(b.x));
    let ratio = y / s;
    let log_inv_delta = (T::one() / b.delta).ln();
    [
        ratio.powf(T::lit(1.5)) / log_inv_delta.sqrt(),
        ratio * (b.delta * x.ln()).sqrt(),
        y * x.ln() / (s.powf(T::lit(1.5)) * y.ln()),
    ]
}

/// The three terms of the Kolmogorov bound, before the clamp; each is the
/// square root of the matching theorem term.
pub fn corollary_terms<T: Real>(b: &BoundInputs<T>) -> [T; 3] {
    let (y, s, x) = (T::count(b.y), T::count(b.s_count), T::count(b.x));
    let ratio = y / s;
    let log_inv_delta = (T::one() / b.delta).ln();
    [
        ratio.powf(T::lit(0.75)) / log_inv_delta.powf(T::lit(0.25)),
        ratio.sqrt() * (b.delta * x.ln()).powf(T::lit(0.25)),
        (y * x.ln()).sqrt() / (s.powf(T::lit(0.75)) * y.ln().sqrt()),
    ]
}

fn clamp_sum<T: Real>(s_count: u64, terms: [T; 3]) -> T {
    if s_count == 0 {
        return T::one();
    }
    let sum = terms[0] + terms[1] + terms[2];
    if sum.is_nan() {
        T::one()
    } else {
        sum.min(T::one())
    }
}

/// Constant-free Wasserstein bound, clamped to at most 1. `S = 0` gives 1.
pub fn theorem_bound<T: Real>(b: &BoundInputs<T>) -> T {
    clamp_sum(b.s_count, theorem_terms(b))
}

/// Constant-free Kolmogorov bound, clamped to at most 1. `S = 0` gives 1.
pub fn corollary_bound<T: Real>(b: &BoundInputs<T>) -> T {
    clamp_sum(b.s_count, corollary_terms(b))
}

/// Explicit bound `80·x²δ³·(1 + 2 ln x)·(1 + 2δ ln x)` on the number of
/// non-diagonal square quadruples.
pub fn prop31_bound<T: Real>(x: u64, delta: T) -> T {
    let x = T::count(x);
    let two = T::lit(2.0);
    T::lit(80.0) * x * x * delta.powi(3) * (T::one() + two * x.ln()) * (T::one() + two * delta * x.ln())
}

/// Comparator `y^{3/2}/sqrt(z) + y·ln x / ln y` for `Σ_p E|Δ_p f|³`.
pub fn est3_bound<T: Real>(x: u64, y: u64, z: T) -> T {
    let (x, y) = (T::count(x), T::count(y));
    y.powf(T::lit(1.5)) / z.sqrt() + y * x.ln() / y.ln()
}

/// Comparator `x²δ²(1 + δ ln x)(1/z + δ ln x)` for the variance of the
/// conditional exchange statistic.
pub fn goal_bound<T: Real>(x: u64, delta: T, z: T) -> T {
    let x = T::count(x);
    let dl = delta * x.ln();
    x * x * delta * delta * (T::one() + dl) * (z.recip() + dl)
}

/// Whether `C·x^{1/5}·ln x <= y <= x`, the range in which a positive
/// proportion of the interval is known to be square-free.
pub fn ft_admissible<T: Real>(x: u64, y: u64, c: T) -> bool {
    let xf = T::count(x);
    y <= x && T::count(y) >= c * xf.powf(T::lit(0.2)) * xf.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs(x: u64, y: u64, s: u64) -> BoundInputs<f64> {
        BoundInputs::new(x, y, s).unwrap()
    }

    #[test]
    fn theorem_example() {
        let b = inputs(100_000_000, 10_000, 6079);
        let t = theorem_terms(&b);
        // terms recomputed independently below
        let r: f64 = 10_000.0 / 6079.0;
        let e0 = r.powf(1.5) / (10_000f64).ln().sqrt();
        let e1 = r * (1e-4 * (1e8f64).ln()).sqrt();
        let e2 = 1e4 * (1e8f64).ln() / (6079f64.powf(1.5) * (1e4f64).ln());
        assert!((t[0] - e0).abs() < 1e-12 && (t[1] - e1).abs() < 1e-12 && (t[2] - e2).abs() < 1e-12);
        assert!((t[0] - 0.6952).abs() < 1e-3, "{}", t[0]);
        assert!((t[1] - 0.0707).abs() < 1e-3, "{}", t[1]);
        assert!((t[2] - 0.0423).abs() < 1e-3, "{}", t[2]);
        assert!((theorem_bound(&b) - 0.8082).abs() < 1e-3);
    }

    #[test]
    fn clamps_and_degenerate() {
        assert_eq!(theorem_bound(&inputs(1000, 50, 1)), 1.0);
        assert_eq!(corollary_bound(&inputs(1000, 50, 1)), 1.0);
        assert_eq!(theorem_bound(&inputs(1000, 50, 0)), 1.0);
        assert_eq!(corollary_bound(&inputs(1000, 50, 0)), 1.0);
        let b = inputs(1_000_000_000, 1000, 1000);
        assert_eq!(theorem_terms(&b)[0], 1.0 / (1e6f64).ln().sqrt());
    }

    #[test]
    fn corollary_terms_are_square_roots() {
        for (x, y, s) in [(100_000_000, 10_000, 6079), (1_000_000, 1000, 608), (10_000, 100, 60)] {
            let b = inputs(x, y, s);
            let t = theorem_terms(&b);
            let c = corollary_terms(&b);
            for i in 0..3 {
                assert!((c[i] - t[i].sqrt()).abs() < 1e-12 * c[i].max(1.0));
            }
        }
    }

    #[test]
    fn monotone_in_s() {
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for s in 1..=1000 {
            let b = inputs(1_000_000, 1000, s);
            let (t, c) = (theorem_bound(&b), corollary_bound(&b));
            assert!(t <= 1.0 && c <= 1.0);
            assert!(t <= prev.0 && c <= prev.1);
            prev = (t, c);
        }
    }

    #[test]
    fn prop31_values() {
        let v: f64 = prop31_bound(1000, 0.01);
        let l = (1000f64).ln();
        let expected = 80.0 * 1e6 * 1e-6 * (1.0 + 2.0 * l) * (1.0 + 0.02 * l);
        assert!((v - expected).abs() < 1e-9);
        assert!((v - 1349.0).abs() < 2.0, "{v}");
        assert!(prop31_bound(1000, 1e-9f64) < 1e-15);
        let mut prev = 0.0;
        for k in 1..100 {
            let b = prop31_bound(5000, k as f64 * 1e-3);
            assert!(b > prev);
            prev = b;
        }
    }

    #[test]
    fn est3_and_goal() {
        let z = 0.5 * (1e3f64).ln();
        let a: f64 = est3_bound(1_000_000, 1000, z);
        let b: f64 = est3_bound(1_000_000, 1000, 4.0 * z);
        let second = 1000.0 * (1e6f64).ln() / (1e3f64).ln();
        assert!(((a - second) / (b - second) - 2.0).abs() < 1e-12);
        assert!((a - (1000f64.powf(1.5) / z.sqrt() + 2000.0)).abs() < 1e-9);
        assert!(est3_bound::<f64>(100, 2, 1.0).is_finite());

        let g: f64 = goal_bound(100_000, 1e-3, 0.5 * (1e3f64).ln());
        let dl = 1e-3 * (1e5f64).ln();
        let expected = 1e10 * 1e-6 * (1.0 + dl) * (1.0 / (0.5 * (1e3f64).ln()) + dl);
        assert!((g - expected).abs() < 1e-6);
        assert!(goal_bound::<f64>(100_000, 1e-12, 3.0) < 1e-6);
        let g1: f64 = goal_bound(1000, 1e-9, 2.0);
        let g2: f64 = goal_bound(1000, 1e-9, 4.0);
        assert!((g1 / g2 - 2.0).abs() < 1e-4);
    }

    #[test]
    fn admissibility() {
        assert!(ft_admissible(10_000_000_000, 10_000, 1.0f64));
        assert!(ft_admissible(10_000_000_000, 5_000_000_000, 1000.0f64));
        assert!(!ft_admissible(10_000_000_000, 1, 1.0f64));
    }

    #[test]
    fn single_precision_agrees() {
        let b64 = inputs(1_000_000, 1000, 608);
        let b32 = BoundInputs::<f32>::new(1_000_000, 1000, 608).unwrap();
        assert!((theorem_bound(&b32) as f64 - theorem_bound(&b64)).abs() < 1e-5);
        assert!((prop31_bound(5000, 0.01f32) as f64 - prop31_bound(5000, 0.01f64)).abs() / prop31_bound(5000, 0.01f64) < 1e-5);
    }
}
