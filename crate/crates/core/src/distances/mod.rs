//! Distances between an empirical sample and the standard normal law.

mod normal;

use serde::{Deserialize, Serialize};

pub use normal::{cdf_antiderivative, erfc, normal_cdf, normal_pdf, normal_quantile, normal_sf};

use crate::error::{LabError, Result};
use crate::scalar::Real;

/// Sorted, finite, non-empty sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet<T> {
    values: Vec<T>,
}

impl<T: Real> SampleSet<T> {
    pub fn new(mut values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(LabError::Domain("sample must be non-empty".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(LabError::Domain(format!("sample contains non-finite value {bad}")));
        }
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        Ok(Self { values })
    }

    /// The normal quantiles at levels `(i − ½)/n`, `i = 1..=n`.
    pub fn normal_quantiles(n: usize) -> Result<Self> {
        let nf = T::count(n as u64);
        let values = (1..=n)
            .map(|i| normal_quantile((T::count(i as u64) - T::lit(0.5)) / nf))
            .collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Distinct values with the empirical CDF level just after each.
    fn plateaus(&self) -> impl Iterator<Item = (T, T)> + '_ {
        let n = T::count(self.values.len() as u64);
        let mut i = 0;
        std::iter::from_fn(move || {
            if i >= self.values.len() {
                return None;
            }
            let v = self.values[i];
            while i < self.values.len() && self.values[i] == v {
                i += 1;
            }
            Some((v, T::count(i as u64) / n))
        })
    }
}

/// `sup_t |F_n(t) − Φ(t)|`, the maximum over order statistics of
/// `max(|i/n − Φ(x_(i))|, |(i−1)/n − Φ(x_(i))|)`.
pub fn kolmogorov_stat<T: Real>(sample: &SampleSet<T>) -> T {
    let n = T::count(sample.len() as u64);
    sample.values().iter().enumerate().fold(T::zero(), |acc, (i, &v)| {
        let cdf = normal_cdf(v);
        let above = T::count(i as u64 + 1) / n;
        let below = T::count(i as u64) / n;
        acc.max((above - cdf).abs()).max((below - cdf).abs())
    })
}

/// `∫ (c − Φ)` over `[a, b]` in closed form.
fn signed_plateau<T: Real>(c: T, a: T, b: T) -> T {
    c * (b - a) - (cdf_antiderivative(b) - cdf_antiderivative(a))
}

/// `∫ |c − Φ|` over `[a, b]`, split at the crossing `Φ⁻¹(c)` when interior.
fn plateau_integral<T: Real>(c: T, a: T, b: T) -> T {
    if c > T::zero() && c < T::one() {
        if let Ok(cross) = normal_quantile(c) {
            if cross > a && cross < b {
                return signed_plateau(c, a, cross).abs() + signed_plateau(c, cross, b).abs();
            }
        }
    }
    signed_plateau(c, a, b).abs()
}

/// Wasserstein-1 distance `∫ |F_n(t) − Φ(t)| dt`, integrated exactly plateau
/// by plateau with the antiderivative `tΦ(t) + φ(t)`; both tails are
/// integrated analytically to infinity.
pub fn wasserstein1<T: Real>(sample: &SampleSet<T>) -> T {
    let values = sample.values();
    let first = values[0];
    let last = values[values.len() - 1];
    // ∫_{-∞}^{a} Φ = G(a); ∫_{b}^{∞} (1 − Φ) = G(−b)
    let mut total = cdf_antiderivative(first) + cdf_antiderivative(-last);
    let mut prev: Option<(T, T)> = None;
    for (v, level) in sample.plateaus() {
        if let Some((start, c)) = prev {
            total = total + plateau_integral(c, start, v);
        }
        prev = Some((v, level));
    }
    total
}

/// `Φ⁺(ξ; t, ε)`: equal to `ε` left of `t`, decreasing linearly to 0 on
/// `[t, t+ε]`, and 0 beyond.
pub fn phi_plus<T: Real>(xi: T, t: T, eps: T) -> Result<T> {
    if !(eps > T::zero()) {
        return Err(LabError::Domain(format!("eps must be positive, got {eps}")));
    }
    Ok(if xi < t {
        eps
    } else if xi <= t + eps {
        t + eps - xi
    } else {
        T::zero()
    })
}

/// Kolmogorov and Wasserstein distances with the check `K <= 2·sqrt(W)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KkwCheck<T> {
    pub ks: T,
    pub w1: T,
    /// `K / (2·sqrt(W))`.
    pub ratio: T,
    pub holds: bool,
}

pub fn kkw_check<T: Real>(sample: &SampleSet<T>) -> KkwCheck<T> {
    let ks = kolmogorov_stat(sample);
    let w1 = wasserstein1(sample);
    let bound = T::lit(2.0) * w1.sqrt();
    KkwCheck { ks, w1, ratio: ks / bound, holds: ks <= bound }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// `∫|F_n − Φ|` by composite Gauss–Legendre quadrature on each plateau
    /// and on truncated tails, independent of the closed form.
    pub(crate) fn w1_by_quadrature(values: &[f64]) -> f64 {
        let nodes = [
            (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
            (-0.538_469_310_105_683, 0.478_628_670_499_366_5),
            (0.0, 0.568_888_888_888_888_9),
            (0.538_469_310_105_683, 0.478_628_670_499_366_5),
            (0.906_179_845_938_664, 0.236_926_885_056_189_1),
        ];
        let n = values.len() as f64;
        let integrate = |a: f64, b: f64, c: f64, panels: usize| {
            let h = (b - a) / panels as f64;
            let mut s = 0.0;
            for k in 0..panels {
                let mid = a + (k as f64 + 0.5) * h;
                for (x, w) in nodes {
                    s += w * (c - normal_cdf(mid + 0.5 * h * x)).abs() * 0.5 * h;
                }
            }
            s
        };
        let mut total = integrate(values[0] - 12.0, values[0], 0.0, 4000);
        total += integrate(values[values.len() - 1], values[values.len() - 1] + 12.0, 1.0, 4000);
        for i in 1..values.len() {
            let (a, b, c) = (values[i - 1], values[i], i as f64 / n);
            if normal_cdf(a) < c && normal_cdf(b) > c {
                // split at the kink of |c − Φ|, located by bisection
                let (mut lo, mut hi) = (a, b);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if normal_cdf(mid) < c { lo = mid } else { hi = mid }
                }
                total += integrate(a, lo, c, 16) + integrate(lo, b, c, 16);
            } else {
                total += integrate(a, b, c, 16);
            }
        }
        total
    }

    #[test]
    fn point_mass_distances() {
        let s = SampleSet::new(vec![0.0f64]).unwrap();
        assert_eq!(kolmogorov_stat(&s), 0.5);
        let w = wasserstein1(&s);
        assert!((w - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-15);
        for m in [-3.0f64, -0.5, 1.25, 4.0] {
            let s = SampleSet::new(vec![m]).unwrap();
            let closed = m * (2.0 * normal_cdf(m) - 1.0) + 2.0 * normal_pdf(m);
            assert!((wasserstein1(&s) - closed).abs() < 1e-13, "m={m}");
        }
        let chk = kkw_check(&SampleSet::new(vec![0.0f64]).unwrap());
        assert!(chk.holds);
        let expected = 0.5 / (2.0 * (2.0 / std::f64::consts::PI).sqrt().sqrt());
        assert!((chk.ratio - expected).abs() < 1e-14);
        assert!((chk.ratio - 0.280).abs() < 1e-3);
    }

    #[test]
    fn far_point_mass() {
        let s = SampleSet::new(vec![10.0f64; 5]).unwrap();
        assert!((kolmogorov_stat(&s) - normal_cdf(10.0)).abs() < 1e-15);
        assert!((kolmogorov_stat(&s) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn quantile_samples() {
        let mut prev = f64::INFINITY;
        for n in [100usize, 1000, 10_000] {
            let s = SampleSet::<f64>::normal_quantiles(n).unwrap();
            assert!((kolmogorov_stat(&s) - 0.5 / n as f64).abs() < 1e-9);
            let w = wasserstein1(&s);
            assert!(w < prev);
            prev = w;
            let chk = kkw_check(&s);
            assert!(chk.holds && chk.ratio < 0.2);
        }
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let n100 = SampleSet::<f64>::normal_quantiles(100).unwrap();
        let q = w1_by_quadrature(n100.values());
        assert!((wasserstein1(&n100) - q).abs() < 1e-9, "{} vs {q}", wasserstein1(&n100));
        let n1000 = SampleSet::<f64>::normal_quantiles(1000).unwrap();
        assert!((wasserstein1(&n1000) - w1_by_quadrature(n1000.values())).abs() < 1e-11);
        let mixed = SampleSet::new(vec![-1.3, -0.2, -0.2, 0.0, 0.4, 0.4, 0.4, 2.2, 3.1f64]).unwrap();
        let q = w1_by_quadrature(mixed.values());
        assert!((wasserstein1(&mixed) - q).abs() < 1e-9);
    }

    #[test]
    fn ties_jump_by_multiplicity() {
        let a = SampleSet::new(vec![0.3f64, 0.3, 0.3, -1.0]).unwrap();
        let lv: Vec<_> = a.plateaus().collect();
        assert_eq!(lv, vec![(-1.0, 0.25), (0.3, 1.0)]);
    }

    #[test]
    fn phi_plus_cases() {
        let (t, e) = (0.7f64, 0.2);
        assert_eq!(phi_plus(t - 1.0, t, e).unwrap(), e);
        assert!((phi_plus(t + e / 2.0, t, e).unwrap() - e / 2.0).abs() < 1e-15);
        assert_eq!(phi_plus(t + 2.0 * e, t, e).unwrap(), 0.0);
        assert!(phi_plus(0.0, 0.0, 0.0f64).is_err());
        assert!(phi_plus(0.0, 0.0, -1.0f64).is_err());
    }

    #[test]
    fn rejects_bad_samples() {
        assert!(SampleSet::<f64>::new(vec![]).is_err());
        assert!(SampleSet::new(vec![1.0, f64::NAN]).is_err());
        assert!(SampleSet::new(vec![f64::INFINITY]).is_err());
    }

    proptest! {
        #[test]
        fn w1_is_lipschitz_under_shift(
            values in prop::collection::vec(-4.0f64..4.0, 1..60),
            h in -2.0f64..2.0,
        ) {
            let a = SampleSet::new(values.clone()).unwrap();
            let b = SampleSet::new(values.iter().map(|v| v + h).collect()).unwrap();
            prop_assert!((wasserstein1(&a) - wasserstein1(&b)).abs() <= h.abs() + 1e-12);
        }

        #[test]
        fn distances_in_range_and_kkw_holds(values in prop::collection::vec(-6.0f64..6.0, 1..200)) {
            let s = SampleSet::new(values).unwrap();
            let chk = kkw_check(&s);
            prop_assert!((0.0..=1.0).contains(&chk.ks));
            prop_assert!(chk.w1 >= 0.0);
            prop_assert!(chk.holds);
        }

        #[test]
        fn phi_plus_lipschitz_majorant(a in -5.0f64..5.0, b in -5.0f64..5.0, t in -3.0f64..3.0, e in 1e-3f64..3.0) {
            let pa = phi_plus(a, t, e).unwrap();
            let pb = phi_plus(b, t, e).unwrap();
            prop_assert!((pa - pb).abs() <= (a - b).abs() + 1e-12);
            let indicator = if a < t { e } else { 0.0 };
            prop_assert!(pa >= indicator);
        }
    }
}
