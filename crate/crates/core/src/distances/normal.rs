//! Standard normal density, distribution function and quantile.

use crate::error::{LabError, Result};
use crate::scalar::Real;

/// `φ(t)`.
pub fn normal_pdf<T: Real>(t: T) -> T {
    (-(t * t) / T::lit(2.0)).exp() / T::TAU().sqrt()
}

/// Complementary error function.
///
/// Below 3 the positive-term series `erf(x) = 2/√π·e^{-x²}·Σ (2x²)ⁿ x / (2n+1)!!`
/// is summed; above it the continued fraction
/// `erfc(x) = e^{-x²}/√π · 1/(x + ½/(x + 1/(x + 3/2/(x + …))))` is evaluated by
/// the modified Lentz method, which keeps relative accuracy in the tail.
pub fn erfc<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x < T::zero() {
        return T::lit(2.0) - erfc(-x);
    }
    if x < T::lit(3.0) {
        return T::one() - erf_series(x);
    }
    if x > T::lit(27.0) {
        return T::zero();
    }
    erfc_continued_fraction(x)
}

fn erf_series<T: Real>(x: T) -> T {
    let two_x2 = T::lit(2.0) * x * x;
    let mut term = x;
    let mut sum = x;
    let mut k = T::one();
    for _ in 0..200 {
        term = term * two_x2 / (T::lit(2.0) * k + T::one());
        sum = sum + term;
        if term <= sum * T::epsilon() {
            break;
        }
        k = k + T::one();
    }
    T::lit(2.0) / T::PI().sqrt() * (-(x * x)).exp() * sum
}

fn erfc_continued_fraction<T: Real>(x: T) -> T {
    let tiny = T::min_positive_value() / T::epsilon();
    // b0 = x, a_k = k/2, b_k = x
    let mut f = x;
    let mut c = x;
    let mut d = T::zero();
    let half = T::lit(0.5);
    for k in 1..500 {
        let a = T::count(k) * half;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).abs() <= T::epsilon() {
            break;
        }
    }
    (-(x * x)).exp() / (T::PI().sqrt() * f)
}

/// `Φ(t)`.
pub fn normal_cdf<T: Real>(t: T) -> T {
    T::lit(0.5) * erfc(-t / T::SQRT_2())
}

/// `1 − Φ(t)`, accurate in the upper tail.
pub fn normal_sf<T: Real>(t: T) -> T {
    T::lit(0.5) * erfc(t / T::SQRT_2())
}

/// `t·Φ(t) + φ(t)`, the antiderivative of `Φ` vanishing at `−∞`.
pub fn cdf_antiderivative<T: Real>(t: T) -> T {
    t * normal_cdf(t) + normal_pdf(t)
}

const ACKLAM_A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const ACKLAM_B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const ACKLAM_C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const ACKLAM_D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];
const ACKLAM_LOW: f64 = 0.02425;

fn horner<T: Real>(coeffs: &[f64], x: T) -> T {
    coeffs.iter().fold(T::zero(), |acc, &c| acc * x + T::lit(c))
}

/// Acklam's rational approximation (relative error about 1.15e-9).
fn acklam<T: Real>(q: T) -> T {
    let low = T::lit(ACKLAM_LOW);
    let tail = |p: T| {
        let r = (T::lit(-2.0) * p.ln()).sqrt();
        horner(&ACKLAM_C, r) / (horner(&ACKLAM_D, r) * r + T::one())
    };
    if q < low {
        tail(q)
    } else if q > T::one() - low {
        -tail(T::one() - q)
    } else {
        let p = q - T::lit(0.5);
        let r = p * p;
        p * horner(&ACKLAM_A, r) / (horner(&ACKLAM_B, r) * r + T::one())
    }
}

/// `Φ⁻¹(q)`: Acklam's approximation refined by one Newton step on `Φ`.
pub fn normal_quantile<T: Real>(q: T) -> Result<T> {
    if !(q > T::zero() && q < T::one()) {
        return Err(LabError::Domain(format!("quantile level must lie in (0, 1), got {q}")));
    }
    let t = acklam(q);
    // residual Φ(t) − q, taken through the upper tail when q > ½
    let residual = if q <= T::lit(0.5) { normal_cdf(t) - q } else { (T::one() - q) - normal_sf(t) };
    let density = normal_pdf(t);
    if density > T::zero() {
        Ok(t - residual / density)
    } else {
        Ok(t)
    }
}
