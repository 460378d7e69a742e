//! Special functions for Gaussian analysis: standard normal pdf/cdf/quantile,
//! log-gamma, and unit-ball volumes.
#![allow(clippy::excessive_precision)]

use crate::scalar::Real;

/// Standard normal density φ(x) = (2π)^{-1/2} e^{-x²/2}.
pub fn norm_pdf<T: Real>(x: T) -> T {
    let inv_sqrt_2pi = T::of(0.398_942_280_401_432_7);
    inv_sqrt_2pi * (-x * x / T::of(2.0)).exp()
}

/// Standard normal CDF Φ(x) = ½ erfc(−x/√2).
pub fn norm_cdf<T: Real>(x: T) -> T {
    let half = T::of(0.5);
    half * (-x / T::of(std::f64::consts::SQRT_2)).erfc()
}

/// Upper tail Φ̄(x) = P(Z > x), accurate for large x.
pub fn norm_sf<T: Real>(x: T) -> T {
    norm_cdf(-x)
}

/// Standard normal quantile Φ⁻¹(u) for u ∈ (0,1).
///
/// Acklam's rational approximation refined by one Halley step against
/// `norm_cdf`, which brings the result to within a few ulps.
pub fn norm_quantile<T: Real>(u: T) -> T {
    assert!(
        u > T::zero() && u < T::one(),
        "quantile argument must lie in (0,1)"
    );
    let x = acklam(u.as_f64());
    // Halley refinement: solve Φ(x) − u = 0.
    let x = T::of(x);
    let e = norm_cdf(x) - u;
    let d = norm_pdf(x);
    if d > T::zero() {
        let r = e / d;
        x - r / (T::one() + x * r / T::of(2.0))
    } else {
        x
    }
}

fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -acklam(1.0 - p)
    }
}

/// log Γ(x) for x > 0 (Lanczos, g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let mut a = G[0];
        let t = x + 7.5;
        for (i, &g) in G.iter().enumerate().skip(1) {
            a += g / (x + i as f64);
        }
        0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
    }
}

/// Volume of the unit ball in R^d: ω_d = π^{d/2} / Γ(d/2 + 1).
pub fn unit_ball_volume(d: usize) -> f64 {
    let d = d as f64;
    ((d / 2.0) * std::f64::consts::PI.ln() - ln_gamma(d / 2.0 + 1.0)).exp()
}
