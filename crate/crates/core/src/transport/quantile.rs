//! 1-d quadratic Wasserstein distance to the standard Gaussian through the
//! quantile coupling W₂² = ∫₀¹ (F⁻¹(u) − Φ⁻¹(u))² du.

use crate::density::{Density, GaussianMixture};
use crate::error::{Error, Result};
use crate::special::{norm_cdf, norm_quantile};

/// Chebyshev-in-angle midpoint rule: substituting u = (1+cos t)/2 turns the
/// unit interval into [0, π] with nodes clustered at the tails and weights
/// sin(t)·π/(2n), avoiding u ∈ {0, 1} entirely.
pub fn chebyshev_u_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut us = Vec::with_capacity(n);
    let mut ws = Vec::with_capacity(n);
    for k in 0..n {
        let t = (k as f64 + 0.5) * std::f64::consts::PI / n as f64;
        us.push(0.5 * (1.0 + t.cos()));
        ws.push(0.5 * t.sin() * std::f64::consts::PI / n as f64);
    }
    (us, ws)
}

/// Mixture CDF in one dimension.
fn mixture_cdf(m: &GaussianMixture, x: f64) -> f64 {
    m.components()
        .iter()
        .map(|c| c.weight * norm_cdf((x - c.mean[0]) / c.cov[(0, 0)].sqrt()))
        .sum()
}

/// Monotone quantile by bracketed Newton with bisection fallback.
pub(crate) fn mixture_quantile(m: &GaussianMixture, u: f64) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for c in m.components() {
        let s = c.cov[(0, 0)].sqrt();
        lo = lo.min(c.mean[0] - 14.0 * s);
        hi = hi.max(c.mean[0] + 14.0 * s);
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = mixture_cdf(m, x) - u;
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        // mixture pdf as derivative
        let x_vec = nalgebra::DVector::from_element(1, x);
        let pdf = m.pdf(&x_vec);
        let step = if pdf > 1e-280 { f / pdf } else { f.signum() };
        let mut next = x - step;
        if !(lo..=hi).contains(&next) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() < 1e-13 * (1.0 + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}

/// Analytic bound on the quantile integrand mass over (0, u0] ∪ [1−u0, 1),
/// using the Gaussian envelope of the mixture quantile and
/// |Φ⁻¹(u)|² ≤ 2 log(1/u).
fn tail_bound(u0: f64, max_abs_mu: f64, sigma_max: f64, w_min: f64) -> f64 {
    if u0 <= 0.0 {
        return 0.0;
    }
    let log_term = |v: f64| v * (1.0 + (1.0 / v).ln().max(0.0));
    // (F⁻¹ − Φ⁻¹)² ≤ 4μ*² + 8σ*² log(w_min scaled) + 4 log(1/u)
    let part = 4.0 * max_abs_mu * max_abs_mu * u0
        + 8.0 * sigma_max * sigma_max * log_term(u0 / w_min.min(1.0)).min(log_term(u0) + u0 * (1.0 / w_min).ln())
        + 4.0 * log_term(u0);
    2.0 * part // both tails
}

/// First-order sampling bias of the empirical quadratic cost between an
/// n-point cloud of X and an independent n-point standard-normal cloud:
/// E[W₂²(X_n, G_n)] ≈ W₂²(X, G) + (J_n(X) + J_n(G))/n with the truncated
/// quantile-density integral J_n(μ) = ∫_{1/(n+1)}^{n/(n+1)} u(1−u)/f(F⁻¹(u))² du.
/// Available for density-backed 1-d laws.
pub fn empirical_w2_bias(x: &Density, n: usize) -> Option<f64> {
    if x.dim() != 1 {
        return None;
    }
    let j_x = match x {
        Density::Mixture(m) => {
            let m = m.clone();
            quantile_density_integral(n, |u| {
                let q = mixture_quantile(&m, u);
                m.pdf(&nalgebra::DVector::from_element(1, q))
            })
        }
        Density::Grid(g) => {
            let g = g.clone();
            let (xs, cdf) = g.cdf_1d().ok()?;
            quantile_density_integral(n, |u| {
                let q = g.quantile_1d(&xs, &cdf, u);
                let t = (q - xs[0]) / (xs[1] - xs[0]);
                let i = (t.floor() as usize).min(xs.len() - 2);
                let frac = (t - i as f64).clamp(0.0, 1.0);
                (g.values()[i] * (1.0 - frac) + g.values()[i + 1] * frac).max(1e-12)
            })
        }
        Density::Samples(_) => return None,
    };
    let j_g = quantile_density_integral(n, |u| {
        super::super::special::norm_pdf(super::super::special::norm_quantile(u))
    });
    Some((j_x + j_g) / n as f64)
}

fn quantile_density_integral<F: Fn(f64) -> f64>(n: usize, pdf_at_quantile: F) -> f64 {
    let lo = 1.0 / (n as f64 + 1.0);
    let hi = 1.0 - lo;
    let m = 4096;
    let mut acc = 0.0;
    for k in 0..m {
        let u = lo + (hi - lo) * (k as f64 + 0.5) / m as f64;
        let f = pdf_at_quantile(u);
        acc += u * (1.0 - u) / (f * f);
    }
    acc * (hi - lo) / m as f64
}

/// W₂²(X, N(0,1)) for 1-d laws, with a quadrature error bound that includes
/// the analytic tail contribution.
pub fn w2_sq_quantile(x: &Density, nodes: usize) -> Result<(f64, f64)> {
    if x.dim() != 1 {
        return Err(Error::InvalidDimension("quantile path is 1-d only".into()));
    }
    let m2 = x.second_moment()?;
    if !m2.is_finite() {
        return Err(Error::InvalidDensity("second moment not finite".into()));
    }

    let quantile: Box<dyn Fn(f64) -> f64> = match x {
        Density::Mixture(m) => {
            let m = m.clone();
            Box::new(move |u| mixture_quantile(&m, u))
        }
        Density::Grid(g) => {
            let g = g.clone();
            let (xs, cdf) = g.cdf_1d()?;
            Box::new(move |u| g.quantile_1d(&xs, &cdf, u))
        }
        Density::Samples(c) => {
            let mut pts: Vec<f64> = c.flat().to_vec();
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            Box::new(move |u| {
                let pos = u * pts.len() as f64 - 0.5;
                let i = pos.floor().clamp(0.0, (pts.len() - 2) as f64) as usize;
                let frac = (pos - i as f64).clamp(0.0, 1.0);
                pts[i] * (1.0 - frac) + pts[i + 1] * frac
            })
        }
    };

    let eval = |n: usize| -> f64 {
        let (us, ws) = chebyshev_u_rule(n);
        us.iter()
            .zip(&ws)
            .map(|(&u, &w)| {
                let d = quantile(u) - norm_quantile(u);
                w * d * d
            })
            .sum()
    };
    let coarse = eval(nodes / 2);
    let full = eval(nodes);
    let quad_err = (full - coarse).abs();

    // tail mass beyond the extreme nodes
    let t0 = 0.5 * std::f64::consts::PI / nodes as f64;
    let u0 = 0.5 * (1.0 - t0.cos());
    let (mu_max, sigma_max, w_min) = match x {
        Density::Mixture(m) => {
            let mut mu = 0.0f64;
            let mut s = 0.0f64;
            let mut w = 1.0f64;
            for c in m.components() {
                mu = mu.max(c.mean[0].abs());
                s = s.max(c.cov[(0, 0)].sqrt());
                w = w.min(c.weight);
            }
            (mu, s, w)
        }
        _ => (m2.sqrt(), m2.sqrt().max(1.0), 1.0),
    };
    let err = quad_err + tail_bound(u0, mu_max, sigma_max, w_min);
    Ok((full.max(0.0), err))
}
