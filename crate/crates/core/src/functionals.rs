//! The information functionals: entropy h, entropy power N, Fisher
//! information J, relative entropy D and relative Fisher information I
//! (both against the standard Gaussian), the log-Sobolev deficit
//! δ = ½I − D, and the Stam defect p = N·J/d.
//!
//! Single Gaussians use closed forms; mixtures go through adaptive
//! quadrature (d ≤ 2) or Monte Carlo; grids use trapezoid sums with the
//! s = 1 Gaussian identities for the relative functionals.

use nalgebra::DVector;

use crate::density::{Density, GaussianMixture, DENSITY_FLOOR};
use crate::error::{Error, Result};
use crate::estimate::{Estimate, Method};
use crate::quad;
use crate::report::{DeficitReport, Params};
use crate::rng::derive_seed;

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const LN_2PI_E: f64 = 2.837_877_066_409_345_5;

/// Estimator settings: quadrature tolerances, Monte Carlo size, seeding.
#[derive(Clone, Copy, Debug)]
pub struct EvalCtx {
    pub quad_tol: f64,
    pub quad_tol_2d: f64,
    /// Integration window half-width in component standard deviations.
    pub window_sigmas: f64,
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for EvalCtx {
    fn default() -> Self {
        EvalCtx {
            quad_tol: 1e-8,
            quad_tol_2d: 1e-7,
            window_sigmas: 12.0,
            mc_samples: 1_000_000,
            seed: 0x5eed_0001,
        }
    }
}

impl EvalCtx {
    pub fn with_seed(seed: u64) -> Self {
        EvalCtx {
            seed,
            ..Default::default()
        }
    }
}

// Stream labels for the per-functional Monte Carlo substreams.
const SALT_H: u64 = 0x68;
const SALT_J: u64 = 0x6a;
const SALT_D: u64 = 0x64;
const SALT_I: u64 = 0x69;

/// Integration box covering `window_sigmas` standard deviations of every
/// component along each axis.
fn mixture_box(m: &GaussianMixture, w: f64) -> (Vec<f64>, Vec<f64>) {
    let d = m.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for c in m.components() {
        for a in 0..d {
            let s = c.cov[(a, a)].sqrt();
            lo[a] = lo[a].min(c.mean[a] - w * s);
            hi[a] = hi[a].max(c.mean[a] + w * s);
        }
    }
    (lo, hi)
}

/// E_f[k(X)] for a mixture: quadrature in d ≤ 2 with Monte Carlo fallback,
/// Monte Carlo in higher dimension.
fn mixture_expectation<K>(m: &GaussianMixture, k: K, ctx: &EvalCtx, salt: u64) -> Result<Estimate>
where
    K: Fn(&DVector<f64>) -> f64,
{
    let d = m.dim();
    if d == 1 {
        let (lo, hi) = mixture_box(m, ctx.window_sigmas);
        let integrand = |t: f64| {
            let x = DVector::from_element(1, t);
            m.pdf(&x) * k(&x)
        };
        match quad::integrate(integrand, lo[0], hi[0], ctx.quad_tol) {
            Ok((v, e)) => return Ok(Estimate::quadrature(v, e)),
            Err(_) => return mixture_mc(m, k, ctx, salt),
        }
    }
    if d == 2 {
        let (lo, hi) = mixture_box(m, ctx.window_sigmas);
        let res = quad::integrate2d(
            |a, b| {
                let x = DVector::from_vec(vec![a, b]);
                m.pdf(&x) * k(&x)
            },
            [lo[0], lo[1]],
            [hi[0], hi[1]],
            ctx.quad_tol_2d,
        );
        match res {
            Ok((v, e)) => return Ok(Estimate::quadrature(v, e)),
            Err(_) => return mixture_mc(m, k, ctx, salt),
        }
    }
    mixture_mc(m, k, ctx, salt)
}

fn mixture_mc<K>(m: &GaussianMixture, k: K, ctx: &EvalCtx, salt: u64) -> Result<Estimate>
where
    K: Fn(&DVector<f64>) -> f64,
{
    let n = ctx.mc_samples;
    let cloud = m.sample(n, derive_seed(ctx.seed, salt))?;
    let d = m.dim();
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    let mut x = DVector::zeros(d);
    for i in 0..n {
        x.copy_from_slice(cloud.point(i));
        let v = k(&x);
        sum += v;
        sum2 += v * v;
    }
    let mean = sum / n as f64;
    let var = (sum2 / n as f64 - mean * mean).max(0.0);
    Ok(Estimate::monte_carlo(mean, (var / n as f64).sqrt()))
}

/// h(X) = −∫ f log f.
pub fn entropy(x: &Density, ctx: &EvalCtx) -> Result<Estimate> {
    match x {
        Density::Mixture(m) if m.is_single() => {
            let c = &m.components()[0];
            let d = m.dim() as f64;
            let log_det = c.cov.clone().cholesky().unwrap().determinant().ln();
            Ok(Estimate::exact(0.5 * (d * LN_2PI_E + log_det)))
        }
        Density::Mixture(m) => mixture_expectation(m, |x| -m.log_pdf(x), ctx, SALT_H),
        Density::Grid(g) => {
            let (v, e) = g.integrate_with_error(|_, _, v| -v * v.max(DENSITY_FLOOR).ln());
            Ok(Estimate::quadrature(v, e))
        }
        Density::Samples(_) => Err(Error::UnsupportedEstimator(
            "entropy of a raw sample cloud (no density available)".into(),
        )),
    }
}

/// J(X) = ∫ f |∇ log f|².
pub fn fisher(x: &Density, ctx: &EvalCtx) -> Result<Estimate> {
    match x {
        Density::Mixture(m) if m.is_single() => {
            Ok(Estimate::exact(m.components()[0].cov_inv().trace()))
        }
        Density::Mixture(m) => {
            mixture_expectation(m, |x| m.score(x).norm_squared(), ctx, SALT_J)
        }
        Density::Grid(g) => {
            let grad = g.log_gradient();
            let (v, e) = g.integrate_with_error(|idx, _, v| {
                let s2: f64 = grad.iter().map(|ga| ga[idx] * ga[idx]).sum();
                v * s2
            });
            Ok(Estimate::quadrature(v, e))
        }
        Density::Samples(_) => Err(Error::UnsupportedEstimator(
            "Fisher information from raw samples (score estimation out of scope)".into(),
        )),
    }
}

/// D(X) = D(f ‖ φ), relative entropy against the standard Gaussian.
pub fn rel_entropy(x: &Density, ctx: &EvalCtx) -> Result<Estimate> {
    rel_entropy_vs_gs(x, 1.0, ctx)
}

/// I(X) = I(f ‖ φ), relative Fisher information against the standard Gaussian.
pub fn rel_fisher(x: &Density, ctx: &EvalCtx) -> Result<Estimate> {
    rel_fisher_vs_gs(x, 1.0, ctx)
}

/// D(X ‖ G_s) with G_s = N(0, sI), computed directly (not via the entropy
/// identity, so the identity stays testable).
pub fn rel_entropy_vs_gs(x: &Density, s: f64, ctx: &EvalCtx) -> Result<Estimate> {
    if s <= 0.0 {
        return Err(Error::PreconditionViolated(format!(
            "reference scale must be positive, got {s}"
        )));
    }
    let d = x.dim() as f64;
    let log_gs = move |x: &DVector<f64>| -0.5 * d * (LN_2PI + s.ln()) - x.norm_squared() / (2.0 * s);
    match x {
        Density::Mixture(m) if m.is_single() => {
            let c = &m.components()[0];
            let log_det = c.cov.clone().cholesky().unwrap().determinant().ln();
            let v = 0.5
                * (c.cov.trace() / s + c.mean.norm_squared() / s - d + d * s.ln() - log_det);
            Ok(Estimate::exact(v))
        }
        Density::Mixture(m) => {
            mixture_expectation(m, |x| m.log_pdf(x) - log_gs(x), ctx, SALT_D)
        }
        Density::Grid(g) => {
            if (s - 1.0).abs() < f64::EPSILON {
                // production route: s = 1 identity from h and E|Z|²
                let h = entropy(x, ctx)?;
                let m2 = x.second_moment()?;
                let v = -h.value + 0.5 * d * LN_2PI_E + 0.5 * m2 - 0.5 * d;
                Ok(Estimate::quadrature(v, h.stderr + g.mass_defect()))
            } else {
                // direct route, used by the identity check
                let (v, e) = g.integrate_with_error(|_, p, v| {
                    let xv = DVector::from_row_slice(p);
                    v * (v.max(DENSITY_FLOOR).ln() - log_gs(&xv))
                });
                Ok(Estimate::quadrature(v, e))
            }
        }
        Density::Samples(_) => Err(Error::UnsupportedEstimator(
            "relative entropy of a raw sample cloud".into(),
        )),
    }
}

/// I(X ‖ G_s) = ∫ f |∇ log f + x/s|², computed directly.
pub fn rel_fisher_vs_gs(x: &Density, s: f64, ctx: &EvalCtx) -> Result<Estimate> {
    if s <= 0.0 {
        return Err(Error::PreconditionViolated(format!(
            "reference scale must be positive, got {s}"
        )));
    }
    let d = x.dim() as f64;
    match x {
        Density::Mixture(m) if m.is_single() => {
            let c = &m.components()[0];
            let v = c.mean.norm_squared() / (s * s)
                + (c.cov.trace() / (s * s) - 2.0 * d / s + c.cov_inv().trace());
            Ok(Estimate::exact(v))
        }
        Density::Mixture(m) => mixture_expectation(
            m,
            |x| (m.score(x) + x / s).norm_squared(),
            ctx,
            SALT_I,
        ),
        Density::Grid(g) => {
            if (s - 1.0).abs() < f64::EPSILON {
                // production route: s = 1 identity from J and E|Z|²
                let j = fisher(x, ctx)?;
                let m2 = x.second_moment()?;
                let v = j.value - 2.0 * d + m2;
                Ok(Estimate::quadrature(v, j.stderr + g.mass_defect()))
            } else {
                let grad = g.log_gradient();
                let (v, e) = g.integrate_with_error(|idx, p, v| {
                    let s2: f64 = grad
                        .iter()
                        .zip(p)
                        .map(|(ga, &xa)| {
                            let t = ga[idx] + xa / s;
                            t * t
                        })
                        .sum();
                    v * s2
                });
                Ok(Estimate::quadrature(v, e))
            }
        }
        Density::Samples(_) => Err(Error::UnsupportedEstimator(
            "relative Fisher information of a raw sample cloud".into(),
        )),
    }
}

/// N(X) = exp(2h/d)/(2πe).
pub fn entropy_power(x: &Density, ctx: &EvalCtx) -> Result<Estimate> {
    let h = entropy(x, ctx)?;
    let d = x.dim() as f64;
    Ok(entropy_power_from_entropy(&h, d))
}

pub fn entropy_power_from_entropy(h: &Estimate, d: f64) -> Estimate {
    h.map(
        |hv| ((2.0 / d) * hv - LN_2PI_E).exp(),
        |hv| (2.0 / d) * ((2.0 / d) * hv - LN_2PI_E).exp(),
    )
}

/// δ_LSI(X) = ½ I(X) − D(X), +∞-flagged when I is infinite.
pub fn lsi_deficit(x: &Density, ctx: &EvalCtx) -> Result<Estimate> {
    let i = rel_fisher(x, ctx)?;
    let d = rel_entropy(x, ctx)?;
    Ok(lsi_from_parts(&i, &d))
}

pub fn lsi_from_parts(i: &Estimate, d: &Estimate) -> Estimate {
    if !i.finite {
        return Estimate::infinite(i.method);
    }
    i.affine(0.5, d, -1.0)
}

/// Stam defect p(X) = N(X)·J(X)/d.
pub fn stam_defect(x: &Density, ctx: &EvalCtx) -> Result<Estimate> {
    let n = entropy_power(x, ctx)?;
    let j = fisher(x, ctx)?;
    Ok(stam_from_parts(&n, &j, x.dim() as f64))
}

pub fn stam_from_parts(n: &Estimate, j: &Estimate, d: f64) -> Estimate {
    if !n.finite || !j.finite {
        return Estimate::infinite(Estimate::join_method(n.method, j.method));
    }
    let value = n.value * j.value / d;
    let stderr =
        ((j.value / d * n.stderr).powi(2) + (n.value / d * j.stderr).powi(2)).sqrt();
    match Estimate::join_method(n.method, j.method) {
        Method::ClosedForm => Estimate::exact(value),
        Method::Quadrature => Estimate::quadrature(value, stderr),
        Method::MonteCarlo => Estimate::monte_carlo(value, stderr),
    }
}

/// Every functional of X in one pass.
#[derive(Clone, Debug)]
pub struct FunctionalCatalog {
    pub entropy: Estimate,
    pub entropy_power: Estimate,
    pub fisher: Estimate,
    pub rel_entropy: Estimate,
    pub rel_fisher: Estimate,
    pub lsi_deficit: Estimate,
    pub stam_defect: Estimate,
}

pub fn catalog(x: &Density, ctx: &EvalCtx) -> Result<FunctionalCatalog> {
    let h = entropy(x, ctx)?;
    let d = x.dim() as f64;
    let n = entropy_power_from_entropy(&h, d);
    let j = fisher(x, ctx)?;
    let dd = rel_entropy(x, ctx)?;
    let i = rel_fisher(x, ctx)?;
    Ok(FunctionalCatalog {
        entropy: h,
        entropy_power: n,
        fisher: j,
        rel_entropy: dd,
        rel_fisher: i,
        lsi_deficit: lsi_from_parts(&i, &dd),
        stam_defect: stam_from_parts(&n, &j, d),
    })
}

impl FunctionalCatalog {
    /// Flat JSON record: value/stderr/method per functional.
    pub fn to_flat_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (name, e) in self.fields() {
            map.insert(name.to_string(), serde_json::json!(e.value));
            map.insert(format!("{name}_stderr"), serde_json::json!(e.stderr));
            map.insert(
                format!("{name}_method"),
                serde_json::to_value(e.method).unwrap(),
            );
        }
        serde_json::Value::Object(map)
    }

    pub fn fields(&self) -> [(&'static str, &Estimate); 7] {
        [
            ("h", &self.entropy),
            ("N", &self.entropy_power),
            ("J", &self.fisher),
            ("D", &self.rel_entropy),
            ("I", &self.rel_fisher),
            ("dLSI", &self.lsi_deficit),
            ("p", &self.stam_defect),
        ]
    }
}

/// The two Gaussian-reference identities, as residual reports:
///   h(Z) − (d/2)log(2πes) = −D(Z‖G_s) + E|Z|²/(2s) − d/2
///   J(Z) = I(Z‖G_s) + 2d/s − E|Z|²/s²
/// Both residuals must vanish within combined numerical error; both sides
/// are computed through independent routes.
pub fn gaussian_identities(
    z: &Density,
    s: f64,
    ctx: &EvalCtx,
) -> Result<(DeficitReport, DeficitReport)> {
    let d = z.dim() as f64;
    let m2 = z.second_moment()?;
    if !m2.is_finite() {
        return Err(Error::InvalidDensity("second moment not finite".into()));
    }

    let h = entropy(z, ctx)?;
    let d_s = rel_entropy_vs_gs(z, s, ctx)?;
    let lhs_ent = h.affine(1.0, &Estimate::exact(0.5 * d * (LN_2PI_E + s.ln())), -1.0);
    let rhs_ent = d_s.affine(-1.0, &Estimate::exact(m2 / (2.0 * s) - 0.5 * d), 1.0);
    let ent = DeficitReport::new("gaussian_identity_entropy", lhs_ent, rhs_ent, Params::default());

    let j = fisher(z, ctx)?;
    let i_s = rel_fisher_vs_gs(z, s, ctx)?;
    let rhs_fi = i_s.affine(1.0, &Estimate::exact(2.0 * d / s - m2 / (s * s)), 1.0);
    let fi = DeficitReport::new("gaussian_identity_fisher", j, rhs_fi, Params::default());

    Ok((ent, fi))
}
