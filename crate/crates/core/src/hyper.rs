//! Ornstein–Uhlenbeck semigroup engine and hypercontractivity checks:
//! Nelson's estimate ‖P_t f‖_{q(t)} ≤ ‖f‖_p with q(t) = 1 + (p−1)e^{2t},
//! the log-derivative identity at t = 0 that encodes the LSI, the entropy
//! production functional of two test functions, and the sharpened two-
//! function estimate in its derivative-at-zero form (the only form testable
//! without the o(t) remainder).


use crate::density::{Density, GridDensity};
use crate::error::{Error, Result};
use crate::estimate::Estimate;
use crate::functionals::{lsi_deficit, rel_entropy, EvalCtx};
use crate::quad::gauss_hermite_128;
use crate::report::{DeficitReport, Params};
use crate::special::norm_pdf;

/// Hypercontractivity parameters: q(t) = 1 + (p−1)e^{2t} and the Hölder
/// conjugate p' = p/(p−1).
#[derive(Clone, Copy, Debug)]
pub struct HyperParams {
    pub p: f64,
    pub t: f64,
    pub theta: f64,
    pub q: f64,
    pub p_conj: f64,
}

impl HyperParams {
    pub fn new(p: f64, t: f64, theta: f64) -> Result<Self> {
        if p <= 1.0 {
            return Err(Error::PreconditionViolated(format!("need p > 1, got {p}")));
        }
        if t < 0.0 {
            return Err(Error::InvalidTime(t));
        }
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::PreconditionViolated(format!(
                "theta must lie in [0,1], got {theta}"
            )));
        }
        let q = 1.0 + (p - 1.0) * (2.0 * t).exp();
        Ok(HyperParams {
            p,
            t,
            theta,
            q,
            p_conj: p / (p - 1.0),
        })
    }
}

/// Test functions on R (the hypercontractive estimates are dimension-free;
/// one dimension exercises all the structure).
#[derive(Clone, Debug)]
pub enum TestFunction {
    /// f(x) = exp(log_scale + a·x); closed under P_t.
    LogLinear { a: f64, log_scale: f64 },
    /// Strictly positive samples on a uniform grid, log-cubic-spline
    /// interpolated between nodes and clamped beyond them.
    GridFn {
        origin: f64,
        spacing: f64,
        values: Vec<f64>,
    },
}

impl TestFunction {
    pub fn log_linear(a: f64) -> Self {
        TestFunction::LogLinear { a, log_scale: 0.0 }
    }

    pub fn constant(c: f64) -> Result<Self> {
        if c <= 0.0 {
            return Err(Error::InvalidFunction("constant must be positive".into()));
        }
        Ok(TestFunction::LogLinear {
            a: 0.0,
            log_scale: c.ln(),
        })
    }

    /// Sample a strictly positive function on [lo, hi] with n nodes.
    pub fn grid_from_fn<F: Fn(f64) -> f64>(lo: f64, hi: f64, n: usize, f: F) -> Result<Self> {
        if hi <= lo || hi.is_nan() || lo.is_nan() || n < 16 {
            return Err(Error::InvalidFunction(
                "need hi > lo and at least 16 nodes".into(),
            ));
        }
        let spacing = (hi - lo) / (n - 1) as f64;
        let values: Vec<f64> = (0..n).map(|i| f(lo + spacing * i as f64)).collect();
        if values.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
            return Err(Error::InvalidFunction(
                "grid test functions must be strictly positive and finite".into(),
            ));
        }
        Ok(TestFunction::GridFn {
            origin: lo,
            spacing,
            values,
        })
    }
}

/// Natural cubic spline through (uniform) ln-values; O(h⁴) away from the
/// boundary, which the γ-weight makes irrelevant.
struct LogSpline {
    origin: f64,
    spacing: f64,
    logs: Vec<f64>,
    second: Vec<f64>,
}

impl LogSpline {
    fn new(origin: f64, spacing: f64, values: &[f64]) -> Self {
        let n = values.len();
        let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        // natural spline: tridiagonal system for second derivatives
        let mut second = vec![0.0; n];
        let mut gamma = vec![0.0; n];
        let mut delta = vec![0.0; n];
        for i in 1..n - 1 {
            let rhs = 6.0 * (logs[i + 1] - 2.0 * logs[i] + logs[i - 1]) / (spacing * spacing);
            let beta = 4.0 - gamma[i - 1];
            gamma[i] = 1.0 / beta;
            delta[i] = (rhs - delta[i - 1]) / beta;
        }
        for i in (1..n - 1).rev() {
            second[i] = delta[i] - gamma[i] * second[i + 1];
        }
        LogSpline {
            origin,
            spacing,
            logs,
            second,
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.logs.len();
        let t = (x - self.origin) / self.spacing;
        if t <= 0.0 {
            return self.logs[0].exp();
        }
        if t >= (n - 1) as f64 {
            return self.logs[n - 1].exp();
        }
        let i = t.floor() as usize;
        let u = t - i as f64;
        let h2 = self.spacing * self.spacing;
        let a = 1.0 - u;
        let log_v = a * self.logs[i] + u * self.logs[i + 1]
            + h2 / 6.0 * ((a * a * a - a) * self.second[i] + (u * u * u - u) * self.second[i + 1]);
        log_v.exp()
    }
}

/// P_t f(x) = ∫ f(e^{-t}x + (1−e^{-2t})^{1/2} y) dγ(y).
pub fn ou_apply(f: &TestFunction, t: f64) -> Result<TestFunction> {
    if t < 0.0 {
        return Err(Error::InvalidTime(t));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    match f {
        TestFunction::LogLinear { a, log_scale } => {
            let decay = (-t).exp();
            Ok(TestFunction::LogLinear {
                a: a * decay,
                log_scale: log_scale + a * a * (1.0 - (-2.0 * t).exp()) / 2.0,
            })
        }
        TestFunction::GridFn {
            origin,
            spacing,
            values,
        } => {
            let spline = LogSpline::new(*origin, *spacing, values);
            let gh = gauss_hermite_128();
            let decay = (-t).exp();
            let diffuse = (1.0 - (-2.0 * t).exp()).sqrt();
            let out: Vec<f64> = (0..values.len())
                .map(|i| {
                    let x = origin + spacing * i as f64;
                    gh.integrate(|y| spline.eval(decay * x + diffuse * y))
                })
                .collect();
            Ok(TestFunction::GridFn {
                origin: *origin,
                spacing: *spacing,
                values: out,
            })
        }
    }
}

/// ‖f‖_{L^q(γ)} = (∫ |f|^q dγ)^{1/q}.
pub fn lq_gamma_norm(f: &TestFunction, q: f64) -> Result<Estimate> {
    if q < 1.0 {
        return Err(Error::PreconditionViolated(format!("need q ≥ 1, got {q}")));
    }
    match f {
        TestFunction::LogLinear { a, log_scale } => {
            Ok(Estimate::exact((log_scale + a * a * q / 2.0).exp()))
        }
        TestFunction::GridFn {
            origin,
            spacing,
            values,
        } => {
            let n = values.len();
            let node = |i: usize| origin + spacing * i as f64;
            let term = |i: usize| values[i].powf(q) * norm_pdf(node(i));
            let trap = |stride: usize| -> f64 {
                let idx: Vec<usize> = (0..n).step_by(stride).collect();
                let m = idx.len();
                let mut acc = 0.0;
                for (k, &i) in idx.iter().enumerate() {
                    let w = if k == 0 || k + 1 == m { 0.5 } else { 1.0 };
                    acc += w * term(i);
                }
                acc * spacing * stride as f64
            };
            let full = trap(1);
            let coarse = trap(2);
            if !full.is_finite() || full <= 0.0 {
                return Err(Error::EstimatorFailed(
                    "grid norm integral not finite".into(),
                ));
            }
            let err = (full - coarse).abs() / 3.0;
            let value = full.powf(1.0 / q);
            // delta method through s ↦ s^{1/q}
            let dval = value / (q * full);
            Ok(Estimate::quadrature(value, (dval * err).abs()))
        }
    }
}

/// Nelson's estimate at q = q(t): deficit = ‖f‖_p − ‖P_t f‖_{q(t)} ≥ 0.
pub fn nelson_check(f: &TestFunction, p: f64, t: f64) -> Result<DeficitReport> {
    let hp = HyperParams::new(p, t, 0.0)?;
    let lhs = lq_gamma_norm(&ou_apply(f, t)?, hp.q)?;
    let rhs = lq_gamma_norm(f, p)?;
    Ok(DeficitReport::new(
        "nelson",
        lhs,
        rhs,
        Params::default().with_t(t),
    ))
}

/// The centered law with density proportional to f^p dγ.
pub fn tilted_density(f: &TestFunction, p: f64) -> Result<Density> {
    match f {
        TestFunction::LogLinear { a, .. } => {
            // e^{pax} φ(x) ∝ φ(x − pa): N(pa, 1), centered to N(0,1)
            let _ = a;
            Density::gaussian_1d(0.0, 1.0)
        }
        TestFunction::GridFn {
            origin,
            spacing,
            values,
        } => {
            let vals: Vec<f64> = (0..values.len())
                .map(|i| values[i].powf(p) * norm_pdf(origin + spacing * i as f64))
                .collect();
            let g = GridDensity::from_unnormalized(
                1,
                vec![*origin],
                vec![*spacing],
                vec![values.len()],
                vals,
            )
            .map_err(|_| Error::InvalidFunction("tilted density has zero mass".into()))?;
            Ok(Density::Grid(g.center()?))
        }
    }
}

/// Uncentered tilted law (the Gross construction keeps the mean).
fn tilted_density_uncentered(f: &TestFunction, p: f64) -> Result<Density> {
    match f {
        TestFunction::LogLinear { a, .. } => Density::gaussian_1d(p * a, 1.0),
        TestFunction::GridFn { .. } => {
            // grid construction is already position-faithful
            match f {
                TestFunction::GridFn {
                    origin,
                    spacing,
                    values,
                } => {
                    let vals: Vec<f64> = (0..values.len())
                        .map(|i| values[i].powf(p) * norm_pdf(origin + spacing * i as f64))
                        .collect();
                    let g = GridDensity::from_unnormalized(
                        1,
                        vec![*origin],
                        vec![*spacing],
                        vec![values.len()],
                        vals,
                    )?;
                    Ok(Density::Grid(g))
                }
                _ => unreachable!(),
            }
        }
    }
}

/// log ‖P_t f‖_{q(t)}.
fn log_norm_along_flow(f: &TestFunction, p: f64, t: f64) -> Result<f64> {
    let hp = HyperParams::new(p, t, 0.0)?;
    Ok(lq_gamma_norm(&ou_apply(f, t)?, hp.q)?.value.ln())
}

/// Forward difference of t ↦ log ‖P_t f‖_{q(t)} at t = 0 with one Richardson
/// refinement (t < 0 is outside the semigroup, so central stencils are out).
fn flow_derivative_at_zero(f: &TestFunction, p: f64, h: f64) -> Result<f64> {
    let eta0 = log_norm_along_flow(f, p, 0.0)?;
    let s_h = (log_norm_along_flow(f, p, h)? - eta0) / h;
    let s_h2 = (log_norm_along_flow(f, p, h / 2.0)? - eta0) / (h / 2.0);
    Ok(2.0 * s_h2 - s_h)
}

/// Gross derivative identity at t = 0: the log-norm derivative equals
/// −(2(p−1)/p²)·δ_LSI(X₀) for X₀ ∝ f^p dγ.
pub struct GrossReport {
    pub analytic: f64,
    pub finite_diff: f64,
    pub gap: f64,
    /// Nonpositivity of the derivative (equivalent to the LSI for X₀).
    pub nonpositive: DeficitReport,
}

pub fn gross_derivative_check(f: &TestFunction, p: f64, ctx: &EvalCtx) -> Result<GrossReport> {
    if p <= 1.0 {
        return Err(Error::PreconditionViolated(format!("need p > 1, got {p}")));
    }
    let x0 = tilted_density_uncentered(f, p)?;
    let delta = lsi_deficit(&x0, ctx)?;
    let coeff = 2.0 * (p - 1.0) / (p * p);
    let analytic = -coeff * delta.value;
    let finite_diff = flow_derivative_at_zero(f, p, 1e-4)?;
    let nonpositive = DeficitReport::new(
        "gross_derivative_nonpositive",
        Estimate::quadrature(finite_diff, delta.stderr.max(1e-9)),
        Estimate::exact(0.0),
        Params::default(),
    );
    Ok(GrossReport {
        analytic,
        finite_diff,
        gap: (analytic - finite_diff).abs(),
        nonpositive,
    })
}

/// Entropy production E_{p,θ}(f,g) = θD(X̂) + θ̄D(Ŷ) − D(√θX̂ + √θ̄Ŷ)
/// for the centered tilted laws X̂ ∝ |f|^p γ, Ŷ ∝ |g|^p γ.
pub fn entropy_production(
    f: &TestFunction,
    g: &TestFunction,
    p: f64,
    theta: f64,
    ctx: &EvalCtx,
) -> Result<Estimate> {
    let hp = HyperParams::new(p, 0.0, theta)?;
    let mut x = tilted_density(f, p)?;
    let mut y = tilted_density(g, p)?;
    // unify carriers when one side is Gaussian and the other a grid
    match (&x, &y) {
        (Density::Mixture(_), Density::Grid(_)) => {
            x = x.discretize(13.0, 4096)?;
        }
        (Density::Grid(_), Density::Mixture(_)) => {
            y = y.discretize(13.0, 4096)?;
        }
        _ => {}
    }
    let conv = x.convolve(&y, hp.theta)?;
    let dx = rel_entropy(&x, ctx)?;
    let dy = rel_entropy(&y, ctx)?;
    let dc = rel_entropy(&conv, ctx)?;
    Ok(dx.affine(theta, &dy, 1.0 - theta).affine(1.0, &dc, -1.0))
}

/// The sharpened two-function estimate in derivative form:
/// d/dt log(‖P_tf‖^{θ̄}_{q(t)} ‖P_tg‖^{θ}_{q(t)})|₀ ≤ −(2(p−1)/p²)·E_{p,θ}(f,g),
/// plus per-t log-ratio diagnostics for the finite-t (o(t)-obscured) regime.
pub struct ImprovedNelsonReport {
    pub derivative: DeficitReport,
    pub production: Estimate,
    /// (t, measured log-ratio, linearized bound −(2t/(pp'))E) — diagnostics.
    pub per_t: Vec<(f64, f64, f64)>,
}

pub fn improved_nelson_check(
    f: &TestFunction,
    g: &TestFunction,
    p: f64,
    theta: f64,
    t_grid: &[f64],
    ctx: &EvalCtx,
) -> Result<ImprovedNelsonReport> {
    let hp = HyperParams::new(p, 0.0, theta)?;
    let production = entropy_production(f, g, p, theta, ctx)?;
    let coeff = 2.0 * (p - 1.0) / (p * p);

    let deriv =
        (1.0 - theta) * flow_derivative_at_zero(f, p, 1e-4)? + theta * flow_derivative_at_zero(g, p, 1e-4)?;
    let lhs = Estimate::quadrature(deriv, 1e-6);
    let rhs = production.scaled(-coeff);
    let derivative = DeficitReport::new("improved_nelson_derivative", lhs, rhs, Params::theta(theta));

    let log_norm_pair = |t: f64| -> Result<f64> {
        let hq = HyperParams::new(p, t, theta)?.q;
        let nf = lq_gamma_norm(&ou_apply(f, t)?, hq)?.value.ln();
        let ng = lq_gamma_norm(&ou_apply(g, t)?, hq)?.value.ln();
        Ok((1.0 - theta) * nf + theta * ng)
    };
    let base = log_norm_pair(0.0)?;
    let mut per_t = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let measured = log_norm_pair(t)? - base;
        let bound = -2.0 * t / (p * hp.p_conj) * production.value;
        per_t.push((t, measured, bound));
    }
    Ok(ImprovedNelsonReport {
        derivative,
        production,
        per_t,
    })
}
