//! Gaussian mixtures: the exact, closed-form carrier for laws on R^d.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{log_det_from_chol, spd_cholesky};
use crate::rng::Rng;

use super::cloud::SampleCloud;
use super::grid::GridDensity;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// One mixture component with cached factorization data.
#[derive(Clone, Debug)]
pub struct GaussComponent {
    pub weight: f64,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    chol: DMatrix<f64>,
    cov_inv: DMatrix<f64>,
    log_norm: f64,
}

impl GaussComponent {
    pub fn new(weight: f64, mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if weight <= 0.0 || !weight.is_finite() {
            return Err(Error::InvalidDensity(format!(
                "component weight must be positive, got {weight}"
            )));
        }
        if mean.len() != cov.nrows() {
            return Err(Error::InvalidDensity(
                "mean and covariance dimensions differ".into(),
            ));
        }
        let chol = spd_cholesky(&cov)?;
        let log_det = log_det_from_chol(&chol);
        let cov_inv = cov
            .clone()
            .cholesky()
            .expect("validated above")
            .inverse();
        let d = mean.len() as f64;
        Ok(GaussComponent {
            weight,
            mean,
            cov,
            chol,
            cov_inv,
            log_norm: -0.5 * d * LN_2PI - 0.5 * log_det,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn log_pdf(&self, x: &DVector<f64>) -> f64 {
        let diff = x - &self.mean;
        let q = (&self.cov_inv * &diff).dot(&diff);
        self.log_norm - 0.5 * q
    }

    /// Σ⁻¹ (μ − x), the component contribution to the mixture score.
    pub fn score_term(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.cov_inv * (&self.mean - x)
    }

    pub fn cov_inv(&self) -> &DMatrix<f64> {
        &self.cov_inv
    }

    pub fn chol_l(&self) -> &DMatrix<f64> {
        &self.chol
    }
}

/// Finite Gaussian mixture on R^d.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawMixture", into = "RawMixture")]
pub struct GaussianMixture {
    dim: usize,
    components: Vec<GaussComponent>,
}

/// Largest exact component count before callers must discretize.
pub const COMPONENT_BUDGET: usize = 4096;

impl GaussianMixture {
    pub fn new(components: Vec<GaussComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidDensity("mixture needs ≥ 1 component".into()));
        }
        let dim = components[0].dim();
        if dim == 0 {
            return Err(Error::InvalidDimension("dimension must be ≥ 1".into()));
        }
        if components.iter().any(|c| c.dim() != dim) {
            return Err(Error::InvalidDensity(
                "all components must share the dimension".into(),
            ));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDensity(format!(
                "weights sum to {total}, expected 1 within 1e-12"
            )));
        }
        Ok(GaussianMixture { dim, components })
    }

    /// Single Gaussian N(mean, cov).
    pub fn gaussian(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        Self::new(vec![GaussComponent::new(1.0, mean, cov)?])
    }

    /// Standard normal N(0, I_d).
    pub fn standard(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension("dimension must be ≥ 1".into()));
        }
        Self::gaussian(DVector::zeros(d), DMatrix::identity(d, d))
    }

    /// Convenience 1-d mixture from (weight, mean, variance) triples.
    pub fn scalar_mixture(parts: &[(f64, f64, f64)]) -> Result<Self> {
        let comps = parts
            .iter()
            .map(|&(w, m, v)| {
                GaussComponent::new(
                    w,
                    DVector::from_element(1, m),
                    DMatrix::from_element(1, 1, v),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[GaussComponent] {
        &self.components
    }

    pub fn is_single(&self) -> bool {
        self.components.len() == 1
    }

    pub fn log_pdf(&self, x: &DVector<f64>) -> f64 {
        let mut max = f64::NEG_INFINITY;
        let terms: Vec<f64> = self
            .components
            .iter()
            .map(|c| {
                let t = c.weight.ln() + c.log_pdf(x);
                if t > max {
                    max = t;
                }
                t
            })
            .collect();
        if max == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
    }

    pub fn pdf(&self, x: &DVector<f64>) -> f64 {
        self.log_pdf(x).exp()
    }

    /// ∇ log f, assembled from the component score terms with stabilized
    /// posterior weights.
    pub fn score(&self, x: &DVector<f64>) -> DVector<f64> {
        let logs: Vec<f64> = self
            .components
            .iter()
            .map(|c| c.weight.ln() + c.log_pdf(x))
            .collect();
        let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut num = DVector::zeros(self.dim);
        let mut den = 0.0;
        for (c, &l) in self.components.iter().zip(&logs) {
            let r = (l - max).exp();
            num += c.score_term(x) * r;
            den += r;
        }
        num / den
    }

    /// Exact mean and covariance: m = Σ wᵢμᵢ, C = Σ wᵢ(Σᵢ + μᵢμᵢᵀ) − mmᵀ.
    pub fn moments(&self) -> (DVector<f64>, DMatrix<f64>) {
        let mut mean = DVector::zeros(self.dim);
        for c in &self.components {
            mean += &c.mean * c.weight;
        }
        let mut cov = DMatrix::zeros(self.dim, self.dim);
        for c in &self.components {
            cov += (&c.cov + &c.mean * c.mean.transpose()) * c.weight;
        }
        cov -= &mean * mean.transpose();
        (mean, cov)
    }

    pub fn scale(&self, s: f64) -> Result<Self> {
        if s <= 0.0 || !s.is_finite() {
            return Err(Error::InvalidScale(s));
        }
        let comps = self
            .components
            .iter()
            .map(|c| GaussComponent::new(c.weight, &c.mean * s, &c.cov * (s * s)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps)
    }

    pub fn translate(&self, shift: &DVector<f64>) -> Result<Self> {
        let comps = self
            .components
            .iter()
            .map(|c| GaussComponent::new(c.weight, &c.mean + shift, c.cov.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps)
    }

    pub fn center(&self) -> Result<Self> {
        let (mean, _) = self.moments();
        self.translate(&(-mean))
    }

    /// Law of a·X + b·Y for independent X, Y (exact component products).
    pub fn lin_comb(&self, other: &Self, a: f64, b: f64, budget: usize) -> Result<Self> {
        self.combine(other, a, b, a * a, b * b, budget)
    }

    /// Convex-combination convolution √θ·X + √θ̄·Y with the covariance
    /// weights kept exact (θ, not (√θ)², so θ = ½ mixes bit-exactly).
    pub fn convolve_theta(&self, other: &Self, theta: f64, budget: usize) -> Result<Self> {
        self.combine(
            other,
            theta.sqrt(),
            (1.0 - theta).sqrt(),
            theta,
            1.0 - theta,
            budget,
        )
    }

    fn combine(
        &self,
        other: &Self,
        mean_a: f64,
        mean_b: f64,
        cov_a: f64,
        cov_b: f64,
        budget: usize,
    ) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::InvalidPair(format!(
                "dimension mismatch {} vs {}",
                self.dim, other.dim
            )));
        }
        let k = self.components.len() * other.components.len();
        if k > budget {
            return Err(Error::BudgetExceeded { got: k, budget });
        }
        let mut comps = Vec::with_capacity(k);
        for ci in &self.components {
            for cj in &other.components {
                comps.push(GaussComponent::new(
                    ci.weight * cj.weight,
                    &ci.mean * mean_a + &cj.mean * mean_b,
                    &ci.cov * cov_a + &cj.cov * cov_b,
                )?);
            }
        }
        let merged = merge_components(comps)?;
        Self::new(merged)
    }

    /// Deterministic sampling: component choice by weight, then μ + Lz.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleCloud> {
        if n < 2 {
            return Err(Error::InvalidDensity("need n ≥ 2 samples".into()));
        }
        let mut rng = Rng::new(seed);
        let cum: Vec<f64> = self
            .components
            .iter()
            .scan(0.0, |acc, c| {
                *acc += c.weight;
                Some(*acc)
            })
            .collect();
        let mut points = Vec::with_capacity(n * self.dim);
        let mut z = DVector::zeros(self.dim);
        for _ in 0..n {
            let u = rng.uniform();
            let idx = cum.partition_point(|&c| c < u).min(self.components.len() - 1);
            let comp = &self.components[idx];
            for zi in z.iter_mut() {
                *zi = rng.normal();
            }
            let x = &comp.mean + comp.chol_l() * &z;
            points.extend(x.iter());
        }
        SampleCloud::new(self.dim, points, seed)
    }

    /// Restriction to a uniform grid, renormalized to unit mass.
    ///
    /// The grid is centered at the mixture mean and spans ±halfwidth on each
    /// axis; the truncated tail mass must not exceed 1e-8.
    pub fn discretize(&self, halfwidth: f64, points_per_axis: usize) -> Result<GridDensity> {
        if self.dim > 2 {
            return Err(Error::InvalidDimension(
                "grids support d ≤ 2 only".into(),
            ));
        }
        if halfwidth <= 0.0 || points_per_axis < 8 {
            return Err(Error::InvalidDensity(
                "need positive halfwidth and ≥ 8 points per axis".into(),
            ));
        }
        let (mean, _) = self.moments();

        // union-bound tail mass outside the box, per component and axis
        let mut tail = 0.0;
        for c in &self.components {
            for a in 0..self.dim {
                let sigma = c.cov[(a, a)].sqrt();
                let lo = (mean[a] - halfwidth - c.mean[a]) / sigma;
                let hi = (mean[a] + halfwidth - c.mean[a]) / sigma;
                tail += c.weight
                    * (crate::special::norm_cdf(lo) + crate::special::norm_sf(hi));
            }
        }
        if tail > 1e-8 {
            return Err(Error::InsufficientCoverage { tail, limit: 1e-8 });
        }

        let n = points_per_axis;
        let h = 2.0 * halfwidth / (n - 1) as f64;
        let origin: Vec<f64> = (0..self.dim).map(|a| mean[a] - halfwidth).collect();
        let spacing = vec![h; self.dim];
        let counts = if self.dim == 1 { vec![n] } else { vec![n, n] };

        let mut values = Vec::with_capacity(counts.iter().product());
        let mut x = DVector::zeros(self.dim);
        if self.dim == 1 {
            for i in 0..n {
                x[0] = origin[0] + h * i as f64;
                values.push(self.pdf(&x));
            }
        } else {
            for i in 0..n {
                x[0] = origin[0] + h * i as f64;
                for j in 0..n {
                    x[1] = origin[1] + h * j as f64;
                    values.push(self.pdf(&x));
                }
            }
        }
        GridDensity::new_renormalized(self.dim, origin, spacing, counts, values, tail)
    }
}

/// Combine components with matching (mean, cov); canonical ordering keeps
/// the representation deterministic.
fn merge_components(comps: Vec<GaussComponent>) -> Result<Vec<GaussComponent>> {
    let tol = 1e-9;
    let mut merged: Vec<GaussComponent> = Vec::with_capacity(comps.len());
    'outer: for c in comps {
        for m in merged.iter_mut() {
            if approx_eq_vec(&c.mean, &m.mean, tol) && approx_eq_mat(&c.cov, &m.cov, tol) {
                m.weight += c.weight;
                continue 'outer;
            }
        }
        merged.push(c);
    }
    merged.sort_by(|a, b| {
        let ka: Vec<f64> = a.mean.iter().chain(a.cov.iter()).cloned().collect();
        let kb: Vec<f64> = b.mean.iter().chain(b.cov.iter()).cloned().collect();
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(merged)
}

fn approx_eq_vec(a: &DVector<f64>, b: &DVector<f64>, tol: f64) -> bool {
    a.iter()
        .zip(b.iter())
        .all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())))
}

fn approx_eq_mat(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
    a.iter()
        .zip(b.iter())
        .all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())))
}

// ---- serde bridge ----

#[derive(Serialize, Deserialize)]
struct RawComponent {
    weight: f64,
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct RawMixture {
    dim: usize,
    components: Vec<RawComponent>,
}

impl TryFrom<RawMixture> for GaussianMixture {
    type Error = Error;
    fn try_from(raw: RawMixture) -> Result<Self> {
        let comps = raw
            .components
            .into_iter()
            .map(|rc| {
                let d = rc.mean.len();
                if d != raw.dim || rc.cov.len() != d || rc.cov.iter().any(|r| r.len() != d) {
                    return Err(Error::InvalidDensity(
                        "component dimensions inconsistent with dim".into(),
                    ));
                }
                let mean = DVector::from_vec(rc.mean);
                let cov = DMatrix::from_fn(d, d, |i, j| rc.cov[i][j]);
                GaussComponent::new(rc.weight, mean, cov)
            })
            .collect::<Result<Vec<_>>>()?;
        GaussianMixture::new(comps)
    }
}

impl From<GaussianMixture> for RawMixture {
    fn from(mix: GaussianMixture) -> Self {
        let dim = mix.dim;
        RawMixture {
            dim,
            components: mix
                .components
                .into_iter()
                .map(|c| RawComponent {
                    weight: c.weight,
                    mean: c.mean.iter().cloned().collect(),
                    cov: (0..dim)
                        .map(|i| (0..dim).map(|j| c.cov[(i, j)]).collect())
                        .collect(),
                })
                .collect(),
        }
    }
}
