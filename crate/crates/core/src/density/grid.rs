//! Uniform-grid densities in one and two dimensions: the quadrature/FFT
//! carrier for laws without closed forms.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fftconv;
use crate::rng::Rng;

use super::cloud::SampleCloud;

/// Density floor applied before any logarithm.
pub const DENSITY_FLOOR: f64 = 1e-300;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct GridDensity {
    dim: usize,
    origin: Vec<f64>,
    spacing: Vec<f64>,
    counts: Vec<usize>,
    values: Vec<f64>,
    /// Accumulated truncation/renormalization defect, folded into estimator
    /// error reports downstream.
    mass_defect: f64,
}

impl GridDensity {
    /// Strict constructor: values ≥ 0, trapezoidal mass within 1e-6 of 1.
    /// The stored values are renormalized to unit mass exactly.
    pub fn new(
        dim: usize,
        origin: Vec<f64>,
        spacing: Vec<f64>,
        counts: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let g = Self::new_renormalized(dim, origin, spacing, counts, values, 0.0)?;
        if g.mass_defect > 1e-6 {
            return Err(Error::InvalidDensity(format!(
                "grid mass deviates from 1 by {:.3e}",
                g.mass_defect
            )));
        }
        Ok(g)
    }

    /// Lenient constructor used by internal ops; renormalizes and records the
    /// defect (plus any `carried` defect from upstream truncation).
    pub(crate) fn new_renormalized(
        dim: usize,
        origin: Vec<f64>,
        spacing: Vec<f64>,
        counts: Vec<usize>,
        values: Vec<f64>,
        carried: f64,
    ) -> Result<Self> {
        if dim == 0 || dim > 2 {
            return Err(Error::InvalidDimension(format!(
                "grid dimension must be 1 or 2, got {dim}"
            )));
        }
        if origin.len() != dim || spacing.len() != dim || counts.len() != dim {
            return Err(Error::InvalidDensity(
                "origin/spacing/counts lengths must equal dim".into(),
            ));
        }
        if spacing.iter().any(|&h| h <= 0.0 || !h.is_finite()) {
            return Err(Error::InvalidDensity("spacing must be positive".into()));
        }
        if counts.iter().any(|&n| n < 4) {
            return Err(Error::InvalidDensity("need ≥ 4 nodes per axis".into()));
        }
        let expected: usize = counts.iter().product();
        if values.len() != expected {
            return Err(Error::InvalidDensity(format!(
                "value count {} does not match grid size {expected}",
                values.len()
            )));
        }
        if values.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::InvalidDensity(
                "grid values must be finite and ≥ 0".into(),
            ));
        }
        let mut g = GridDensity {
            dim,
            origin,
            spacing,
            counts,
            values,
            mass_defect: 0.0,
        };
        let mass = g.mass();
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidDensity("grid has zero mass".into()));
        }
        for v in g.values.iter_mut() {
            *v /= mass;
        }
        g.mass_defect = (mass - 1.0).abs() + carried;
        Ok(g)
    }

    /// Constructor for intentionally unnormalized samples (tilted densities,
    /// conditional slices): normalizes without counting the incoming mass as
    /// a defect.
    pub fn from_unnormalized(
        dim: usize,
        origin: Vec<f64>,
        spacing: Vec<f64>,
        counts: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let mut g = Self::new_renormalized(dim, origin, spacing, counts, values, 0.0)?;
        g.mass_defect = 0.0;
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mass_defect(&self) -> f64 {
        self.mass_defect
    }

    fn trap_factor(i: usize, n: usize) -> f64 {
        if i == 0 || i + 1 == n {
            0.5
        } else {
            1.0
        }
    }

    /// Trapezoid sum of w(x) · g(x, f(x)) over the nodes.
    pub fn integrate<F: Fn(&[f64], f64) -> f64>(&self, f: F) -> f64 {
        let cell: f64 = self.spacing.iter().product();
        match self.dim {
            1 => {
                let n = self.counts[0];
                let mut acc = 0.0;
                for i in 0..n {
                    let x = [self.origin[0] + self.spacing[0] * i as f64];
                    acc += Self::trap_factor(i, n) * f(&x, self.values[i]);
                }
                acc * cell
            }
            _ => {
                let (nx, ny) = (self.counts[0], self.counts[1]);
                let mut acc = 0.0;
                for i in 0..nx {
                    let wx = Self::trap_factor(i, nx);
                    let x = self.origin[0] + self.spacing[0] * i as f64;
                    for j in 0..ny {
                        let w = wx * Self::trap_factor(j, ny);
                        let p = [x, self.origin[1] + self.spacing[1] * j as f64];
                        acc += w * f(&p, self.values[i * ny + j]);
                    }
                }
                acc * cell
            }
        }
    }

    pub fn mass(&self) -> f64 {
        self.integrate(|_, v| v)
    }

    /// Trapezoid sum exposing the flat node index (for precomputed per-node
    /// arrays such as log-gradients).
    pub fn integrate_indexed<F: Fn(usize, &[f64], f64) -> f64>(&self, f: F) -> f64 {
        let cell: f64 = self.spacing.iter().product();
        match self.dim {
            1 => {
                let n = self.counts[0];
                let mut acc = 0.0;
                for i in 0..n {
                    let x = [self.origin[0] + self.spacing[0] * i as f64];
                    acc += Self::trap_factor(i, n) * f(i, &x, self.values[i]);
                }
                acc * cell
            }
            _ => {
                let (nx, ny) = (self.counts[0], self.counts[1]);
                let mut acc = 0.0;
                for i in 0..nx {
                    let wx = Self::trap_factor(i, nx);
                    let x = self.origin[0] + self.spacing[0] * i as f64;
                    for j in 0..ny {
                        let idx = i * ny + j;
                        let w = wx * Self::trap_factor(j, ny);
                        let p = [x, self.origin[1] + self.spacing[1] * j as f64];
                        acc += w * f(idx, &p, self.values[idx]);
                    }
                }
                acc * cell
            }
        }
    }

    /// Trapezoid integral with a Richardson error bound from the half-
    /// resolution grid (same integrand on every other node).
    pub fn integrate_with_error<F: Fn(usize, &[f64], f64) -> f64>(&self, f: F) -> (f64, f64) {
        let full = self.integrate_indexed(&f);
        // every-other-node trapezoid
        let coarse = match self.dim {
            1 => {
                let n = self.counts[0];
                let h = self.spacing[0];
                let m = n.div_ceil(2);
                let mut acc = 0.0;
                for k in 0..m {
                    let i = (2 * k).min(n - 1);
                    let x = [self.origin[0] + h * i as f64];
                    acc += Self::trap_factor(k, m) * f(i, &x, self.values[i]);
                }
                acc * 2.0 * h
            }
            _ => {
                let (nx, ny) = (self.counts[0], self.counts[1]);
                let (hx, hy) = (self.spacing[0], self.spacing[1]);
                let (mx, my) = (nx.div_ceil(2), ny.div_ceil(2));
                let mut acc = 0.0;
                for kx in 0..mx {
                    let i = (2 * kx).min(nx - 1);
                    let wx = Self::trap_factor(kx, mx);
                    let x = self.origin[0] + hx * i as f64;
                    for ky in 0..my {
                        let j = (2 * ky).min(ny - 1);
                        let idx = i * ny + j;
                        let w = wx * Self::trap_factor(ky, my);
                        let p = [x, self.origin[1] + hy * j as f64];
                        acc += w * f(idx, &p, self.values[idx]);
                    }
                }
                acc * 4.0 * hx * hy
            }
        };
        let err = (full - coarse).abs() / 3.0 + self.mass_defect * (1.0 + full.abs());
        (full, err)
    }

    pub fn moments(&self) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let d = self.dim;
        let mut mean = DVector::zeros(d);
        for a in 0..d {
            mean[a] = self.integrate(|x, v| x[a] * v);
        }
        let mut cov = DMatrix::zeros(d, d);
        for a in 0..d {
            for b in a..d {
                let m = self.integrate(|x, v| (x[a] - mean[a]) * (x[b] - mean[b]) * v);
                cov[(a, b)] = m;
                cov[(b, a)] = m;
            }
        }
        if !mean.iter().all(|m| m.is_finite()) {
            return Err(Error::InvalidDensity("grid moments not finite".into()));
        }
        Ok((mean, cov))
    }

    /// Law of sX: coordinates rescale, mass preserved exactly.
    pub fn scale(&self, s: f64) -> Result<Self> {
        if s <= 0.0 || !s.is_finite() {
            return Err(Error::InvalidScale(s));
        }
        let sd = s.powi(self.dim as i32);
        Ok(GridDensity {
            dim: self.dim,
            origin: self.origin.iter().map(|o| o * s).collect(),
            spacing: self.spacing.iter().map(|h| h * s).collect(),
            counts: self.counts.clone(),
            values: self.values.iter().map(|v| v / sd).collect(),
            mass_defect: self.mass_defect,
        })
    }

    pub fn translate(&self, shift: &[f64]) -> Self {
        let mut g = self.clone();
        for (o, s) in g.origin.iter_mut().zip(shift) {
            *o += s;
        }
        g
    }

    pub fn center(&self) -> Result<Self> {
        let (mean, _) = self.moments()?;
        let shift: Vec<f64> = mean.iter().map(|m| -m).collect();
        Ok(self.translate(&shift))
    }

    /// Cubic (Catmull–Rom) resample onto spacing `h` per axis, zero beyond
    /// the original support, clamped at 0 from below.
    pub fn resample(&self, h: &[f64]) -> Result<Self> {
        let resample_axis = |vals: &[f64], n_old: usize, stride: usize, lanes: usize,
                             h_old: f64, h_new: f64|
         -> (Vec<f64>, usize) {
            let span = h_old * (n_old - 1) as f64;
            let n_new = (span / h_new).floor() as usize + 1;
            let mut out = vec![0.0; n_new * lanes];
            let at = |lane: usize, i: isize| -> f64 {
                if i < 0 || i as usize >= n_old {
                    0.0
                } else {
                    vals[i as usize * stride + lane]
                }
            };
            for k in 0..n_new {
                let t = k as f64 * h_new / h_old;
                let i = t.floor() as isize;
                let f = t - i as f64;
                for lane in 0..lanes {
                    let p0 = at(lane, i - 1);
                    let p1 = at(lane, i);
                    let p2 = at(lane, i + 1);
                    let p3 = at(lane, i + 2);
                    let v = p1
                        + 0.5
                            * f
                            * (p2 - p0
                                + f * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3
                                    + f * (3.0 * (p1 - p2) + p3 - p0)));
                    out[k * lanes + lane] = v.max(0.0);
                }
            }
            (out, n_new)
        };

        match self.dim {
            1 => {
                let (vals, n) =
                    resample_axis(&self.values, self.counts[0], 1, 1, self.spacing[0], h[0]);
                GridDensity::new_renormalized(
                    1,
                    self.origin.clone(),
                    vec![h[0]],
                    vec![n],
                    vals,
                    self.mass_defect,
                )
            }
            _ => {
                let (nx, ny) = (self.counts[0], self.counts[1]);
                // axis 0: values are row-major (x-major), stride ny, lanes ny
                let (vx, nx2) = resample_axis(&self.values, nx, ny, ny, self.spacing[0], h[0]);
                // axis 1: transpose roles — iterate lanes = nx2 rows
                let mut transposed = vec![0.0; vx.len()];
                for i in 0..nx2 {
                    for j in 0..ny {
                        transposed[j * nx2 + i] = vx[i * ny + j];
                    }
                }
                let (vy, ny2) = resample_axis(&transposed, ny, nx2, nx2, self.spacing[1], h[1]);
                let mut vals = vec![0.0; nx2 * ny2];
                for j in 0..ny2 {
                    for i in 0..nx2 {
                        vals[i * ny2 + j] = vy[j * nx2 + i];
                    }
                }
                GridDensity::new_renormalized(
                    2,
                    self.origin.clone(),
                    h.to_vec(),
                    vec![nx2, ny2],
                    vals,
                    self.mass_defect,
                )
            }
        }
    }

    /// Law of a·X + b·Y via zero-padded linear convolution of the rescaled
    /// grids, renormalized (the renormalization defect is recorded).
    pub fn lin_comb(&self, other: &Self, a: f64, b: f64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::InvalidPair(format!(
                "dimension mismatch {} vs {}",
                self.dim, other.dim
            )));
        }
        let ga = self.scale(a)?;
        let gb = other.scale(b)?;
        let h: Vec<f64> = (0..self.dim)
            .map(|i| ga.spacing[i].min(gb.spacing[i]))
            .collect();
        let rel = |x: f64, y: f64| (x - y).abs() / x.max(y);
        let ga = if (0..self.dim).all(|i| rel(ga.spacing[i], h[i]) < 1e-12) {
            ga
        } else {
            ga.resample(&h)?
        };
        let gb = if (0..self.dim).all(|i| rel(gb.spacing[i], h[i]) < 1e-12) {
            gb
        } else {
            gb.resample(&h)?
        };

        let cell: f64 = h.iter().product();
        let (counts, mut vals) = match self.dim {
            1 => {
                let v = fftconv::convolve_1d(&ga.values, &gb.values);
                (vec![ga.counts[0] + gb.counts[0] - 1], v)
            }
            _ => {
                let v = fftconv::convolve_2d(
                    &ga.values,
                    (ga.counts[0], ga.counts[1]),
                    &gb.values,
                    (gb.counts[0], gb.counts[1]),
                );
                (
                    vec![
                        ga.counts[0] + gb.counts[0] - 1,
                        ga.counts[1] + gb.counts[1] - 1,
                    ],
                    v,
                )
            }
        };
        for v in vals.iter_mut() {
            *v = (*v * cell).max(0.0);
        }
        let origin: Vec<f64> = (0..self.dim).map(|i| ga.origin[i] + gb.origin[i]).collect();
        GridDensity::new_renormalized(
            self.dim,
            origin,
            h,
            counts,
            vals,
            ga.mass_defect + gb.mass_defect,
        )
    }

    /// Nodes and cumulative trapezoid CDF (1-d only), normalized to end at 1.
    pub fn cdf_1d(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        if self.dim != 1 {
            return Err(Error::InvalidDimension("cdf_1d needs a 1-d grid".into()));
        }
        let n = self.counts[0];
        let h = self.spacing[0];
        let xs: Vec<f64> = (0..n).map(|i| self.origin[0] + h * i as f64).collect();
        let mut cdf = vec![0.0; n];
        for i in 1..n {
            cdf[i] = cdf[i - 1] + 0.5 * h * (self.values[i - 1] + self.values[i]);
        }
        let total = cdf[n - 1];
        for c in cdf.iter_mut() {
            *c /= total;
        }
        Ok((xs, cdf))
    }

    /// Quantile of a 1-d grid law (piecewise-quadratic CDF inversion).
    pub fn quantile_1d(&self, xs: &[f64], cdf: &[f64], u: f64) -> f64 {
        let n = xs.len();
        if u <= 0.0 {
            return xs[0];
        }
        if u >= 1.0 {
            return xs[n - 1];
        }
        let k = cdf.partition_point(|&c| c < u).clamp(1, n - 1);
        let (c0, c1) = (cdf[k - 1], cdf[k]);
        let h = xs[k] - xs[k - 1];
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        let target = u - c0;
        // within the cell, C(t) = h(v0 t + (v1-v0)t²/2) up to normalization
        let norm = c1 - c0;
        if norm <= 0.0 {
            return xs[k - 1];
        }
        let a = (v1 - v0) * h;
        let b = v0 * h;
        let scaled = target / norm * (0.5 * a + b); // un-normalized target
        let t = if a.abs() > 1e-14 * b.abs().max(1.0) {
            let disc = (b * b + 2.0 * a * scaled).max(0.0);
            ((disc.sqrt() - b) / a).clamp(0.0, 1.0)
        } else {
            (scaled / b).clamp(0.0, 1.0)
        };
        xs[k - 1] + t * h
    }

    /// Deterministic inverse-CDF sampling.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleCloud> {
        if n < 2 {
            return Err(Error::InvalidDensity("need n ≥ 2 samples".into()));
        }
        let mut rng = Rng::new(seed);
        match self.dim {
            1 => {
                let (xs, cdf) = self.cdf_1d()?;
                let points: Vec<f64> = (0..n)
                    .map(|_| self.quantile_1d(&xs, &cdf, rng.uniform()))
                    .collect();
                SampleCloud::new(1, points, seed)
            }
            _ => {
                let (nx, ny) = (self.counts[0], self.counts[1]);
                // x-marginal as a 1-d grid
                let marginal: Vec<f64> = (0..nx)
                    .map(|i| {
                        (0..ny)
                            .map(|j| Self::trap_factor(j, ny) * self.values[i * ny + j])
                            .sum::<f64>()
                            * self.spacing[1]
                    })
                    .collect();
                let mx = GridDensity::from_unnormalized(
                    1,
                    vec![self.origin[0]],
                    vec![self.spacing[0]],
                    vec![nx],
                    marginal,
                )?;
                let (xs, cdf) = mx.cdf_1d()?;
                let mut points = Vec::with_capacity(2 * n);
                for _ in 0..n {
                    let x = mx.quantile_1d(&xs, &cdf, rng.uniform());
                    let i = (((x - self.origin[0]) / self.spacing[0]).round() as usize)
                        .min(nx - 1);
                    let col: Vec<f64> = (0..ny).map(|j| self.values[i * ny + j]).collect();
                    let cy = GridDensity::from_unnormalized(
                        1,
                        vec![self.origin[1]],
                        vec![self.spacing[1]],
                        vec![ny],
                        col,
                    )?;
                    let (ys, ycdf) = cy.cdf_1d()?;
                    let y = cy.quantile_1d(&ys, &ycdf, rng.uniform());
                    points.push(x);
                    points.push(y);
                }
                SampleCloud::new(2, points, seed)
            }
        }
    }

    /// Log-density gradient at the nodes: central differences of log f with
    /// one-sided edges and the 1e-300 floor.
    pub fn log_gradient(&self) -> Vec<Vec<f64>> {
        let lf: Vec<f64> = self
            .values
            .iter()
            .map(|&v| v.max(DENSITY_FLOOR).ln())
            .collect();
        match self.dim {
            1 => {
                let n = self.counts[0];
                let h = self.spacing[0];
                let mut g = vec![0.0; n];
                for i in 0..n {
                    g[i] = if i == 0 {
                        (lf[1] - lf[0]) / h
                    } else if i + 1 == n {
                        (lf[n - 1] - lf[n - 2]) / h
                    } else {
                        (lf[i + 1] - lf[i - 1]) / (2.0 * h)
                    };
                }
                vec![g]
            }
            _ => {
                let (nx, ny) = (self.counts[0], self.counts[1]);
                let (hx, hy) = (self.spacing[0], self.spacing[1]);
                let mut gx = vec![0.0; nx * ny];
                let mut gy = vec![0.0; nx * ny];
                for i in 0..nx {
                    for j in 0..ny {
                        let idx = i * ny + j;
                        gx[idx] = if i == 0 {
                            (lf[ny + j] - lf[j]) / hx
                        } else if i + 1 == nx {
                            (lf[idx] - lf[idx - ny]) / hx
                        } else {
                            (lf[idx + ny] - lf[idx - ny]) / (2.0 * hx)
                        };
                        gy[idx] = if j == 0 {
                            (lf[idx + 1] - lf[idx]) / hy
                        } else if j + 1 == ny {
                            (lf[idx] - lf[idx - 1]) / hy
                        } else {
                            (lf[idx + 1] - lf[idx - 1]) / (2.0 * hy)
                        };
                    }
                }
                vec![gx, gy]
            }
        }
    }
}

// ---- serde bridge ----

#[derive(Serialize, Deserialize)]
struct RawGrid {
    dim: usize,
    origin: Vec<f64>,
    spacing: Vec<f64>,
    counts: Vec<usize>,
    values: Vec<f64>,
}

impl TryFrom<RawGrid> for GridDensity {
    type Error = Error;
    fn try_from(raw: RawGrid) -> Result<Self> {
        GridDensity::new(raw.dim, raw.origin, raw.spacing, raw.counts, raw.values)
    }
}

impl From<GridDensity> for RawGrid {
    fn from(g: GridDensity) -> Self {
        RawGrid {
            dim: g.dim,
            origin: g.origin,
            spacing: g.spacing,
            counts: g.counts,
            values: g.values,
        }
    }
}
