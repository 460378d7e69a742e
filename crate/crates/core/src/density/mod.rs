//! Probability laws on R^d and the law-level operations every inequality
//! check consumes: scaling, convex-combination convolution, plain sums,
//! centering, discretization and sampling.

pub mod cloud;
pub mod grid;
pub mod mixture;

pub use cloud::SampleCloud;
pub use grid::{GridDensity, DENSITY_FLOOR};
pub use mixture::{GaussComponent, GaussianMixture, COMPONENT_BUDGET};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A law on R^d in one of three concrete carriers.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Density {
    #[serde(rename = "mixture")]
    Mixture(GaussianMixture),
    #[serde(rename = "grid")]
    Grid(GridDensity),
    #[serde(rename = "samples")]
    Samples(SampleCloud),
}

/// φ, the standard Gaussian on R^d, as a one-component mixture.
pub fn standard_gaussian(d: usize) -> Result<Density> {
    Ok(Density::Mixture(GaussianMixture::standard(d)?))
}

impl Density {
    pub fn dim(&self) -> usize {
        match self {
            Density::Mixture(m) => m.dim(),
            Density::Grid(g) => g.dim(),
            Density::Samples(c) => c.dim(),
        }
    }

    pub fn gaussian(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Density> {
        Ok(Density::Mixture(GaussianMixture::gaussian(mean, cov)?))
    }

    /// 1-d Gaussian N(mean, var).
    pub fn gaussian_1d(mean: f64, var: f64) -> Result<Density> {
        Self::gaussian(
            DVector::from_element(1, mean),
            DMatrix::from_element(1, 1, var),
        )
    }

    pub fn mixture_1d(parts: &[(f64, f64, f64)]) -> Result<Density> {
        Ok(Density::Mixture(GaussianMixture::scalar_mixture(parts)?))
    }

    pub fn as_mixture(&self) -> Option<&GaussianMixture> {
        match self {
            Density::Mixture(m) => Some(m),
            _ => None,
        }
    }

    /// Mean vector and covariance matrix (exact for mixtures, trapezoid for
    /// grids, empirical for clouds).
    pub fn moments(&self) -> Result<(DVector<f64>, DMatrix<f64>)> {
        match self {
            Density::Mixture(m) => Ok(m.moments()),
            Density::Grid(g) => g.moments(),
            Density::Samples(c) => Ok(c.moments()),
        }
    }

    /// E|X|² = tr Cov + |mean|².
    pub fn second_moment(&self) -> Result<f64> {
        let (mean, cov) = self.moments()?;
        Ok(cov.trace() + mean.norm_squared())
    }

    /// Law of sX.
    pub fn scale(&self, s: f64) -> Result<Density> {
        match self {
            Density::Mixture(m) => Ok(Density::Mixture(m.scale(s)?)),
            Density::Grid(g) => Ok(Density::Grid(g.scale(s)?)),
            Density::Samples(c) => Ok(Density::Samples(c.scale(s)?)),
        }
    }

    pub fn translate(&self, shift: &DVector<f64>) -> Result<Density> {
        let sv: Vec<f64> = shift.iter().cloned().collect();
        match self {
            Density::Mixture(m) => Ok(Density::Mixture(m.translate(shift)?)),
            Density::Grid(g) => Ok(Density::Grid(g.translate(&sv))),
            Density::Samples(c) => Ok(Density::Samples(c.translate(&sv))),
        }
    }

    /// Subtract the (exact or estimated) mean.
    pub fn center(&self) -> Result<Density> {
        match self {
            Density::Mixture(m) => Ok(Density::Mixture(m.center()?)),
            Density::Grid(g) => Ok(Density::Grid(g.center()?)),
            Density::Samples(c) => Ok(Density::Samples(c.center())),
        }
    }

    /// Law of a·X + b·Y for independent X, Y of the same carrier kind.
    pub fn lin_comb(&self, other: &Density, a: f64, b: f64) -> Result<Density> {
        if self.dim() != other.dim() {
            return Err(Error::InvalidPair(format!(
                "dimension mismatch {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        match (self, other) {
            (Density::Mixture(x), Density::Mixture(y)) => {
                Ok(Density::Mixture(x.lin_comb(y, a, b, COMPONENT_BUDGET)?))
            }
            (Density::Grid(x), Density::Grid(y)) => Ok(Density::Grid(x.lin_comb(y, a, b)?)),
            (Density::Samples(x), Density::Samples(y)) => {
                Ok(Density::Samples(x.lin_comb(y, a, b)?))
            }
            _ => Err(Error::InvalidPair(
                "mixed density kinds; discretize or sample first".into(),
            )),
        }
    }

    /// Law of √θ·X + √(1−θ)·Y. Endpoints return the untouched law; the
    /// mixture path keeps the covariance weights θ, θ̄ exact.
    pub fn convolve(&self, other: &Density, theta: f64) -> Result<Density> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::PreconditionViolated(format!(
                "theta must lie in [0,1], got {theta}"
            )));
        }
        if theta == 0.0 {
            return Ok(other.clone());
        }
        if theta == 1.0 {
            return Ok(self.clone());
        }
        if let (Density::Mixture(x), Density::Mixture(y)) = (self, other) {
            return Ok(Density::Mixture(x.convolve_theta(y, theta, COMPONENT_BUDGET)?));
        }
        self.lin_comb(other, theta.sqrt(), (1.0 - theta).sqrt())
    }

    /// Law of the plain sum X + Y.
    pub fn sum(&self, other: &Density) -> Result<Density> {
        self.lin_comb(other, 1.0, 1.0)
    }

    /// Deterministic sampling given a seed.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleCloud> {
        match self {
            Density::Mixture(m) => m.sample(n, seed),
            Density::Grid(g) => g.sample(n, seed),
            Density::Samples(c) => c.sample(n, seed),
        }
    }

    /// Grid restriction of a mixture (d ≤ 2).
    pub fn discretize(&self, halfwidth: f64, points_per_axis: usize) -> Result<Density> {
        match self {
            Density::Mixture(m) => Ok(Density::Grid(m.discretize(halfwidth, points_per_axis)?)),
            _ => Err(Error::UnsupportedEstimator(
                "discretize applies to mixtures".into(),
            )),
        }
    }
}
