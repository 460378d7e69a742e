//! Deterministic generators for the randomized suites: well-conditioned
//! Gaussians in d ≤ 3 and centered 1-d mixtures.

use nalgebra::{DMatrix, DVector};

use crate::density::Density;
use crate::error::Result;
use crate::rng::{derive_seed, Rng};

/// Random N(μ, Σ) with |μ| ≤ ~2 and eigenvalues of Σ kept away from 0.
pub fn random_gaussian(seed: u64, dim: usize) -> Result<Density> {
    let mut rng = Rng::new(seed);
    let mean = DVector::from_iterator(dim, (0..dim).map(|_| 1.2 * rng.normal()));
    let a = DMatrix::from_fn(dim, dim, |_, _| 0.7 * rng.normal());
    let cov = &a * a.transpose() + DMatrix::identity(dim, dim) * 0.3;
    Density::gaussian(mean, cov)
}

/// Centered random Gaussian (for the convolution-inequality suites).
pub fn random_centered_gaussian(seed: u64, dim: usize) -> Result<Density> {
    let mut rng = Rng::new(seed);
    let a = DMatrix::from_fn(dim, dim, |_, _| 0.7 * rng.normal());
    let cov = &a * a.transpose() + DMatrix::identity(dim, dim) * 0.3;
    Density::gaussian(DVector::zeros(dim), cov)
}

/// Centered 1-d mixture with k components, means in [−2, 2] and variances
/// in [0.3, 1.5].
pub fn random_mixture_1d(seed: u64, k: usize) -> Result<Density> {
    let mut rng = Rng::new(derive_seed(seed, 0xa11));
    let raw: Vec<f64> = (0..k).map(|_| 0.2 + rng.uniform()).collect();
    let sum: f64 = raw.iter().sum();
    let mut parts: Vec<(f64, f64, f64)> = raw
        .iter()
        .map(|w| {
            (
                w / sum,
                4.0 * (rng.uniform() - 0.5),
                0.3 + 1.2 * rng.uniform(),
            )
        })
        .collect();
    // exact weight normalization: fix the last weight
    let head: f64 = parts[..k - 1].iter().map(|p| p.0).sum();
    parts[k - 1].0 = 1.0 - head;
    Density::mixture_1d(&parts)?.center()
}
