//! Sample clouds: the Monte Carlo carrier.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, Rng};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawCloud", into = "RawCloud")]
pub struct SampleCloud {
    dim: usize,
    points: Vec<f64>, // flat, row-major n × dim
    seed: u64,
}

impl SampleCloud {
    pub fn new(dim: usize, points: Vec<f64>, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension("dimension must be ≥ 1".into()));
        }
        if !points.len().is_multiple_of(dim) || points.len() / dim < 2 {
            return Err(Error::InvalidDensity(
                "cloud needs at least 2 complete points".into(),
            ));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidDensity("cloud points must be finite".into()));
        }
        Ok(SampleCloud { dim, points, seed })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: n ≥ 2
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn flat(&self) -> &[f64] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn moments(&self) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.len();
        let d = self.dim;
        let mut mean = DVector::zeros(d);
        for i in 0..n {
            for a in 0..d {
                mean[a] += self.points[i * d + a];
            }
        }
        mean /= n as f64;
        let mut cov = DMatrix::zeros(d, d);
        for i in 0..n {
            for a in 0..d {
                let da = self.points[i * d + a] - mean[a];
                for b in a..d {
                    let db = self.points[i * d + b] - mean[b];
                    cov[(a, b)] += da * db;
                }
            }
        }
        for a in 0..d {
            for b in a..d {
                let v = cov[(a, b)] / n as f64;
                cov[(a, b)] = v;
                cov[(b, a)] = v;
            }
        }
        (mean, cov)
    }

    pub fn scale(&self, s: f64) -> Result<Self> {
        if s <= 0.0 || !s.is_finite() {
            return Err(Error::InvalidScale(s));
        }
        Ok(SampleCloud {
            dim: self.dim,
            points: self.points.iter().map(|p| p * s).collect(),
            seed: self.seed,
        })
    }

    pub fn translate(&self, shift: &[f64]) -> Self {
        let d = self.dim;
        let mut points = self.points.clone();
        for i in 0..self.len() {
            for a in 0..d {
                points[i * d + a] += shift[a];
            }
        }
        SampleCloud {
            dim: d,
            points,
            seed: self.seed,
        }
    }

    /// Empirical mean becomes exactly 0.
    pub fn center(&self) -> Self {
        let (mean, _) = self.moments();
        let shift: Vec<f64> = mean.iter().map(|m| -m).collect();
        self.translate(&shift)
    }

    /// Law of a·X + b·Y from independently shuffled pairings.
    pub fn lin_comb(&self, other: &Self, a: f64, b: f64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::InvalidPair(format!(
                "dimension mismatch {} vs {}",
                self.dim, other.dim
            )));
        }
        let n = self.len().min(other.len());
        let d = self.dim;
        let combo_seed = derive_seed(self.seed, other.seed ^ PAIRING_TAG);
        let mut rng = Rng::new(combo_seed);
        let mut idx_a: Vec<usize> = (0..self.len()).collect();
        let mut idx_b: Vec<usize> = (0..other.len()).collect();
        rng.shuffle(&mut idx_a);
        rng.shuffle(&mut idx_b);
        let mut points = Vec::with_capacity(n * d);
        for k in 0..n {
            let pa = self.point(idx_a[k]);
            let pb = other.point(idx_b[k]);
            for c in 0..d {
                points.push(a * pa[c] + b * pb[c]);
            }
        }
        SampleCloud::new(d, points, combo_seed)
    }

    /// Bootstrap resample of n points.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDensity("need n ≥ 2 samples".into()));
        }
        let mut rng = Rng::new(seed);
        let mut points = Vec::with_capacity(n * self.dim);
        for _ in 0..n {
            let i = rng.index(self.len());
            points.extend_from_slice(self.point(i));
        }
        SampleCloud::new(self.dim, points, seed)
    }
}

/// Stream label separating pairing shuffles from other derived seeds.
const PAIRING_TAG: u64 = 0x1357_9bdf_2468_ace0;

// ---- serde bridge ----

#[derive(Serialize, Deserialize)]
struct RawCloud {
    dim: usize,
    points: Vec<Vec<f64>>,
    seed: u64,
}

impl TryFrom<RawCloud> for SampleCloud {
    type Error = Error;
    fn try_from(raw: RawCloud) -> Result<Self> {
        if raw.points.iter().any(|p| p.len() != raw.dim) {
            return Err(Error::InvalidDensity(
                "every point must have `dim` coordinates".into(),
            ));
        }
        let flat = raw.points.into_iter().flatten().collect();
        SampleCloud::new(raw.dim, flat, raw.seed)
    }
}

impl From<SampleCloud> for RawCloud {
    fn from(c: SampleCloud) -> Self {
        RawCloud {
            dim: c.dim,
            points: (0..c.len()).map(|i| c.point(i).to_vec()).collect(),
            seed: c.seed,
        }
    }
}
