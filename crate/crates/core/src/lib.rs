//! deficitlab: numerical verification of entropy/Fisher-information
//! inequalities as signed deficits with quantified error.
//!
//! The crate computes the information functionals h, N, J, D, I, the
//! log-Sobolev deficit and the Stam defect over Gaussian mixtures, grid
//! densities and sample clouds; evaluates the EPI/FII family, transport
//! inequalities, CLT lower bounds, Ornstein–Uhlenbeck hypercontractivity and
//! two speculative Minkowski-sum inequalities; and orchestrates reproducible
//! experiment runs with CSV/JSON/SVG reports.

pub mod clt;
pub mod density;
pub mod error;
pub mod estimate;
pub mod fftconv;
pub mod functionals;
pub mod geometry;
pub mod hyper;
pub mod ineq;
pub mod linalg;
pub mod quad;
pub mod report;
pub mod rng;
pub mod runner;
pub mod scalar;
pub mod special;
pub mod transport;

pub use density::{standard_gaussian, Density, GaussianMixture, GridDensity, SampleCloud};
pub use error::{Error, Result};
pub use estimate::{Estimate, Method};
pub use functionals::{catalog, EvalCtx, FunctionalCatalog};
pub use report::{DeficitReport, Params, Verdict};
pub use scalar::Real;

/// Concrete scalar the density and inequality layers run at.
pub type F = f64;
