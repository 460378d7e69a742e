//! Scalar functional estimates with method tags and honest error fields.

use serde::{Deserialize, Serialize};

/// How a value was produced; closed forms carry zero error.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

/// A scalar functional value. `stderr` is a statistical standard error for
/// Monte Carlo and an absolute error bound for quadrature; closed forms have
/// stderr exactly 0. Infinite values carry `finite = false`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub method: Method,
    pub finite: bool,
}

/// Floor for numeric-method error fields, keeping the invariant
/// stderr = 0 ⟺ closed form.
const ERR_FLOOR: f64 = 1e-16;

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            stderr: 0.0,
            method: Method::ClosedForm,
            finite: value.is_finite(),
        }
    }

    pub fn quadrature(value: f64, err: f64) -> Self {
        Estimate {
            value,
            stderr: err.max(ERR_FLOOR),
            method: Method::Quadrature,
            finite: value.is_finite(),
        }
    }

    pub fn monte_carlo(value: f64, stderr: f64) -> Self {
        Estimate {
            value,
            stderr: stderr.max(ERR_FLOOR),
            method: Method::MonteCarlo,
            finite: value.is_finite(),
        }
    }

    pub fn infinite(method: Method) -> Self {
        Estimate {
            value: f64::INFINITY,
            stderr: 0.0,
            method,
            finite: false,
        }
    }

    /// Worse of the two method tags (closed form < quadrature < Monte Carlo).
    pub fn join_method(a: Method, b: Method) -> Method {
        use Method::*;
        match (a, b) {
            (MonteCarlo, _) | (_, MonteCarlo) => MonteCarlo,
            (Quadrature, _) | (_, Quadrature) => Quadrature,
            _ => ClosedForm,
        }
    }

    /// a·self + b·other with errors combined in quadrature.
    pub fn affine(&self, a: f64, other: &Estimate, b: f64) -> Estimate {
        let value = a * self.value + b * other.value;
        let stderr = ((a * self.stderr).powi(2) + (b * other.stderr).powi(2)).sqrt();
        let method = Self::join_method(self.method, other.method);
        if !value.is_finite() {
            let mut e = Estimate::infinite(method);
            e.value = value; // keeps −∞ distinguishable if it ever arises
            return e;
        }
        match method {
            Method::ClosedForm => Estimate::exact(value),
            Method::Quadrature => Estimate::quadrature(value, stderr),
            Method::MonteCarlo => Estimate::monte_carlo(value, stderr),
        }
    }

    pub fn scaled(&self, a: f64) -> Estimate {
        self.affine(a, &Estimate::exact(0.0), 0.0)
    }

    /// Apply a smooth map g with derivative dg (delta-method error).
    pub fn map<F: Fn(f64) -> f64, D: Fn(f64) -> f64>(&self, g: F, dg: D) -> Estimate {
        if !self.finite {
            return Estimate::infinite(self.method);
        }
        let value = g(self.value);
        let stderr = (dg(self.value)).abs() * self.stderr;
        match self.method {
            Method::ClosedForm => Estimate::exact(value),
            Method::Quadrature => Estimate::quadrature(value, stderr),
            Method::MonteCarlo => Estimate::monte_carlo(value, stderr),
        }
    }
}
