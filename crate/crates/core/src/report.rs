//! Deficit reports: one inequality instance, oriented so the predicted-true
//! direction is deficit ≥ 0.

use serde::{Deserialize, Serialize};

use crate::estimate::Estimate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    HoldsWithinError,
    Violated,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Holds => "holds",
            Verdict::HoldsWithinError => "holds_within_error",
            Verdict::Violated => "violated",
        };
        f.write_str(s)
    }
}

/// Inequality parameters, where applicable.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
}

impl Params {
    pub fn theta(theta: f64) -> Self {
        Params {
            theta: Some(theta),
            ..Default::default()
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn with_t(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }
}

/// One checked inequality: deficit = rhs − lhs, predicted ≥ 0.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeficitReport {
    pub name: String,
    pub lhs: Estimate,
    pub rhs: Estimate,
    pub deficit: f64,
    pub err: f64,
    pub verdict: Verdict,
    pub params: Params,
}

impl DeficitReport {
    pub fn new(name: impl Into<String>, lhs: Estimate, rhs: Estimate, params: Params) -> Self {
        let deficit = if rhs.value.is_infinite() && rhs.value > 0.0 {
            f64::INFINITY
        } else {
            rhs.value - lhs.value
        };
        let err = (lhs.stderr.powi(2) + rhs.stderr.powi(2)).sqrt();
        let verdict = if deficit >= 0.0 {
            Verdict::Holds
        } else if deficit >= -3.0 * err {
            Verdict::HoldsWithinError
        } else {
            Verdict::Violated
        };
        DeficitReport {
            name: name.into(),
            lhs,
            rhs,
            deficit,
            err,
            verdict,
            params,
        }
    }

    /// Holds outright or within the 3-sigma error band.
    pub fn acceptable(&self) -> bool {
        self.verdict != Verdict::Violated
    }
}
