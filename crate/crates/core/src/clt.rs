//! Normalized sums U_n = n^{-1/2} Σ Z_k and the short-term CLT bounds:
//! the entropic and Fisher-information lower bounds driven by δ_LSI(Z), the
//! θ = ½ doubling monotonicity, and subadditivity of δ_LSI(U_n).

use std::collections::HashMap;

use crate::density::Density;
use crate::error::{Error, Result};
use crate::estimate::{Estimate, Method};
use crate::functionals::{lsi_deficit, rel_entropy, rel_fisher, EvalCtx};
use crate::report::{DeficitReport, Params};

/// Grid fallback resolution when the exact mixture path exceeds its budget.
const GRID_POINTS: usize = 1 << 14;

/// Law of n^{-1/2}(Z_1 + … + Z_n) for centered Z, built by halving:
/// U_{a+b} = √(a/(a+b))·U_a + √(b/(a+b))·U_b.
pub fn normalized_sum(z: &Density, n: usize) -> Result<Density> {
    if n == 0 {
        return Err(Error::PreconditionViolated("n must be ≥ 1".into()));
    }
    let (mean, _) = z.moments()?;
    if mean.norm() > 1e-8 {
        return Err(Error::PreconditionViolated(format!(
            "Z must be centered (|mean| = {:.3e})",
            mean.norm()
        )));
    }
    let mut memo: HashMap<usize, Density> = HashMap::new();
    match build(z, n, &mut memo) {
        Err(Error::BudgetExceeded { .. }) => {
            if z.dim() > 1 {
                return Err(Error::UnsupportedEstimator(
                    "exact path over budget and grids are 1-d here; discretize or reduce n".into(),
                ));
            }
            // switch to the FFT grid path: O(log n) convolutions on 2^14 nodes
            let halfwidth = grid_halfwidth(z)?;
            let zg = z.discretize(halfwidth, GRID_POINTS)?;
            let mut memo = HashMap::new();
            build(&zg, n, &mut memo)
        }
        other => other,
    }
}

fn grid_halfwidth(z: &Density) -> Result<f64> {
    match z {
        Density::Mixture(m) => {
            let (mean, _) = m.moments();
            let mut hw = 0.0f64;
            for c in m.components() {
                hw = hw.max((c.mean[0] - mean[0]).abs() + 12.0 * c.cov[(0, 0)].sqrt());
            }
            Ok(hw)
        }
        _ => {
            let m2 = z.second_moment()?;
            Ok(12.0 * m2.sqrt().max(1.0))
        }
    }
}

fn build(z: &Density, n: usize, memo: &mut HashMap<usize, Density>) -> Result<Density> {
    if n == 1 {
        return Ok(z.clone());
    }
    if let Some(d) = memo.get(&n) {
        return Ok(d.clone());
    }
    let a = n / 2;
    let b = n - a;
    let ua = build(z, a, memo)?;
    let ub = build(z, b, memo)?;
    let un = ua.convolve(&ub, a as f64 / n as f64)?;
    memo.insert(n, un.clone());
    Ok(un)
}

/// Per-n record of the trace.
#[derive(Clone, Debug)]
pub struct CltRow {
    pub n: usize,
    pub rel_entropy: Estimate,
    pub rel_fisher: Estimate,
    pub lsi_deficit: Estimate,
    pub method: Method,
    /// D(U_n) ≥ D(Z) − (n−1)·δ_LSI(Z)
    pub ent_clt: DeficitReport,
    /// ½I(U_n) ≥ ½I(Z) − n·δ_LSI(Z) + δ_LSI(U_n)
    pub fi_clt: DeficitReport,
    /// D(U_{2n}) ≤ D(U_n), when 2n is inside the trace
    pub doubling: Option<DeficitReport>,
}

#[derive(Clone, Debug)]
pub struct CltTrace {
    pub base: Density,
    pub rows: Vec<CltRow>,
}

pub fn clt_trace(z: &Density, n_max: usize, ctx: &EvalCtx) -> Result<CltTrace> {
    let d_z = rel_entropy(z, ctx)?;
    let i_z = rel_fisher(z, ctx)?;
    let delta_z = lsi_deficit(z, ctx)?;
    if !delta_z.finite {
        return Err(Error::PreconditionViolated(
            "δ_LSI(Z) must be finite for the bounds to be informative".into(),
        ));
    }

    let mut laws = Vec::with_capacity(n_max);
    let mut memo = HashMap::new();
    let needs_grid = {
        // probe the largest n once so the whole trace shares one carrier
        match build(z, n_max, &mut memo) {
            Ok(_) => false,
            Err(Error::BudgetExceeded { .. }) => true,
            Err(e) => return Err(e),
        }
    };
    let base = if needs_grid {
        if z.dim() > 1 {
            return Err(Error::UnsupportedEstimator(
                "exact path over budget and grids are 1-d here".into(),
            ));
        }
        memo.clear();
        z.discretize(grid_halfwidth(z)?, GRID_POINTS)?
    } else {
        z.clone()
    };
    for n in 1..=n_max {
        laws.push(build(&base, n, &mut memo)?);
    }

    let mut per_n: Vec<(Estimate, Estimate, Estimate)> = Vec::with_capacity(n_max);
    for law in &laws {
        let d = rel_entropy(law, ctx)?;
        let i = rel_fisher(law, ctx)?;
        let delta = lsi_deficit(law, ctx)?;
        per_n.push((d, i, delta));
    }

    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let (d_n, i_n, delta_n) = per_n[n - 1];
        let ent_bound = d_z.affine(1.0, &delta_z, -((n - 1) as f64));
        let ent_clt = DeficitReport::new("ent_clt", ent_bound, d_n, Params::default());
        let fi_bound = i_z
            .affine(0.5, &delta_z, -(n as f64))
            .affine(1.0, &delta_n, 1.0);
        let fi_clt = DeficitReport::new("fi_clt", fi_bound, i_n.scaled(0.5), Params::default());
        let doubling = if 2 * n <= n_max {
            let (d_2n, _, _) = per_n[2 * n - 1];
            Some(DeficitReport::new("doubling", d_2n, d_n, Params::default()))
        } else {
            None
        };
        rows.push(CltRow {
            n,
            rel_entropy: d_n,
            rel_fisher: i_n,
            lsi_deficit: delta_n,
            method: d_n.method,
            ent_clt,
            fi_clt,
            doubling,
        });
    }
    Ok(CltTrace {
        base: z.clone(),
        rows,
    })
}

/// Subadditivity: δ_LSI(U_{m+n}) ≤ δ_LSI(U_m) + δ_LSI(U_n).
pub fn subadditivity_check(
    z: &Density,
    pairs: &[(usize, usize)],
    ctx: &EvalCtx,
) -> Result<Vec<DeficitReport>> {
    let mut memo = HashMap::new();
    let mut out = Vec::with_capacity(pairs.len());
    for &(m, n) in pairs {
        if m == 0 || n == 0 {
            return Err(Error::PreconditionViolated("pair entries must be ≥ 1".into()));
        }
        let um = build(z, m, &mut memo)?;
        let un = build(z, n, &mut memo)?;
        let umn = build(z, m + n, &mut memo)?;
        let lhs = lsi_deficit(&umn, ctx)?;
        let rhs = lsi_deficit(&um, ctx)?.affine(1.0, &lsi_deficit(&un, ctx)?, 1.0);
        out.push(DeficitReport::new(
            format!("subadditivity_{m}_{n}"),
            lhs,
            rhs,
            Params::default(),
        ));
    }
    Ok(out)
}
