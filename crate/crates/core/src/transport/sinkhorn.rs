//! Debiased entropic optimal transport between uniform-weight point clouds.
//!
//! The estimator is the Sinkhorn divergence
//! S_ε(α, β) = OT_ε(α, β) − ½OT_ε(α, α) − ½OT_ε(β, β)
//! with the regularization schedule annealed from coarse to fine and the two
//! finest levels Richardson-extrapolated in ε² toward ε → 0. Raw entropic
//! cost is biased upward; debiasing plus extrapolation is what keeps the
//! Talagrand checks honest.
//!
//! For sorted 1-d supports the Gibbs kernel is banded around the transport
//! crest, which turns each iteration into a narrow-band matvec.
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

/// Kernel entries with exponent below −30 are ≈ 1e-13, far below the f32
/// resolution of the row sums they enter; dropping them is lossless at the
/// working precision.
const BAND_CUTOFF: f64 = 30.0;

/// Over-relaxation exponent for the scaling updates.
const OMEGA: f64 = 1.5;

/// Gibbs kernel exp(−C/ε), dense or banded.
enum Kernel {
    Dense {
        k: Vec<f32>,
        n: usize,
        m: usize,
    },
    Banded {
        offsets: Vec<usize>,
        widths: Vec<usize>,
        data: Vec<f32>,
        n: usize,
    },
}

impl Kernel {
    /// y[i] = Σ_j K_ij v[j]
    fn matvec(&self, v: &[f64], y: &mut [f64]) {
        match self {
            Kernel::Dense { k, n, m } => {
                for i in 0..*n {
                    let row = &k[i * m..(i + 1) * m];
                    let mut acc = 0.0f64;
                    for (kj, vj) in row.iter().zip(v) {
                        acc += *kj as f64 * vj;
                    }
                    y[i] = acc;
                }
            }
            Kernel::Banded {
                offsets,
                widths,
                data,
                n,
                ..
            } => {
                let mut pos = 0;
                for i in 0..*n {
                    let (o, w) = (offsets[i], widths[i]);
                    let row = &data[pos..pos + w];
                    let vs = &v[o..o + w];
                    let mut acc = 0.0f64;
                    for (kj, vj) in row.iter().zip(vs) {
                        acc += *kj as f64 * vj;
                    }
                    y[i] = acc;
                    pos += w;
                }
            }
        }
    }

    /// y[j] = Σ_i K_ij u[i]
    fn matvec_t(&self, u: &[f64], y: &mut [f64]) {
        match self {
            Kernel::Dense { k, n, m } => {
                y.fill(0.0);
                for i in 0..*n {
                    let row = &k[i * m..(i + 1) * m];
                    let ui = u[i];
                    for (yj, kj) in y.iter_mut().zip(row) {
                        *yj += *kj as f64 * ui;
                    }
                }
            }
            Kernel::Banded {
                offsets,
                widths,
                data,
                n,
                ..
            } => {
                y.fill(0.0);
                let mut pos = 0;
                for i in 0..*n {
                    let (o, w) = (offsets[i], widths[i]);
                    let ui = u[i];
                    for (yj, kj) in y[o..o + w].iter_mut().zip(&data[pos..pos + w]) {
                        *yj += *kj as f64 * ui;
                    }
                    pos += w;
                }
            }
        }
    }
}

/// exp(x) for x ≤ 0 at f32 output precision (~2e-5 relative), branch-light
/// so kernel-build loops vectorize. Crest shifting keeps inputs in range.
#[inline]
fn exp_neg_f32(x: f64) -> f32 {
    if x < -87.0 {
        return 0.0;
    }
    let y = x * std::f64::consts::LOG2_E;
    let k = y.floor();
    let f = y - k;
    // truncated Taylor for 2^f on [0, 1): coefficients (ln 2)^k / k!
    const C1: f64 = std::f64::consts::LN_2;
    const C2: f64 = 0.240_226_506_959_100_7;
    const C3: f64 = 0.055_504_108_664_821_58;
    const C4: f64 = 0.009_618_129_107_628_477;
    const C5: f64 = 0.001_333_355_814_642_844;
    const C6: f64 = 0.000_154_035_303_933_816;
    let p = 1.0 + f * (C1 + f * (C2 + f * (C3 + f * (C4 + f * (C5 + f * C6)))));
    let scale = f32::from_bits(((k as i32 + 127) as u32) << 23) as f64;
    (scale * p) as f32
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn point(mat: &[f64], dim: usize, i: usize) -> &[f64] {
    &mat[i * dim..(i + 1) * dim]
}

/// Kernel with warm-start potentials folded in:
/// K_ij = exp((f_i + g_j − C_ij)/ε).
///
/// Every row's crest is absorbed into `f` first (a crest-shifted warm start
/// solves the identical problem), so each row's largest entry is exactly 1:
/// the band expansion becomes offset-free and the f32 entries cannot
/// over- or underflow.
fn build_kernel(
    xa: &[f64],
    xb: &[f64],
    dim: usize,
    eps: f64,
    f: &mut [f64],
    g: &[f64],
    sorted_1d: bool,
) -> Kernel {
    let n = xa.len() / dim;
    let m = xb.len() / dim;
    if dim == 1 && sorted_1d {
        // significant entries form an interval around the matching diagonal
        // for sorted supports; hill-climb to the row crest, then expand
        // outward until entries stop mattering. A mis-banded row is caught by
        // the dense retry.
        let exponent = |i: usize, j: usize, fi: f64| -> f64 {
            let d = xa[i] - xb[j];
            (fi + g[j] - d * d) / eps
        };
        let mut offsets = Vec::with_capacity(n);
        let mut widths = Vec::with_capacity(n);
        let mut data = Vec::new();
        #[allow(clippy::needless_range_loop)]
        for i in 0..n {
            let fi = f[i];
            let mut crest = (i * m / n).min(m - 1);
            let mut e_crest = exponent(i, crest, fi);
            loop {
                let left = crest
                    .checked_sub(1)
                    .map(|j| exponent(i, j, fi))
                    .unwrap_or(f64::NEG_INFINITY);
                let right = if crest + 1 < m {
                    exponent(i, crest + 1, fi)
                } else {
                    f64::NEG_INFINITY
                };
                if left > e_crest && left >= right {
                    crest -= 1;
                    e_crest = left;
                } else if right > e_crest {
                    crest += 1;
                    e_crest = right;
                } else {
                    break;
                }
            }
            // absorb the crest into the warm start
            f[i] = fi - eps * e_crest;
            let floor = -BAND_CUTOFF;
            let mut lo = crest;
            while lo > 0 && exponent(i, lo - 1, fi) - e_crest > floor {
                lo -= 1;
            }
            let mut hi = crest + 1;
            while hi < m && exponent(i, hi, fi) - e_crest > floor {
                hi += 1;
            }
            offsets.push(lo);
            widths.push(hi - lo);
            for j in lo..hi {
                data.push(exp_neg_f32(exponent(i, j, fi) - e_crest));
            }
        }
        Kernel::Banded {
            offsets,
            widths,
            data,
            n,
        }
    } else {
        let mut k = vec![0.0f32; n * m];
        let mut exps = vec![0.0f64; m];
        for i in 0..n {
            let pi = point(xa, dim, i);
            let mut crest = f64::NEG_INFINITY;
            for j in 0..m {
                let c = sq_dist(pi, point(xb, dim, j));
                let e = (f[i] + g[j] - c) / eps;
                exps[j] = e;
                if e > crest {
                    crest = e;
                }
            }
            f[i] -= eps * crest;
            for j in 0..m {
                k[i * m + j] = exp_neg_f32(exps[j] - crest);
            }
        }
        Kernel::Dense { k, n, m }
    }
}

/// Median squared distance over a deterministic subsample, the scale for the
/// regularization schedule.
pub fn median_sq_dist(xa: &[f64], xb: &[f64], dim: usize) -> f64 {
    let n = xa.len() / dim;
    let m = xb.len() / dim;
    let take = 128usize;
    let step_a = (n / take).max(1);
    let step_b = (m / take).max(1);
    let mut ds: Vec<f64> = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = 0;
        while j < m {
            ds.push(sq_dist(point(xa, dim, i), point(xb, dim, j)));
            j += step_b;
        }
        i += step_a;
    }
    ds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ds[ds.len() / 2].max(1e-12)
}

struct SolveOutcome {
    /// ⟨f, a⟩ + ⟨g, b⟩, i.e. the dual value of the KL-regularized problem up
    /// to the uniform-weight constant that cancels in the divergence.
    dual: f64,
    f: Vec<f64>,
    g: Vec<f64>,
}

/// Sinkhorn iterations at a fixed ε with warm-start potentials.
#[allow(clippy::too_many_arguments)]
fn solve_robust(
    xa: &[f64],
    xb: &[f64],
    dim: usize,
    eps: f64,
    f0: Vec<f64>,
    g0: Vec<f64>,
    max_iters: usize,
    tol: f64,
    symmetric: bool,
    sorted_1d: bool,
) -> Result<SolveOutcome> {
    match solve(
        xa, xb, dim, eps, f0.clone(), g0.clone(), max_iters, tol, symmetric, sorted_1d, OMEGA,
    ) {
        Ok(out) => Ok(out),
        // banding or over-relaxation can misfire on unusual warm starts;
        // retry once with the dense kernel and plain updates
        Err(Error::EstimatorFailed(_)) => solve(
            xa, xb, dim, eps, f0, g0, max_iters, tol, symmetric, false, 1.0,
        ),
        Err(e) => Err(e),
    }
}

#[allow(clippy::too_many_arguments)]
fn solve(
    xa: &[f64],
    xb: &[f64],
    dim: usize,
    eps: f64,
    f0: Vec<f64>,
    g0: Vec<f64>,
    max_iters: usize,
    tol: f64,
    symmetric: bool,
    sorted_1d: bool,
    relax: f64,
) -> Result<SolveOutcome> {
    let n = xa.len() / dim;
    let m = xb.len() / dim;
    let a = 1.0 / n as f64;
    let b = 1.0 / m as f64;

    let mut f = f0;
    let mut g = g0;
    let kernel = build_kernel(xa, xb, dim, eps, &mut f, &g, sorted_1d);

    let mut u = vec![1.0f64; n];
    let mut v = vec![1.0f64; m];
    let mut kv = vec![0.0f64; n];
    let mut ktu = vec![0.0f64; m];

    // Marginal L1 gate for the dual-stabilization stop: at the optimum the
    // dual is stationary in the potentials, so once the marginals are merely
    // decent, a stalled dual indicates second-order convergence of the value.
    const MARGINAL_GATE: f64 = 1e-3;
    let mut last_dual = f64::INFINITY;

    let mut converged = false;
    let mut iters_done = 0usize;
    for _it in 0..max_iters {
        iters_done = _it;
        // the Kv needed for the u-update doubles as a free marginal check
        kernel.matvec(&v, &mut kv);
        let err: f64 = (0..n).map(|i| (u[i] * kv[i] - a).abs()).sum();
        if err < tol {
            converged = true;
            break;
        }
        if err < MARGINAL_GATE {
            let dual_now = (0..n).map(|i| f[i] + eps * u[i].ln()).sum::<f64>() * a
                + (0..m).map(|j| g[j] + eps * v[j].ln()).sum::<f64>() * b;
            if (dual_now - last_dual).abs() < 1e-9 * (1.0 + dual_now.abs()) {
                converged = true;
                break;
            }
            last_dual = dual_now;
        }
        if symmetric {
            // self-transport fixed point: geometric half-steps stay stable
            for i in 0..n {
                if kv[i] <= 0.0 || !kv[i].is_finite() {
                    return Err(Error::EstimatorFailed(
                        "sinkhorn kernel column vanished".into(),
                    ));
                }
                u[i] = (u[i] * a / kv[i]).sqrt();
            }
            v.copy_from_slice(&u);
        } else {
            // over-relaxed scaling updates
            for i in 0..n {
                if kv[i] <= 0.0 || !kv[i].is_finite() {
                    return Err(Error::EstimatorFailed(
                        "sinkhorn kernel column vanished".into(),
                    ));
                }
                let plain = a / kv[i];
                let relaxed = u[i] * (plain / u[i]).powf(relax);
                u[i] = if relaxed.is_finite() && relaxed > 0.0 {
                    relaxed
                } else {
                    plain
                };
            }
            kernel.matvec_t(&u, &mut ktu);
            for j in 0..m {
                if ktu[j] <= 0.0 || !ktu[j].is_finite() {
                    return Err(Error::EstimatorFailed(
                        "sinkhorn kernel row vanished".into(),
                    ));
                }
                let plain = b / ktu[j];
                let relaxed = v[j] * (plain / v[j]).powf(relax);
                v[j] = if relaxed.is_finite() && relaxed > 0.0 {
                    relaxed
                } else {
                    plain
                };
            }
        }
        let umax = u.iter().cloned().fold(0.0f64, f64::max);
        if umax > 1e30 || umax.is_infinite() {
            return Err(Error::EstimatorFailed(
                "sinkhorn potentials diverged (regularization too small)".into(),
            ));
        }
    }
    if !converged {
        return Err(Error::EstimatorFailed(format!(
            "sinkhorn did not reach tol {tol:.1e} in {max_iters} iterations"
        )));
    }
    if std::env::var("DEFICITLAB_SINKHORN_TRACE").is_ok() {
        eprintln!(
            "sinkhorn eps={eps:.4} sym={symmetric} iters={iters_done} band={}",
            match &kernel { Kernel::Banded { data, .. } => data.len(), Kernel::Dense { k, .. } => k.len() }
        );
    }

    for i in 0..n {
        f[i] += eps * u[i].ln();
    }
    for j in 0..m {
        g[j] += eps * v[j].ln();
    }
    let dual = f.iter().sum::<f64>() * a + g.iter().sum::<f64>() * b;
    Ok(SolveOutcome { dual, f, g })
}

/// Solver settings; defaults follow the production schedule.
#[derive(Clone, Debug)]
pub struct SinkhornSettings {
    pub eps_factors: Vec<f64>,
    pub max_iters: usize,
    pub tol: f64,
    /// Skip the banded 1-d fast path (two-path checks and debugging).
    pub force_dense: bool,
}

impl Default for SinkhornSettings {
    fn default() -> Self {
        SinkhornSettings {
            eps_factors: vec![0.5, 0.2, 0.1, 0.05],
            max_iters: 1500,
            tol: 1e-6,
            force_dense: false,
        }
    }
}

/// Exact Kantorovich duals of the unregularized 1-d problem (sorted equal-
/// weight supports couple monotonically): the recursion keeps complementary
/// slackness along the matched chain, so these are optimal and make an
/// excellent warm start at every ε.
fn monotone_duals_1d(xa: &[f64], xb: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = xa.len();
    let c = |x: f64, y: f64| (x - y) * (x - y);
    let mut g = vec![0.0; n];
    for j in 1..n {
        g[j] = g[j - 1] + c(xa[j], xb[j]) - c(xa[j], xb[j - 1]);
    }
    let f: Vec<f64> = (0..n).map(|i| c(xa[i], xb[i]) - g[i]).collect();
    (f, g)
}

/// Debiased, ε-extrapolated W₂² estimate between two uniform clouds.
pub fn sinkhorn_w2_sq(
    xa: &[f64],
    xb: &[f64],
    dim: usize,
    settings: &SinkhornSettings,
) -> Result<f64> {
    if xa == xb {
        // S_ε(α, α) = 0 by construction of the debiased divergence
        return Ok(0.0);
    }
    let (xa, xb, sorted) = if dim == 1 && !settings.force_dense {
        let mut a = xa.to_vec();
        let mut b = xb.to_vec();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        (a, b, true)
    } else {
        (xa.to_vec(), xb.to_vec(), false)
    };
    let n = xa.len() / dim;
    let m = xb.len() / dim;
    let med2 = median_sq_dist(&xa, &xb, dim);

    let exact_duals = sorted && n == m;
    let (mut f_ab, mut g_ab) = if exact_duals {
        monotone_duals_1d(&xa, &xb)
    } else {
        (vec![0.0; n], vec![0.0; m])
    };
    let mut f_aa = vec![0.0; n];
    let mut f_bb = vec![0.0; m];

    // Only the two finest levels enter the extrapolation; the coarser rungs
    // exist to anneal the potentials toward them, and with exact warm-start
    // duals in hand the annealing rungs change nothing but iteration counts.
    let k = settings.eps_factors.len();
    let record_from = k.saturating_sub(2);
    let chain_from = if exact_duals { record_from } else { 0 };

    let mut divergences: Vec<(f64, f64)> = Vec::new(); // (eps, S_eps)
    for (idx, &factor) in settings.eps_factors.iter().enumerate() {
        if idx < chain_from {
            continue;
        }
        let eps = factor * med2;
        let ab = solve_robust(
            &xa,
            &xb,
            dim,
            eps,
            f_ab,
            g_ab,
            settings.max_iters,
            settings.tol,
            false,
            sorted,
        )?;
        f_ab = ab.f;
        g_ab = ab.g;
        if idx < record_from {
            continue;
        }
        let aa = solve_robust(
            &xa,
            &xa,
            dim,
            eps,
            f_aa.clone(),
            f_aa,
            settings.max_iters,
            settings.tol,
            true,
            sorted,
        )?;
        f_aa = aa.f;
        let bb = solve_robust(
            &xb,
            &xb,
            dim,
            eps,
            f_bb.clone(),
            f_bb,
            settings.max_iters,
            settings.tol,
            true,
            sorted,
        )?;
        f_bb = bb.f;
        if std::env::var("DEFICITLAB_SINKHORN_TRACE").is_ok() {
            eprintln!(
                "S({eps:.4}) = {} (ab {} aa {} bb {})",
                ab.dual - 0.5 * aa.dual - 0.5 * bb.dual,
                ab.dual,
                aa.dual,
                bb.dual
            );
        }
        divergences.push((eps, ab.dual - 0.5 * aa.dual - 0.5 * bb.dual));
    }

    // Richardson in ε² from the two finest levels
    let k = divergences.len();
    let value = if k >= 2 {
        let (e1, s1) = divergences[k - 2];
        let (e2, s2) = divergences[k - 1];
        s2 + (s2 - s1) * e2 * e2 / (e1 * e1 - e2 * e2)
    } else {
        divergences[0].1
    };
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::standard_gaussian;

    #[test]
    fn identical_clouds_have_zero_divergence() {
        let g = standard_gaussian(1).unwrap();
        let cloud = g.sample(512, 11).unwrap();
        let v = sinkhorn_w2_sq(
            cloud.flat(),
            cloud.flat(),
            1,
            &SinkhornSettings::default(),
        )
        .unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn independent_clouds_of_same_law_are_close() {
        let g = standard_gaussian(1).unwrap();
        let a = g.sample(1024, 21).unwrap();
        let b = g.sample(1024, 22).unwrap();
        let v = sinkhorn_w2_sq(a.flat(), b.flat(), 1, &SinkhornSettings::default()).unwrap();
        // sampling noise scale for n = 1024 is a few × 1e-2
        assert!(v.abs() < 0.05, "divergence {v}");
    }

    #[test]
    fn shifted_cloud_distance() {
        // W2²(δ-shifted cloud, same cloud) ≈ shift²
        let g = standard_gaussian(1).unwrap();
        let cloud = g.sample(1024, 13).unwrap();
        let shifted: Vec<f64> = cloud.flat().iter().map(|x| x + 2.0).collect();
        let v = sinkhorn_w2_sq(
            cloud.flat(),
            &shifted,
            1,
            &SinkhornSettings::default(),
        )
        .unwrap();
        assert!((v - 4.0).abs() < 0.1, "got {v}, want ≈ 4");
    }
}
