//! Quadrature kernels: adaptive Gauss–Kronrod in one dimension, tensor
//! Gauss–Legendre panels with a doubling check in two, and Gauss–Hermite
//! rules for integrals against the standard Gaussian measure.
#![allow(clippy::excessive_precision)]

use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

// 15-point Kronrod abscissae / weights and embedded 7-point Gauss weights.
const XGK15: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_33,
    0.949_107_912_342_758_524_526_189_684_047_85,
    0.864_864_423_359_769_072_789_712_788_640_93,
    0.741_531_185_599_394_439_863_864_773_280_79,
    0.586_087_235_467_691_130_294_144_838_258_73,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_24,
    0.0,
];
const WG7: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_08,
    0.279_705_391_489_276_667_901_467_771_423_78,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_33,
];
const WGK15: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_2,
    0.104_790_010_322_250_183_839_876_322_541_52,
    0.140_653_259_715_525_918_745_189_590_510_24,
    0.169_004_726_639_267_902_826_583_426_598_55,
    0.190_350_578_064_785_409_913_256_402_421_01,
    0.204_432_940_075_298_892_414_161_999_234_65,
    0.209_482_141_084_727_828_012_999_174_891_71,
];

/// Single G7-K15 panel: returns (kronrod value, error estimate).
pub fn gk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = (b - a) / T::of(2.0);
    let center = (a + b) / T::of(2.0);

    let fc = f(center);
    let mut kronrod = fc * T::of(WGK15[7]);
    let mut gauss = fc * T::of(WG7[3]);

    for j in 0..7 {
        let x = half * T::of(XGK15[j]);
        let f1 = f(center - x);
        let f2 = f(center + x);
        let fsum = f1 + f2;
        kronrod += T::of(WGK15[j]) * fsum;
        if j % 2 == 1 {
            gauss += T::of(WG7[j / 2]) * fsum;
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (value, err)
}

/// Adaptive 1-d integration of `f` over [a, b] to absolute tolerance `tol`.
///
/// Bisects the panel with the largest error estimate until the summed error
/// estimate drops below `tol`. Returns the value and the final error bound.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> Result<(T, T)> {
    const MAX_PANELS: usize = 4000;

    let (v, e) = gk15(&f, a, b);
    let mut panels = vec![(e, a, b, v)];
    let mut total_err = e;
    let mut total_val = v;

    while total_err > tol && panels.len() < MAX_PANELS {
        // pull the worst panel
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| (x.1).0.partial_cmp(&(y.1).0).unwrap())
            .unwrap();
        let (err, pa, pb, val) = panels.swap_remove(idx);
        let mid = (pa + pb) / T::of(2.0);
        if mid <= pa || mid >= pb {
            // interval exhausted at this precision; keep as-is
            panels.push((T::zero(), pa, pb, val));
            continue;
        }
        let (v1, e1) = gk15(&f, pa, mid);
        let (v2, e2) = gk15(&f, mid, pb);
        total_val = total_val - val + v1 + v2;
        total_err = total_err - err + e1 + e2;
        panels.push((e1, pa, mid, v1));
        panels.push((e2, mid, pb, v2));
    }

    if total_err.as_f64() > tol.as_f64() * 8.0 {
        return Err(Error::EstimatorFailed(format!(
            "adaptive quadrature stalled at error {:.3e} (tol {:.3e})",
            total_err.as_f64(),
            tol.as_f64()
        )));
    }
    Ok((total_val, total_err))
}

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(x) and P'_n(x) via the three-term recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static GL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    GL.get_or_init(|| gauss_legendre(16))
}

/// Tensor 2-d integration over [a0,b0]×[a1,b1] with panel doubling.
///
/// Evaluates on P×P panels of 16-point Gauss–Legendre per axis, doubles P
/// until two successive refinements agree within `tol`; the disagreement is
/// reported as the error bound.
pub fn integrate2d<F: Fn(f64, f64) -> f64>(
    f: F,
    lo: [f64; 2],
    hi: [f64; 2],
    tol: f64,
) -> Result<(f64, f64)> {
    let eval = |panels: usize| -> f64 {
        let (nodes, weights) = gl16();
        let mut total = 0.0;
        for px in 0..panels {
            let ax = lo[0] + (hi[0] - lo[0]) * px as f64 / panels as f64;
            let bx = lo[0] + (hi[0] - lo[0]) * (px + 1) as f64 / panels as f64;
            let cx = 0.5 * (ax + bx);
            let hx = 0.5 * (bx - ax);
            for py in 0..panels {
                let ay = lo[1] + (hi[1] - lo[1]) * py as f64 / panels as f64;
                let by = lo[1] + (hi[1] - lo[1]) * (py + 1) as f64 / panels as f64;
                let cy = 0.5 * (ay + by);
                let hy = 0.5 * (by - ay);
                let mut s = 0.0;
                for (i, &xi) in nodes.iter().enumerate() {
                    let x = cx + hx * xi;
                    let mut row = 0.0;
                    for (j, &yj) in nodes.iter().enumerate() {
                        row += weights[j] * f(x, cy + hy * yj);
                    }
                    s += weights[i] * row;
                }
                total += s * hx * hy;
            }
        }
        total
    };

    let mut panels = 4;
    let mut prev = eval(panels);
    while panels <= 16 {
        panels *= 2;
        let cur = eval(panels);
        let err = (cur - prev).abs();
        if err < tol {
            return Ok((cur, err.max(1e-16)));
        }
        prev = cur;
    }
    Err(Error::EstimatorFailed(format!(
        "2-d tensor quadrature did not reach tolerance {tol:.3e}"
    )))
}

/// Gauss–Hermite rule adapted to the standard Gaussian weight:
/// ∫ f dγ ≈ Σ w_i f(x_i) with Σ w_i = 1.
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Golub–Welsch on the Hermite Jacobi matrix (physicists' weight e^{-x²}),
    /// then rescaled so nodes/weights integrate against dγ = φ(x)dx.
    pub fn new(n: usize) -> Self {
        let mut jacobi = DMatrix::<f64>::zeros(n, n);
        for k in 1..n {
            let b = (k as f64 / 2.0).sqrt();
            jacobi[(k - 1, k)] = b;
            jacobi[(k, k - 1)] = b;
        }
        let eig = jacobi.symmetric_eigen();
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let v0 = eig.eigenvectors[(0, i)];
                (eig.eigenvalues[i], v0 * v0)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        // physicists' nodes t, weights √π v0²; substitute x = √2 t, and the
        // √π cancels: weights sum to 1 exactly.
        let nodes = pairs
            .iter()
            .map(|p| p.0 * std::f64::consts::SQRT_2)
            .collect();
        let weights = pairs.iter().map(|p| p.1).collect();
        GaussHermite { nodes, weights }
    }

    /// ∫ f dγ.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Shared 128-point rule (the default order for semigroup integrals).
pub fn gauss_hermite_128() -> &'static GaussHermite {
    static GH: OnceLock<GaussHermite> = OnceLock::new();
    GH.get_or_init(|| GaussHermite::new(128))
}

/// Concrete f64 alias for the adaptive integrator, matching the crate-root
/// scalar aliases.
pub fn integrate_f64<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    integrate(f, a, b, tol)
}
