//! Small dense symmetric-matrix helpers on top of nalgebra, used by the
//! Gaussian closed forms (d ≤ 3 in practice, but nothing here assumes it).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative symmetry check with absolute floor.
pub fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    let scale = m.amax().max(1.0);
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            if (m[(i, j)] - m[(j, i)]).abs() > tol * scale {
                return false;
            }
        }
    }
    true
}

/// Validated SPD factorization: returns the lower Cholesky factor, rejecting
/// asymmetric or near-singular input (pivot tolerance 1e-12).
pub fn spd_cholesky(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidDensity("covariance must be square".into()));
    }
    if !is_symmetric(m, 1e-12) {
        return Err(Error::InvalidDensity("covariance must be symmetric".into()));
    }
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidDensity("covariance not positive definite".into()))?;
    let l = chol.l();
    let scale = m.diagonal().amax().max(1.0);
    for i in 0..l.nrows() {
        let pivot = l[(i, i)] * l[(i, i)];
        if pivot <= 1e-12 * scale {
            return Err(Error::InvalidDensity(format!(
                "covariance near-singular: pivot {pivot:.3e}"
            )));
        }
    }
    Ok(l)
}

/// Symmetric positive-definite square root via eigendecomposition.
pub fn sym_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = m.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::InvalidDensity(
            "matrix square root requires positive eigenvalues".into(),
        ));
    }
    let sqrt_vals = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| l.sqrt()),
    );
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&sqrt_vals) * v.transpose())
}

/// log det of an SPD matrix from its Cholesky factor.
pub fn log_det_from_chol(l: &DMatrix<f64>) -> f64 {
    (0..l.nrows()).map(|i| 2.0 * l[(i, i)].ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sqrt_squares_back() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let s = sym_sqrt(&m).unwrap();
        let sq = &s * &s;
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(sq[(i, j)], m[(i, j)], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn rejects_near_singular() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0 + 1e-14]);
        assert!(spd_cholesky(&m).is_err());
    }

    #[test]
    fn logdet_matches_determinant() {
        let m = DMatrix::from_row_slice(2, 2, &[3.0, 0.7, 0.7, 2.0]);
        let l = spd_cholesky(&m).unwrap();
        assert_abs_diff_eq!(
            log_det_from_chol(&l),
            m.determinant().ln(),
            epsilon = 1e-12
        );
    }
}
