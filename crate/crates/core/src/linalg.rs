//! Small dense linear-algebra helpers shared by the solution modules.

use nalgebra::{DMatrix, DVector};

/// Matrix exponential (scaling and squaring with Padé approximants).
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    a.exp()
}

pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Relative asymmetry `|A - Aᵀ|_max / max(1, |A|_max)`.
pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    let scale = a.amax().max(1.0);
    (a - a.transpose()).amax() / scale
}

pub fn norm_1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Reciprocal 1-norm condition number. Returns 0 for singular input.
pub fn rcond(a: &DMatrix<f64>) -> f64 {
    let na = norm_1(a);
    if na == 0.0 || !na.is_finite() {
        return 0.0;
    }
    match a.clone().try_inverse() {
        Some(inv) => {
            let ni = norm_1(&inv);
            if ni.is_finite() && ni > 0.0 {
                1.0 / (na * ni)
            } else {
                0.0
            }
        }
        None => 0.0,
    }
}

pub fn is_positive_definite(a: &DMatrix<f64>) -> bool {
    a.iter().all(|v| v.is_finite()) && symmetrize(a).cholesky().is_some()
}

/// Eigenvalues of the symmetric part, ascending.
pub fn sym_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = symmetrize(a).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

pub fn vec_from(values: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(values)
}

/// Row-major slice to an n×n matrix.
pub fn mat_from_row_major(n: usize, values: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, values)
}
