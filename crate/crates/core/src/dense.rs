//! Small dense helpers shared by the construction paths: guarded inverses,
//! norms and relative differences.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest and smallest singular value of `m`.
pub fn sigma_extremes<T: Scalar>(m: &DMatrix<T>) -> (f64, f64) {
    let s = T::singular_values(m).unwrap_or_else(|| m.clone().singular_values().as_slice().to_vec());
    let max = s.iter().copied().fold(0.0, f64::max);
    let min = s.iter().copied().fold(f64::INFINITY, f64::min);
    (max, min)
}

/// Default relative threshold for calling a `dim`-sized matrix singular.
pub fn default_singular_tol(dim: usize) -> f64 {
    dim.max(1) as f64 * f64::EPSILON
}

/// Inverse of a small (k x k) pivot matrix by LU with partial pivoting.
///
/// The matrix counts as singular when `sigma_min <= tol * sigma_max`.
pub fn pivot_inverse<T: Scalar>(m: &DMatrix<T>, which: &'static str, tol: f64) -> Result<DMatrix<T>> {
    if !m.is_square() {
        return Err(Error::dims(which, (m.nrows(), m.nrows()), m.shape()));
    }
    let (max, min) = sigma_extremes(m);
    if !(min > tol * max) {
        return Err(Error::PivotSingular { which });
    }
    m.clone().lu().try_inverse().ok_or(Error::PivotSingular { which })
}

/// Inverse of a square matrix by LU with partial pivoting, together with the
/// 1-norm condition number `||m||_1 ||m^-1||_1` read off the factors.
///
/// Returns `None` when a pivot vanishes or the reciprocal condition number
/// drops below `n * eps`.
pub fn lu_inverse<T: Scalar>(m: &DMatrix<T>) -> Option<(DMatrix<T>, f64)> {
    let inv = T::lu_inverse(m);
    if !inv.iter().all(|z| z.is_finite()) {
        return None;
    }
    let cond = norm1(m) * norm1(&inv);
    if !cond.is_finite() || 1.0 / cond < default_singular_tol(m.nrows()) {
        return None;
    }
    Some((inv, cond))
}

/// Maximum absolute column sum.
pub fn norm1<T: Scalar>(m: &DMatrix<T>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `||a - b||_F / ||b||_F`, falling back to the absolute difference when `b`
/// vanishes.
pub fn rel_diff<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> f64 {
    let diff = (a - b).norm();
    let scale = b.norm();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

pub fn identity<T: Scalar>(n: usize) -> DMatrix<T> {
    DMatrix::identity(n, n)
}

/// 2-norm condition number from the singular values.
pub fn cond2<T: Scalar>(m: &DMatrix<T>) -> f64 {
    let (max, min) = sigma_extremes(m);
    max / min
}
