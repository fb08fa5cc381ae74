//! Dense factorizations delegated to faer. Matrices stay in nalgebra storage
//! and are copied across at the boundary.

use faer::linalg::solvers::DenseSolveCore;
use faer::traits::ComplexField as FaerField;
use faer::Mat;
use nalgebra::{ComplexField, DMatrix, DVector};

fn to_faer<T: FaerField + nalgebra::Scalar + Copy>(m: &DMatrix<T>) -> Mat<T> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer<T: FaerField + nalgebra::Scalar + Copy>(m: faer::MatRef<'_, T>) -> DMatrix<T> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Full SVD `m = U diag(s) V*` with `s` sorted in nonincreasing order.
pub(crate) fn svd<T>(m: &DMatrix<T>) -> Option<(DMatrix<T>, DVector<f64>, DMatrix<T>)>
where
    T: FaerField + ComplexField<RealField = f64> + Copy,
{
    let svd = to_faer(m).svd().ok()?;
    let s = svd.S().column_vector();
    let s = DVector::from_fn(s.nrows(), |i, _| ComplexField::real(s[i]));
    Some((from_faer(svd.U()), s, from_faer(svd.V())))
}

pub(crate) fn singular_values<T>(m: &DMatrix<T>) -> Option<Vec<f64>>
where
    T: FaerField<Real = f64> + ComplexField<RealField = f64> + Copy,
{
    to_faer(m).singular_values().ok()
}

/// Inverse from LU with partial pivoting. A singular input yields
/// non-finite entries rather than an error.
pub(crate) fn lu_inverse<T>(m: &DMatrix<T>) -> DMatrix<T>
where
    T: FaerField + ComplexField<RealField = f64> + Copy,
{
    from_faer(to_faer(m).partial_piv_lu().inverse().as_ref())
}

pub(crate) fn matmul<T>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T>
where
    T: FaerField + ComplexField<RealField = f64> + Copy,
{
    let product = to_faer(a) * to_faer(b);
    from_faer(product.as_ref())
}
