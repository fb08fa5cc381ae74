//! SVD-free construction of the structured inverse.
//!
//! For any `u`, `v` (n x k) with `u* e` and `f* v` invertible and any
//! invertible k x k `M`,
//!
//! ```text
//! P_e = I - e (u* e)^-1 u*
//! P_f = I - v (f* v)^-1 f*
//! G   = (P_e A P_f + e M f*)^-1 - v (f* v)^-1 M^-1 (u* e)^-1 u*
//! x   = (I - G A) v (f* v)^-1
//! y*  = (u* e)^-1 u* (I - A G)
//! ```
//!
//! and the result does not depend on the choice of `u`, `v`, `M`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::dense::{default_singular_tol, lu_inverse, pivot_inverse};
use crate::error::{Error, Result};
use crate::problem::{RankModifiedProblem, StructuredInverse};
use crate::scalar::{adjoint_mul, mul, mul_adjoint, Scalar};

/// Free parameters `(u, v, M)` of the direct construction, with the derived
/// `N = (f* v)^-1 M^-1 (u* e)^-1` kept for inspection.
#[derive(Debug, Clone)]
pub struct AnsatzParams<T: Scalar> {
    u: DMatrix<T>,
    v: DMatrix<T>,
    m: DMatrix<T>,
    n_mat: DMatrix<T>,
    ue_inv: DMatrix<T>,
    fv_inv: DMatrix<T>,
    m_inv: DMatrix<T>,
}

impl<T: Scalar> AnsatzParams<T> {
    /// Checks that `u* e`, `f* v` and `M` are invertible for this problem.
    pub fn new(problem: &RankModifiedProblem<T>, u: DMatrix<T>, v: DMatrix<T>, m: DMatrix<T>) -> Result<Self> {
        let (n, k) = (problem.n(), problem.k());
        if u.shape() != (n, k) {
            return Err(Error::dims("u", (n, k), u.shape()));
        }
        if v.shape() != (n, k) {
            return Err(Error::dims("v", (n, k), v.shape()));
        }
        if m.shape() != (k, k) {
            return Err(Error::dims("M", (k, k), m.shape()));
        }
        let tol = default_singular_tol(k);
        let ue_inv = pivot_inverse(&adjoint_mul(&u, problem.e()), "u*e", tol)?;
        let fv_inv = pivot_inverse(&adjoint_mul(problem.f(), &v), "f*v", tol)?;
        let m_inv = pivot_inverse(&m, "M", tol)?;
        let n_mat = mul(&mul(&fv_inv, &m_inv), &ue_inv);
        Ok(Self {
            u,
            v,
            m,
            n_mat,
            ue_inv,
            fv_inv,
            m_inv,
        })
    }

    /// `u = e`, `v = f`, `M = I`.
    pub fn simplest(problem: &RankModifiedProblem<T>) -> Result<Self> {
        let k = problem.k();
        Self::new(
            problem,
            problem.e().clone(),
            problem.f().clone(),
            DMatrix::identity(k, k),
        )
    }

    pub fn u(&self) -> &DMatrix<T> {
        &self.u
    }

    pub fn v(&self) -> &DMatrix<T> {
        &self.v
    }

    pub fn m(&self) -> &DMatrix<T> {
        &self.m
    }

    /// `N = (f* v)^-1 M^-1 (u* e)^-1`.
    pub fn n_matrix(&self) -> &DMatrix<T> {
        &self.n_mat
    }
}

/// Conditioning of the n x n matrix inverted by the direct construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InnerDiagnostics {
    /// 1-norm condition number, from the LU-based inverse.
    pub inner_condition: f64,
}

pub fn structured_inverse_general<T: Scalar>(
    problem: &RankModifiedProblem<T>,
    params: &AnsatzParams<T>,
) -> Result<StructuredInverse<T>> {
    structured_inverse_general_with_diagnostics(problem, params).map(|(inv, _)| inv)
}

pub fn structured_inverse_general_with_diagnostics<T: Scalar>(
    problem: &RankModifiedProblem<T>,
    params: &AnsatzParams<T>,
) -> Result<(StructuredInverse<T>, InnerDiagnostics)> {
    let (a, e, f) = (problem.a(), problem.e(), problem.f());
    let AnsatzParams {
        u,
        v,
        m,
        ue_inv,
        fv_inv,
        m_inv,
        ..
    } = params;

    // w = v (f* v)^-1 and z* = (u* e)^-1 u*, so P_f = I - w f*, P_e = I - e z*.
    let w = mul(v, fv_inv);
    let z_adj = mul(ue_inv, &u.adjoint());

    // A P_f = A - (A w) f*
    let a_pf = a - mul_adjoint(&mul(a, &w), f);
    // P_e (A P_f) = A P_f - e (z* A P_f)
    let projected = &a_pf - mul(e, &mul(&z_adj, &a_pf));
    let inner = projected + mul_adjoint(&mul(e, m), f);

    let (inner_inv, inner_condition) = lu_inverse(&inner).ok_or(Error::InnerMatrixSingular)?;
    let g = inner_inv - mul(&w, &mul(m_inv, &z_adj));

    // x = w - G (A w),  y* = z* - (z* A) G
    let x = &w - mul(&g, &mul(a, &w));
    let y_adj = &z_adj - mul(&mul(&z_adj, a), &g);

    let inv = StructuredInverse::from_parts(g, x, y_adj.adjoint())?;
    Ok((inv, InnerDiagnostics { inner_condition }))
}

/// The direct construction with `u = e`, `v = f`, `M = I`.
pub fn structured_inverse_direct<T: Scalar>(problem: &RankModifiedProblem<T>) -> Result<StructuredInverse<T>> {
    structured_inverse_direct_with_diagnostics(problem).map(|(inv, _)| inv)
}

pub fn structured_inverse_direct_with_diagnostics<T: Scalar>(
    problem: &RankModifiedProblem<T>,
) -> Result<(StructuredInverse<T>, InnerDiagnostics)> {
    let params = AnsatzParams::simplest(problem)?;
    structured_inverse_general_with_diagnostics(problem, &params)
}

/// `G = (A + e M f*)^-1 - x M^-1 y*` for already known `x`, `y`.
pub fn g_from_known_xy<T: Scalar>(
    problem: &RankModifiedProblem<T>,
    x: &DMatrix<T>,
    y: &DMatrix<T>,
    m: &DMatrix<T>,
) -> Result<DMatrix<T>> {
    let (n, k) = (problem.n(), problem.k());
    if x.shape() != (n, k) {
        return Err(Error::dims("x", (n, k), x.shape()));
    }
    if y.shape() != (n, k) {
        return Err(Error::dims("y", (n, k), y.shape()));
    }
    if m.shape() != (k, k) {
        return Err(Error::dims("M", (k, k), m.shape()));
    }
    let m_inv = pivot_inverse(m, "M", default_singular_tol(k))?;
    let shifted = problem.a() + mul_adjoint(&mul(problem.e(), m), problem.f());
    let (shifted_inv, _) = lu_inverse(&shifted).ok_or(Error::InnerMatrixSingular)?;
    Ok(shifted_inv - mul_adjoint(&mul(x, &m_inv), y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::validate;
    use nalgebra::DVector;

    fn col(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(v.len(), 1, v)
    }

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(v))
    }

    fn fix1() -> RankModifiedProblem<f64> {
        validate(diag(&[1.0, 0.0]), col(&[0.0, 1.0]), diag(&[2.0]), col(&[0.0, 1.0]), 1e-12).unwrap()
    }

    fn fix2() -> RankModifiedProblem<f64> {
        validate(DMatrix::from_element(2, 2, 1.0), col(&[1.0, 0.0]), diag(&[2.0]), col(&[1.0, 0.0]), 1e-12).unwrap()
    }

    #[test]
    fn fixture_outputs() {
        let inv = structured_inverse_direct(&fix1()).unwrap();
        assert_eq!(inv.g(), &diag(&[1.0, 0.0]));
        assert_eq!(inv.x(), &col(&[0.0, 1.0]));
        assert_eq!(inv.y(), &col(&[0.0, 1.0]));

        let (inv, diag_info) = structured_inverse_direct_with_diagnostics(&fix2()).unwrap();
        // The inner matrix is the identity for this fixture.
        assert!((diag_info.inner_condition - 1.0).abs() < 1e-15);
        assert!((inv.g() - DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0])).norm() < 1e-15);
        assert!((inv.x() - col(&[1.0, -1.0])).norm() < 1e-15);
        assert!((inv.y() - col(&[1.0, -1.0])).norm() < 1e-15);
    }

    #[test]
    fn n_matrix_is_derived() {
        let p = fix2();
        let params = AnsatzParams::new(&p, col(&[2.0, 1.0]), col(&[1.0, 3.0]), diag(&[4.0])).unwrap();
        // (f* v)^-1 M^-1 (u* e)^-1 = 1 * 0.25 * 0.5
        assert!((params.n_matrix()[(0, 0)] - 0.125).abs() < 1e-15);
        let inv = structured_inverse_general(&p, &params).unwrap();
        assert!((inv.g() - DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0])).norm() < 1e-14);
    }

    #[test]
    fn singular_parameters_are_rejected() {
        let p = fix2();
        // u* e = 0
        let err = AnsatzParams::new(&p, col(&[0.0, 1.0]), col(&[1.0, 0.0]), diag(&[1.0])).unwrap_err();
        assert_eq!(err, Error::PivotSingular { which: "u*e" });
        let err = AnsatzParams::new(&p, col(&[1.0, 0.0]), col(&[0.0, 1.0]), diag(&[1.0])).unwrap_err();
        assert_eq!(err, Error::PivotSingular { which: "f*v" });
        let err = AnsatzParams::new(&p, col(&[1.0, 0.0]), col(&[1.0, 0.0]), diag(&[0.0])).unwrap_err();
        assert_eq!(err, Error::PivotSingular { which: "M" });
    }

    #[test]
    fn g_from_known_factors() {
        let g = g_from_known_xy(&fix2(), &col(&[1.0, -1.0]), &col(&[1.0, -1.0]), &diag(&[2.0])).unwrap();
        assert!((g - DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0])).norm() < 1e-15);
        let g = g_from_known_xy(&fix1(), &col(&[0.0, 1.0]), &col(&[0.0, 1.0]), &diag(&[1.0])).unwrap();
        assert_eq!(g, diag(&[1.0, 0.0]));
    }

    #[test]
    fn broken_hypotheses_surface_as_inner_singularity() {
        // e inside range(A): the projected inner matrix collapses to e f*.
        let bad = RankModifiedProblem::unchecked(diag(&[1.0, 0.0]), col(&[1.0, 0.0]), diag(&[1.0]), col(&[0.0, 1.0]));
        assert_eq!(structured_inverse_direct(&bad).unwrap_err(), Error::InnerMatrixSingular);
        let x = col(&[0.0, 1.0]);
        assert_eq!(
            g_from_known_xy(&bad, &x, &x, &diag(&[1.0])).unwrap_err(),
            Error::InnerMatrixSingular
        );
    }
}
