//! Construction of the structured inverse from a rank-split singular value
//! decomposition of `A`.
//!
//! With `A = U_r Σ_r V_r*` and `U_k`, `V_k` orthonormal bases of the left and
//! right null spaces, the completed matrix factors as
//! `Ã = [U_r e] diag(Σ_r, D) [V_r f]*`, and inverting the two outer blocks
//! gives
//!
//! ```text
//! x  = V_k (f* V_k)^-1
//! y* = (U_k* e)^-1 U_k*
//! G  = (I - x f*) V_r Σ_r^-1 U_r* (I - e y*)
//! ```
//!
//! None of the three depends on `D`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dense::{default_singular_tol, pivot_inverse};
use crate::error::{Error, Result};
use crate::problem::{RankModifiedProblem, StructuredInverse};
use crate::scalar::{adjoint_mul, mul, Scalar};

/// Minimum ratio `σ_r / σ_{r+1}` for the rank split to count as clean.
pub const RANK_GAP_SEPARATION: f64 = 1e3;

/// Rank-split factors of a square matrix `A`.
#[derive(Debug, Clone)]
pub struct CompactSvd<T: Scalar> {
    /// n x r, orthonormal basis of range(A).
    pub u_r: DMatrix<T>,
    /// The r nonzero singular values, positive and non-increasing.
    pub sigma_r: DVector<f64>,
    /// n x r, orthonormal basis of range(A*).
    pub v_r: DMatrix<T>,
    /// n x k, orthonormal basis of the complement of range(A).
    pub u_k: DMatrix<T>,
    /// n x k, orthonormal basis of the null space of A.
    pub v_k: DMatrix<T>,
    /// All n singular values, non-increasing.
    pub singular_values: DVector<f64>,
}

impl<T: Scalar> CompactSvd<T> {
    pub fn n(&self) -> usize {
        self.u_r.nrows()
    }

    pub fn rank(&self) -> usize {
        self.sigma_r.len()
    }

    pub fn nullity(&self) -> usize {
        self.u_k.ncols()
    }

    /// `σ_r / σ_{r+1}`; infinite when the trailing singular value is exactly zero.
    pub fn gap_ratio(&self) -> f64 {
        let r = self.rank();
        let last = self.singular_values[r - 1];
        match self.singular_values.get(r) {
            Some(&next) if next > 0.0 => last / next,
            _ => f64::INFINITY,
        }
    }

    pub fn is_ill_split(&self) -> bool {
        self.gap_ratio() < RANK_GAP_SEPARATION
    }

    /// `U_r Σ_r V_r*`.
    pub fn reconstruct(&self) -> DMatrix<T> {
        let scaled = scale_columns(&self.u_r, &self.sigma_r, false);
        mul(&scaled, &self.v_r.adjoint())
    }

    /// The same factorization with the null-space bases replaced by `U_k Q`
    /// and `V_k P`. Both `Q` and `P` must be k x k unitary.
    pub fn with_rotated_null_bases(&self, q: &DMatrix<T>, p: &DMatrix<T>) -> Self {
        Self {
            u_k: mul(&self.u_k, q),
            v_k: mul(&self.v_k, p),
            ..self.clone()
        }
    }
}

/// Rank-split SVD of the square matrix `a`.
///
/// The rank is the number of singular values above `tol_rank * σ_max`. Fails
/// when that leaves no null space (k = 0) or no range (r = 0).
pub fn compact_svd<T: Scalar>(a: &DMatrix<T>, tol_rank: f64) -> Result<CompactSvd<T>> {
    let n = a.nrows();
    if !a.is_square() || n == 0 {
        return Err(Error::dims("A", (n, n), a.shape()));
    }
    let (u, s, v) = T::svd(a).ok_or(Error::SvdNoConvergence)?;

    let sigma_max = s[0];
    let rank = s.iter().filter(|&&sv| sv > tol_rank * sigma_max).count();
    if rank == 0 || rank == n {
        return Err(Error::RankOfANotNMinusK {
            n,
            k: n - rank,
            detected: rank,
        });
    }

    Ok(CompactSvd {
        u_r: u.columns(0, rank).into_owned(),
        sigma_r: s.rows(0, rank).into_owned(),
        v_r: v.columns(0, rank).into_owned(),
        u_k: u.columns(rank, n - rank).into_owned(),
        v_k: v.columns(rank, n - rank).into_owned(),
        singular_values: s,
    })
}

/// Structured inverse of a validated problem via its stored SVD.
pub fn structured_inverse_svd<T: Scalar>(problem: &RankModifiedProblem<T>) -> Result<StructuredInverse<T>> {
    structured_inverse_from_svd(problem.svd(), problem.e(), problem.f())
}

/// `(G, x, y)` from an arbitrary rank-split SVD of `A` and the outer factors.
pub fn structured_inverse_from_svd<T: Scalar>(
    svd: &CompactSvd<T>,
    e: &DMatrix<T>,
    f: &DMatrix<T>,
) -> Result<StructuredInverse<T>> {
    let (x, y) = null_space_factors(svd, e, f)?;

    // (V_r - x f* V_r) Σ_r^-1
    let f_vr = adjoint_mul(f, &svd.v_r);
    let left = scale_columns(&(&svd.v_r - mul(&x, &f_vr)), &svd.sigma_r, true);
    // U_r* - (U_r* e) y*
    let ur_e = adjoint_mul(&svd.u_r, e);
    let right = svd.u_r.adjoint() - mul(&ur_e, &y.adjoint());

    StructuredInverse::from_parts(mul(&left, &right), x, y)
}

/// `x = V_k (f* V_k)^-1` and `y = U_k ((U_k* e)^-1)*`.
///
/// The second form is the conjugate transpose of `y* = (U_k* e)^-1 U_k*`,
/// which equals `U_k (e* U_k)^-1`.
pub(crate) fn null_space_factors<T: Scalar>(
    svd: &CompactSvd<T>,
    e: &DMatrix<T>,
    f: &DMatrix<T>,
) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let k = svd.nullity();
    let n = svd.n();
    if e.shape() != (n, k) {
        return Err(Error::dims("e", (n, k), e.shape()));
    }
    if f.shape() != (n, k) {
        return Err(Error::dims("f", (n, k), f.shape()));
    }
    let tol = default_singular_tol(k);
    let uk_e_inv = pivot_inverse(&adjoint_mul(&svd.u_k, e), "Uk*e", tol)?;
    let f_vk_inv = pivot_inverse(&adjoint_mul(f, &svd.v_k), "f*Vk", tol)?;
    let x = mul(&svd.v_k, &f_vk_inv);
    let y = mul(&svd.u_k, &uk_e_inv.adjoint());
    Ok((x, y))
}

/// Moore-Penrose inverse `A+ = V_r Σ_r^-1 U_r*`.
pub fn pseudoinverse<T: Scalar>(svd: &CompactSvd<T>) -> DMatrix<T> {
    let scaled = scale_columns(&svd.v_r, &svd.sigma_r, true);
    mul(&scaled, &svd.u_r.adjoint())
}

/// `G = (I - V_k (f* V_k)^-1 f*) A+ (I - e (U_k* e)^-1 U_k*)`, formed with
/// explicit n x n projectors.
pub fn g_from_pseudoinverse<T: Scalar>(svd: &CompactSvd<T>, e: &DMatrix<T>, f: &DMatrix<T>) -> Result<DMatrix<T>> {
    let (x, y) = null_space_factors(svd, e, f)?;
    let n = svd.n();
    let left = DMatrix::<T>::identity(n, n) - mul(&x, &f.adjoint());
    let right = DMatrix::<T>::identity(n, n) - mul(e, &y.adjoint());
    Ok(mul(&mul(&left, &pseudoinverse(svd)), &right))
}

/// Scales column j of `m` by `s[j]`, or by `1 / s[j]` when `invert` is set.
fn scale_columns<T: Scalar>(m: &DMatrix<T>, s: &DVector<f64>, invert: bool) -> DMatrix<T> {
    let mut out = m.clone();
    for (mut col, &sv) in out.column_iter_mut().zip(s.iter()) {
        let factor = if invert { 1.0 / sv } else { sv };
        col *= T::from_real(factor);
    }
    out
}

/// Conditioning of the rank split, reported alongside a validated problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitDiagnostics {
    pub rank: usize,
    pub gap_ratio: f64,
    pub ill_split: bool,
    /// 2-norm condition number of `U_k* e`.
    pub cond_uk_e: f64,
    /// 2-norm condition number of `f* V_k`.
    pub cond_f_vk: f64,
}
