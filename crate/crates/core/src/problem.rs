//! Validated problems `Ã = A + e D f*` and their structured inverses
//! `Ã^-1 = G + x D^-1 y*`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dense::{default_singular_tol, pivot_inverse, sigma_extremes};
use crate::error::{Error, Result};
use crate::scalar::{adjoint_mul, mul, mul_adjoint, Scalar};
use crate::svd_path::{compact_svd, CompactSvd, SplitDiagnostics};

/// The quadruple `(A, e, D, f)` after its hypotheses have been checked.
///
/// `A` is n x n of rank n - k, `e` and `f` are n x k and complete the column
/// spaces of `A` and `A*`, and `D` is an invertible k x k core. The rank-split
/// SVD computed during validation is kept for the construction paths.
#[derive(Debug, Clone)]
pub struct RankModifiedProblem<T: Scalar> {
    a: DMatrix<T>,
    e: DMatrix<T>,
    d: DMatrix<T>,
    f: DMatrix<T>,
    tol_rank: f64,
    svd: CompactSvd<T>,
    diagnostics: SplitDiagnostics,
}

impl<T: Scalar> RankModifiedProblem<T> {
    /// Validates with the default rank tolerance `n * eps`.
    pub fn new(a: DMatrix<T>, e: DMatrix<T>, d: DMatrix<T>, f: DMatrix<T>) -> Result<Self> {
        let tol = default_rank_tol(a.nrows());
        validate(a, e, d, f, tol)
    }

    pub fn a(&self) -> &DMatrix<T> {
        &self.a
    }

    pub fn e(&self) -> &DMatrix<T> {
        &self.e
    }

    pub fn d(&self) -> &DMatrix<T> {
        &self.d
    }

    pub fn f(&self) -> &DMatrix<T> {
        &self.f
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn k(&self) -> usize {
        self.e.ncols()
    }

    /// Rank of `A`, always `n - k`.
    pub fn r(&self) -> usize {
        self.n() - self.k()
    }

    pub fn tol_rank(&self) -> f64 {
        self.tol_rank
    }

    pub fn svd(&self) -> &CompactSvd<T> {
        &self.svd
    }

    pub fn diagnostics(&self) -> &SplitDiagnostics {
        &self.diagnostics
    }

    /// The same `(A, e, f)` with a new core, re-validated.
    pub fn with_core(&self, d: DMatrix<T>) -> Result<Self> {
        validate(self.a.clone(), self.e.clone(), d, self.f.clone(), self.tol_rank)
    }

    /// Dense `A + e D f*`.
    pub fn assemble(&self) -> DMatrix<T> {
        assemble_parts(&self.a, &self.e, &self.d, &self.f)
    }

    /// Builds a problem skipping every hypothesis check except the rank split.
    #[cfg(test)]
    pub(crate) fn unchecked(a: DMatrix<T>, e: DMatrix<T>, d: DMatrix<T>, f: DMatrix<T>) -> Self {
        let tol_rank = default_rank_tol(a.nrows());
        let svd = compact_svd(&a, tol_rank).expect("rank split");
        let diagnostics = SplitDiagnostics {
            rank: svd.rank(),
            gap_ratio: svd.gap_ratio(),
            ill_split: svd.is_ill_split(),
            cond_uk_e: f64::NAN,
            cond_f_vk: f64::NAN,
        };
        Self {
            a,
            e,
            d,
            f,
            tol_rank,
            svd,
            diagnostics,
        }
    }

    /// Swaps in a core without any checks. Only for exercising code paths
    /// with hypotheses deliberately broken.
    #[cfg(test)]
    pub(crate) fn with_core_unchecked(&self, d: DMatrix<T>) -> Self {
        Self { d, ..self.clone() }
    }
}

/// Default relative rank threshold for an n x n matrix.
pub fn default_rank_tol(n: usize) -> f64 {
    default_singular_tol(n)
}

/// `A + e D f*`.
pub fn assemble_parts<T: Scalar>(a: &DMatrix<T>, e: &DMatrix<T>, d: &DMatrix<T>, f: &DMatrix<T>) -> DMatrix<T> {
    a + mul_adjoint(&mul(e, d), f)
}

/// Checks every hypothesis of the inversion formula and returns the
/// validated problem.
///
/// Rank decisions count singular values above `tol_rank * σ_max`. The
/// spanning hypotheses are tested on the k x k matrices `U_k* e` and
/// `f* V_k`, which are invertible exactly when `[A | e]` and `[A* | f]` have
/// full rank.
pub fn validate<T: Scalar>(
    a: DMatrix<T>,
    e: DMatrix<T>,
    d: DMatrix<T>,
    f: DMatrix<T>,
    tol_rank: f64,
) -> Result<RankModifiedProblem<T>> {
    if !(tol_rank >= 0.0) || !tol_rank.is_finite() {
        return Err(Error::InvalidTolerance(format!("tol_rank must be finite and >= 0, got {tol_rank}")));
    }
    let n = a.nrows();
    let k = e.ncols();
    if a.ncols() != n {
        return Err(Error::dims("A", (n, n), a.shape()));
    }
    if e.nrows() != n {
        return Err(Error::dims("e", (n, k), e.shape()));
    }
    if d.shape() != (k, k) {
        return Err(Error::dims("D", (k, k), d.shape()));
    }
    if f.shape() != (n, k) {
        return Err(Error::dims("f", (n, k), f.shape()));
    }
    if n == 0 {
        return Err(Error::dims("A", (1, 1), (0, 0)));
    }

    let svd = compact_svd(&a, tol_rank).map_err(|err| match err {
        Error::RankOfANotNMinusK { detected, .. } => Error::RankOfANotNMinusK { n, k, detected },
        other => other,
    })?;
    if k == 0 || k >= n || svd.rank() != n - k {
        return Err(Error::RankOfANotNMinusK {
            n,
            k,
            detected: svd.rank(),
        });
    }

    let (d_max, d_min) = sigma_extremes(&d);
    if !(d_min > tol_rank * d_max) {
        return Err(Error::DSingular {
            sigma_min: d_min,
            threshold: tol_rank * d_max,
        });
    }

    let cond_uk_e = span_condition(&adjoint_mul(&svd.u_k, &e), &e, tol_rank)
        .map_err(|(sigma_min, threshold)| Error::SpanDeficientE { sigma_min, threshold })?;
    let cond_f_vk = span_condition(&adjoint_mul(&f, &svd.v_k), &f, tol_rank)
        .map_err(|(sigma_min, threshold)| Error::SpanDeficientF { sigma_min, threshold })?;

    let diagnostics = SplitDiagnostics {
        rank: svd.rank(),
        gap_ratio: svd.gap_ratio(),
        ill_split: svd.is_ill_split(),
        cond_uk_e,
        cond_f_vk,
    };
    Ok(RankModifiedProblem {
        a,
        e,
        d,
        f,
        tol_rank,
        svd,
        diagnostics,
    })
}

/// Condition number of the projected block, or `(σ_min, threshold)` when its
/// smallest singular value does not clear `tol * ||outer||_2`.
fn span_condition<T: Scalar>(projected: &DMatrix<T>, outer: &DMatrix<T>, tol: f64) -> std::result::Result<f64, (f64, f64)> {
    let (max, min) = sigma_extremes(projected);
    let (outer_max, _) = sigma_extremes(outer);
    let threshold = tol * outer_max;
    if min > threshold && min > 0.0 {
        Ok(max / min)
    } else {
        Err((min, threshold))
    }
}

/// Residual acceptance rule `residual <= abs + rel * scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityTolerance {
    abs: f64,
    rel: f64,
}

impl IdentityTolerance {
    pub fn new(abs: f64, rel: f64) -> Result<Self> {
        if !(abs >= 0.0) || !(rel >= 0.0) {
            return Err(Error::InvalidTolerance(format!(
                "abs and rel must be >= 0, got abs = {abs}, rel = {rel}"
            )));
        }
        Ok(Self { abs, rel })
    }

    pub fn abs(&self) -> f64 {
        self.abs
    }

    pub fn rel(&self) -> f64 {
        self.rel
    }

    pub fn accepts(&self, residual: f64, scale: f64) -> bool {
        residual <= self.abs + self.rel * scale
    }
}

impl Default for IdentityTolerance {
    fn default() -> Self {
        Self { abs: 1e-12, rel: 1e-12 }
    }
}

/// The factors of `Ã^-1 = G + x D^-1 y*`. None of them depends on `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredInverse<T: Scalar> {
    g: DMatrix<T>,
    x: DMatrix<T>,
    y: DMatrix<T>,
}

impl<T: Scalar> StructuredInverse<T> {
    /// Checks shapes only: `G` n x n, `x` and `y` n x k with n > k >= 1.
    pub fn from_parts(g: DMatrix<T>, x: DMatrix<T>, y: DMatrix<T>) -> Result<Self> {
        let n = g.nrows();
        let k = x.ncols();
        if g.ncols() != n {
            return Err(Error::dims("G", (n, n), g.shape()));
        }
        if x.nrows() != n || k == 0 || k >= n {
            return Err(Error::dims("x", (n, k.max(1)), x.shape()));
        }
        if y.shape() != (n, k) {
            return Err(Error::dims("y", (n, k), y.shape()));
        }
        Ok(Self { g, x, y })
    }

    pub fn g(&self) -> &DMatrix<T> {
        &self.g
    }

    pub fn x(&self) -> &DMatrix<T> {
        &self.x
    }

    pub fn y(&self) -> &DMatrix<T> {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.g.nrows()
    }

    pub fn k(&self) -> usize {
        self.x.ncols()
    }

    pub fn into_parts(self) -> (DMatrix<T>, DMatrix<T>, DMatrix<T>) {
        (self.g, self.x, self.y)
    }

    /// `(G + x D^-1 y*) b` without forming the dense inverse.
    pub fn apply_inverse(&self, d: &DMatrix<T>, b: &DMatrix<T>) -> Result<DMatrix<T>> {
        if b.nrows() != self.n() {
            return Err(Error::dims("b", (self.n(), b.ncols()), b.shape()));
        }
        let d_inv = self.core_inverse(d)?;
        let yb = adjoint_mul(&self.y, b);
        Ok(mul(&self.g, b) + mul(&self.x, &mul(&d_inv, &yb)))
    }

    /// Dense `G + x D^-1 y*`, the inverse of `A + e D f*` for any invertible `D`.
    pub fn reassemble_inverse(&self, d: &DMatrix<T>) -> Result<DMatrix<T>> {
        let d_inv = self.core_inverse(d)?;
        Ok(&self.g + mul_adjoint(&mul(&self.x, &d_inv), &self.y))
    }

    fn core_inverse(&self, d: &DMatrix<T>) -> Result<DMatrix<T>> {
        let k = self.k();
        if d.shape() != (k, k) {
            return Err(Error::dims("D", (k, k), d.shape()));
        }
        let tol = default_singular_tol(k);
        pivot_inverse(d, "D", tol).map_err(|_| {
            let (max, min) = sigma_extremes(d);
            Error::DSingular {
                sigma_min: min,
                threshold: tol * max,
            }
        })
    }
}
