//! Residual checks for the product identities satisfied by `(G, x, y)`, the
//! Penrose conditions, and agreement with the pseudoinverse-update formula
//! built from the range/null-space split of `e` and `f`.
//!
//! Every residual is a Frobenius norm and is judged against
//! `abs + rel * scale`, where `scale` is the product of the Frobenius norms of
//! the operands (summed over the terms when a relation has several).

use nalgebra::DMatrix;
use serde::Serialize;

use crate::dense::{default_singular_tol, identity, pivot_inverse};
use crate::error::{Error, Result};
use crate::problem::{IdentityTolerance, RankModifiedProblem, StructuredInverse};
use crate::scalar::{adjoint_mul, mul, mul_adjoint, Scalar};
use crate::svd_path::pseudoinverse;

/// One named residual and its verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub scale: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &'static str, residual: f64, scale: f64, tol: &IdentityTolerance) -> Self {
        Self {
            name,
            residual,
            scale,
            pass: tol.accepts(residual, scale),
        }
    }

    /// `residual / scale`, or the bare residual for a vanishing scale.
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.residual / self.scale
        } else {
            self.residual
        }
    }
}

/// The eight relations `A x = 0`, `y* A = 0`, `G e = 0`, `f* G = 0`,
/// `f* x = I`, `y* e = I`, `A G + e y* = I`, `G A + x f* = I`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub ax: Check,
    pub ya: Check,
    pub ge: Check,
    pub fg: Check,
    pub fx_minus_i: Check,
    pub ye_minus_i: Check,
    pub ag_plus_ey_star_minus_i: Check,
    pub ga_plus_xf_star_minus_i: Check,
}

impl IdentityReport {
    pub fn checks(&self) -> [&Check; 8] {
        [
            &self.ax,
            &self.ya,
            &self.ge,
            &self.fg,
            &self.fx_minus_i,
            &self.ye_minus_i,
            &self.ag_plus_ey_star_minus_i,
            &self.ga_plus_xf_star_minus_i,
        ]
    }

    pub fn all_pass(&self) -> bool {
        self.checks().iter().all(|c| c.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks().iter().map(|c| c.residual).fold(0.0, f64::max)
    }
}

pub fn check_corollary<T: Scalar>(
    problem: &RankModifiedProblem<T>,
    inv: &StructuredInverse<T>,
    tol: &IdentityTolerance,
) -> Result<IdentityReport> {
    let (n, k) = (problem.n(), problem.k());
    if inv.n() != n || inv.k() != k {
        return Err(Error::dims("structured inverse", (n, k), (inv.n(), inv.k())));
    }
    let (a, e, f) = (problem.a(), problem.e(), problem.f());
    let (g, x, y) = (inv.g(), inv.x(), inv.y());
    let (na, ne, nf, ng, nx, ny) = (a.norm(), e.norm(), f.norm(), g.norm(), x.norm(), y.norm());
    let ik = identity::<T>(k);
    let i_n = identity::<T>(n);

    let ey = mul_adjoint(e, y);
    let xf = mul_adjoint(x, f);

    Ok(IdentityReport {
        ax: Check::new("Ax", mul(a, x).norm(), na * nx, tol),
        ya: Check::new("yA", adjoint_mul(y, a).norm(), ny * na, tol),
        ge: Check::new("Ge", mul(g, e).norm(), ng * ne, tol),
        fg: Check::new("fG", adjoint_mul(f, g).norm(), nf * ng, tol),
        fx_minus_i: Check::new("fx_minus_I", (adjoint_mul(f, x) - &ik).norm(), nf * nx, tol),
        ye_minus_i: Check::new("ye_minus_I", (adjoint_mul(y, e) - &ik).norm(), ny * ne, tol),
        ag_plus_ey_star_minus_i: Check::new(
            "AG_plus_eyStar_minus_I",
            (mul(a, g) + ey - &i_n).norm(),
            na * ng + ne * ny,
            tol,
        ),
        ga_plus_xf_star_minus_i: Check::new(
            "GA_plus_xfStar_minus_I",
            (mul(g, a) + xf - &i_n).norm(),
            ng * na + nx * nf,
            tol,
        ),
    })
}

/// Residuals of the four Penrose conditions for a candidate inverse `g` of `a`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PenroseReport {
    /// `A G A = A`
    pub aga: Check,
    /// `G A G = G`
    pub gag: Check,
    /// `(A G)* = A G`
    pub ag_hermitian: Check,
    /// `(G A)* = G A`
    pub ga_hermitian: Check,
}

impl PenroseReport {
    pub fn checks(&self) -> [&Check; 4] {
        [&self.aga, &self.gag, &self.ag_hermitian, &self.ga_hermitian]
    }

    /// Conditions (i) and (ii), which every `G` of a structured inverse meets.
    pub fn reflexive(&self) -> bool {
        self.aga.pass && self.gag.pass
    }

    /// All four conditions, i.e. `G` is the Moore-Penrose inverse.
    pub fn moore_penrose(&self) -> bool {
        self.checks().iter().all(|c| c.pass)
    }
}

pub fn check_penrose<T: Scalar>(a: &DMatrix<T>, g: &DMatrix<T>, tol: &IdentityTolerance) -> Result<PenroseReport> {
    if !a.is_square() {
        return Err(Error::dims("A", (a.nrows(), a.nrows()), a.shape()));
    }
    if g.shape() != a.shape() {
        return Err(Error::dims("G", a.shape(), g.shape()));
    }
    let (na, ng) = (a.norm(), g.norm());
    let ag = mul(a, g);
    let ga = mul(g, a);
    Ok(PenroseReport {
        aga: Check::new("AGA_minus_A", (mul(&ag, a) - a).norm(), na * na * ng, tol),
        gag: Check::new("GAG_minus_G", (mul(&ga, g) - g).norm(), ng * ng * na, tol),
        ag_hermitian: Check::new("AG_hermitian", (ag.adjoint() - &ag).norm(), na * ng, tol),
        ga_hermitian: Check::new("GA_hermitian", (ga.adjoint() - &ga).norm(), ng * na, tol),
    })
}

/// Split of `e` and `f` into components inside and orthogonal to the column
/// spaces of `A` and `A*`, with the normalized orthogonal parts.
#[derive(Debug, Clone)]
pub struct RiedelDecomposition<T: Scalar> {
    /// `U_r U_r* e`
    pub v1: DMatrix<T>,
    /// `U_k U_k* e`
    pub w1: DMatrix<T>,
    /// `V_r V_r* f`
    pub v2: DMatrix<T>,
    /// `V_k V_k* f`
    pub w2: DMatrix<T>,
    /// `W1 (W1* W1)^-1`
    pub c1: DMatrix<T>,
    /// `W2 (W2* W2)^-1`
    pub c2: DMatrix<T>,
}

pub fn riedel_decomposition<T: Scalar>(problem: &RankModifiedProblem<T>) -> Result<RiedelDecomposition<T>> {
    let svd = problem.svd();
    let (e, f) = (problem.e(), problem.f());
    let tol = default_singular_tol(problem.k());

    let v1 = mul(&svd.u_r, &adjoint_mul(&svd.u_r, e));
    let w1 = mul(&svd.u_k, &adjoint_mul(&svd.u_k, e));
    let v2 = mul(&svd.v_r, &adjoint_mul(&svd.v_r, f));
    let w2 = mul(&svd.v_k, &adjoint_mul(&svd.v_k, f));
    let c1 = mul(&w1, &pivot_inverse(&adjoint_mul(&w1, &w1), "W1*W1", tol)?);
    let c2 = mul(&w2, &pivot_inverse(&adjoint_mul(&w2, &w2), "W2*W2", tol)?);
    Ok(RiedelDecomposition { v1, w1, v2, w2, c1, c2 })
}

/// Dense `(I - C2 V2*) A+ (I - V1 C1*) + C2 D^-1 C1*`, which equals `Ã^-1`.
pub fn riedel_inverse<T: Scalar>(problem: &RankModifiedProblem<T>) -> Result<DMatrix<T>> {
    let parts = riedel_decomposition(problem)?;
    let k = problem.k();
    let tol = default_singular_tol(k);
    let d_inv = pivot_inverse(problem.d(), "D", tol).map_err(|_| {
        let (max, min) = crate::dense::sigma_extremes(problem.d());
        Error::DSingular {
            sigma_min: min,
            threshold: tol * max,
        }
    })?;

    let n = problem.n();
    let a_plus = pseudoinverse(problem.svd());
    let left = identity::<T>(n) - mul_adjoint(&parts.c2, &parts.v2);
    let right = identity::<T>(n) - mul_adjoint(&parts.v1, &parts.c1);
    let core = mul_adjoint(&mul(&parts.c2, &d_inv), &parts.c1);
    Ok(mul(&mul(&left, &a_plus), &right) + core)
}

/// Residual of `A+ e (U_k* e)^-1 U_k* = A+ V1 C1*`: the two projectors differ
/// only by a term in the null space of `A+`.
pub fn nullspace_difference_check<T: Scalar>(
    problem: &RankModifiedProblem<T>,
    tol: &IdentityTolerance,
) -> Result<Check> {
    let svd = problem.svd();
    let e = problem.e();
    let parts = riedel_decomposition(problem)?;
    let a_plus = pseudoinverse(svd);
    let uk_e_inv = pivot_inverse(&adjoint_mul(&svd.u_k, e), "Uk*e", default_singular_tol(problem.k()))?;
    let oblique = mul(&uk_e_inv, &svd.u_k.adjoint());

    let lhs = mul(&mul(&a_plus, e), &oblique);
    let rhs = mul(&mul(&a_plus, &parts.v1), &parts.c1.adjoint());
    let scale = a_plus.norm() * e.norm() * oblique.norm();
    Ok(Check::new("nullspace_difference", (lhs - rhs).norm(), scale, tol))
}
