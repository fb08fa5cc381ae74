//! Determinant identities for completed singular matrices:
//! `det(A + e D f*) = det(A + e f*) det(D)` and
//! `det(Ã^-1) = det(G + x y*) det(D^-1)`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::dense::{default_singular_tol, pivot_inverse, sigma_extremes};
use crate::error::{Error, Result};
use crate::problem::{RankModifiedProblem, StructuredInverse};
use crate::scalar::{mul_adjoint, Scalar};

/// A determinant stored as `phase * exp(log_abs)`; `phase` has unit modulus
/// and is `0` for a singular matrix, in which case `log_abs` is `-inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet<T: Scalar> {
    pub phase: T,
    pub log_abs: f64,
}

impl<T: Scalar> LogDet<T> {
    pub fn is_zero(&self) -> bool {
        self.log_abs == f64::NEG_INFINITY
    }

    /// The plain value, or `None` when it over- or underflows a double.
    pub fn value(&self) -> Option<T> {
        if self.is_zero() {
            return Some(T::zero());
        }
        let magnitude = self.log_abs.exp();
        if magnitude.is_finite() && magnitude >= f64::MIN_POSITIVE {
            Some(self.phase * T::from_real(magnitude))
        } else {
            None
        }
    }

    pub fn mul(self, other: Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        Self {
            phase: self.phase * other.phase,
            log_abs: self.log_abs + other.log_abs,
        }
    }

    pub fn recip(self) -> Self {
        Self {
            phase: self.phase.conjugate(),
            log_abs: -self.log_abs,
        }
    }

    fn zero() -> Self {
        Self {
            phase: T::zero(),
            log_abs: f64::NEG_INFINITY,
        }
    }
}

/// Sign/phase and log-magnitude of `det(m)` from LU with partial pivoting.
pub fn log_det<T: Scalar>(m: &DMatrix<T>) -> Result<LogDet<T>> {
    if !m.is_square() {
        return Err(Error::dims("matrix", (m.nrows(), m.nrows()), m.shape()));
    }
    let lu = m.clone().lu();
    let mut phase = T::one();
    if lu.p().determinant::<f64>() < 0.0 {
        phase = -phase;
    }
    let mut log_abs = 0.0;
    let u = lu.u();
    for i in 0..u.nrows() {
        let pivot = u[(i, i)];
        let modulus = pivot.modulus();
        if modulus == 0.0 {
            return Ok(LogDet::zero());
        }
        phase *= pivot.unscale(modulus);
        log_abs += modulus.ln();
    }
    Ok(LogDet { phase, log_abs })
}

/// Plain determinant by LU; may over- or underflow for large matrices.
pub fn det<T: Scalar>(m: &DMatrix<T>) -> Result<T> {
    if !m.is_square() {
        return Err(Error::dims("matrix", (m.nrows(), m.nrows()), m.shape()));
    }
    Ok(m.clone().lu().determinant())
}

/// `det(A + e f*) * det(D)`.
pub fn det_via_lemma<T: Scalar>(problem: &RankModifiedProblem<T>) -> T {
    let unit = problem.a() + mul_adjoint(problem.e(), problem.f());
    unit.lu().determinant() * problem.d().clone().lu().determinant()
}

/// Log-domain form of [`det_via_lemma`].
pub fn log_det_via_lemma<T: Scalar>(problem: &RankModifiedProblem<T>) -> LogDet<T> {
    let unit = problem.a() + mul_adjoint(problem.e(), problem.f());
    let square = "shapes checked at validation";
    log_det(&unit).expect(square).mul(log_det(problem.d()).expect(square))
}

/// `det(G + x y*) * det(D^-1)`.
pub fn det_inverse_via_lemma<T: Scalar>(inv: &StructuredInverse<T>, d: &DMatrix<T>) -> Result<T> {
    let d_inv = checked_core_inverse(inv, d)?;
    let unit = inv.g() + mul_adjoint(inv.x(), inv.y());
    Ok(unit.lu().determinant() * d_inv.lu().determinant())
}

/// Log-domain form of [`det_inverse_via_lemma`].
pub fn log_det_inverse_via_lemma<T: Scalar>(inv: &StructuredInverse<T>, d: &DMatrix<T>) -> Result<LogDet<T>> {
    checked_core_inverse(inv, d)?;
    let unit = inv.g() + mul_adjoint(inv.x(), inv.y());
    Ok(log_det(&unit)?.mul(log_det(d)?.recip()))
}

fn checked_core_inverse<T: Scalar>(inv: &StructuredInverse<T>, d: &DMatrix<T>) -> Result<DMatrix<T>> {
    let k = inv.k();
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

/// Both sides of the lemma and the inverse analogue, in log form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeterminantComparison {
    pub log_abs_lemma: f64,
    pub log_abs_dense: f64,
    pub log_abs_inverse_lemma: f64,
    /// `|det_lemma / det_dense - 1|`, evaluated in the log domain.
    pub relative_gap: f64,
    /// `|det_lemma * det_inverse_lemma - 1|`, evaluated in the log domain.
    pub reciprocal_gap: f64,
}

pub fn compare_determinants<T: Scalar>(
    problem: &RankModifiedProblem<T>,
    inv: &StructuredInverse<T>,
) -> Result<(DeterminantComparison, [LogDet<T>; 3])> {
    let lemma = log_det_via_lemma(problem);
    let dense = log_det(&problem.assemble())?;
    let inverse = log_det_inverse_via_lemma(inv, problem.d())?;
    let cmp = DeterminantComparison {
        log_abs_lemma: lemma.log_abs,
        log_abs_dense: dense.log_abs,
        log_abs_inverse_lemma: inverse.log_abs,
        relative_gap: ratio_gap(lemma, dense.recip()),
        reciprocal_gap: ratio_gap(lemma, inverse),
    };
    Ok((cmp, [lemma, dense, inverse]))
}

/// `|a * b - 1|` for two log-form determinants.
fn ratio_gap<T: Scalar>(a: LogDet<T>, b: LogDet<T>) -> f64 {
    let prod = a.mul(b);
    if prod.is_zero() || !prod.log_abs.is_finite() {
        return f64::INFINITY;
    }
    let value = prod.phase * T::from_real(prod.log_abs.exp());
    (value - T::one()).modulus()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::validate;
    use crate::svd_path::structured_inverse_svd;
    use nalgebra::DVector;
    use num_complex::Complex64;

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
    fn lemma_on_fixtures() {
        assert!((det_via_lemma(&fix1()) - 2.0).abs() < 1e-15);
        assert!((det_via_lemma(&fix2()) - 2.0).abs() < 1e-15);
        assert!((det(&fix2().assemble()).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn inverse_lemma_on_fixtures() {
        let p = fix1();
        let inv = structured_inverse_svd(&p).unwrap();
        assert!((det_inverse_via_lemma(&inv, p.d()).unwrap() - 0.5).abs() < 1e-15);
        let p = fix2();
        let inv = structured_inverse_svd(&p).unwrap();
        assert!((det_inverse_via_lemma(&inv, p.d()).unwrap() - 0.5).abs() < 1e-14);
        assert!(matches!(
            det_inverse_via_lemma(&inv, &diag(&[0.0])),
            Err(Error::DSingular { .. })
        ));
    }

    #[test]
    fn singular_core_zeroes_the_lemma() {
        let p = fix2().with_core_unchecked(diag(&[0.0]));
        assert_eq!(det_via_lemma(&p), 0.0);
        assert!(log_det_via_lemma(&p).is_zero());
        assert_eq!(det(&p.assemble()).unwrap(), 0.0);
    }

    #[test]
    fn log_det_tracks_sign_and_phase() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 3.0, 0.0]);
        let ld = log_det(&m).unwrap();
        assert_eq!(ld.phase, -1.0);
        assert!((ld.log_abs - 6f64.ln()).abs() < 1e-15);
        assert!((ld.value().unwrap() + 6.0).abs() < 1e-14);

        let c = DMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0)],
        );
        let ld = log_det(&c).unwrap();
        assert!((ld.value().unwrap() - Complex64::new(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn large_determinants_stay_in_log_domain() {
        let m = DMatrix::<f64>::from_diagonal_element(400, 400, 1e3);
        let ld = log_det(&m).unwrap();
        assert!(ld.value().is_none());
        assert!((ld.log_abs - 400.0 * 1e3f64.ln()).abs() < 1e-9);
        assert!((ld.mul(ld.recip()).value().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn comparison_report() {
        let p = fix2();
        let inv = structured_inverse_svd(&p).unwrap();
        let (cmp, [lemma, dense, inverse]) = compare_determinants(&p, &inv).unwrap();
        assert!(cmp.relative_gap < 1e-14 && cmp.reciprocal_gap < 1e-14);
        assert!((lemma.value().unwrap() - 2.0).abs() < 1e-14);
        assert!((dense.value().unwrap() - 2.0).abs() < 1e-14);
        assert!((inverse.value().unwrap() - 0.5).abs() < 1e-14);
    }
}
