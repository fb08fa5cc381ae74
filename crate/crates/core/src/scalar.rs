//! Field abstraction: every problem is carried either entirely over the reals
//! or entirely over the complex numbers, both at double precision.

use std::fmt;

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Field tag shared by all matrices of one problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Real => f.write_str("real"),
            Field::Complex => f.write_str("complex"),
        }
    }
}

impl std::str::FromStr for Field {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "real" => Ok(Field::Real),
            "complex" => Ok(Field::Complex),
            other => Err(format!("unknown field `{other}` (expected real or complex)")),
        }
    }
}

/// Element type of a problem. Implemented for `f64` and `Complex64`.
///
/// For the real field `adjoint` is the plain transpose, so every formula in
/// this crate is written once with conjugate transposes.
pub trait Scalar: ComplexField<RealField = f64> + Copy + Send + Sync + 'static {
    const FIELD: Field;

    /// Builds a scalar from real and imaginary parts. The imaginary part is
    /// discarded for the real field.
    fn from_parts(re: f64, im: f64) -> Self;

    fn parts(self) -> (f64, f64);

    /// Dense matrix product `a * b`.
    fn matmul(a: &DMatrix<Self>, b: &DMatrix<Self>) -> DMatrix<Self>;

    /// Full SVD `m = U diag(s) V*`, singular values in nonincreasing order.
    /// `None` if the iteration fails to converge.
    fn svd(m: &DMatrix<Self>) -> Option<(DMatrix<Self>, DVector<f64>, DMatrix<Self>)>;

    /// Singular values in nonincreasing order.
    fn singular_values(m: &DMatrix<Self>) -> Option<Vec<f64>>;

    /// LU inverse; entries are non-finite when `m` is exactly singular.
    fn lu_inverse(m: &DMatrix<Self>) -> DMatrix<Self>;
}

macro_rules! delegate_factorizations {
    () => {
        fn svd(m: &DMatrix<Self>) -> Option<(DMatrix<Self>, DVector<f64>, DMatrix<Self>)> {
            crate::backend::svd(m)
        }

        fn singular_values(m: &DMatrix<Self>) -> Option<Vec<f64>> {
            crate::backend::singular_values(m)
        }

        fn lu_inverse(m: &DMatrix<Self>) -> DMatrix<Self> {
            crate::backend::lu_inverse(m)
        }
    };
}

impl Scalar for f64 {
    const FIELD: Field = Field::Real;

    #[inline]
    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }

    #[inline]
    fn parts(self) -> (f64, f64) {
        (self, 0.0)
    }

    fn matmul(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        a * b
    }

    delegate_factorizations!();
}

impl Scalar for Complex64 {
    const FIELD: Field = Field::Complex;

    #[inline]
    fn from_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }

    #[inline]
    fn parts(self) -> (f64, f64) {
        (self.re, self.im)
    }

    // nalgebra only dispatches real element types to a blocked gemm.
    fn matmul(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        assert_eq!(a.ncols(), b.nrows(), "matmul: inner dimensions differ");
        if a.nrows() * a.ncols() * b.ncols() < 4096 {
            return a * b;
        }
        crate::backend::matmul(a, b)
    }

    delegate_factorizations!();
}

/// `a * b`, routed through the field's fastest product.
#[inline]
pub fn mul<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    T::matmul(a, b)
}

/// `a* * b` without the caller spelling out the adjoint.
#[inline]
pub fn adjoint_mul<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    T::matmul(&a.adjoint(), b)
}

/// `a * b*`.
#[inline]
pub fn mul_adjoint<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    T::matmul(a, &b.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_matmul_matches_generic_product() {
        let a = DMatrix::from_fn(23, 19, |i, j| {
            Complex64::new((i as f64 * 0.3).sin() + j as f64, (j as f64 * 0.7).cos() - i as f64)
        });
        let b = DMatrix::from_fn(19, 31, |i, j| {
            Complex64::new((i * j) as f64 * 0.01, (i + 2 * j) as f64 * -0.1)
        });
        let fast = mul(&a, &b);
        let slow = &a * &b;
        assert!((fast - &slow).norm() <= 1e-12 * slow.norm());
    }

    #[test]
    fn real_adjoint_is_transpose() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(a.adjoint(), a.transpose());
        let p = adjoint_mul(&a, &a);
        assert_eq!(p, a.transpose() * &a);
    }

    #[test]
    fn field_parses_and_prints() {
        assert_eq!("real".parse::<Field>().unwrap(), Field::Real);
        assert_eq!("complex".parse::<Field>().unwrap(), Field::Complex);
        assert!("quaternion".parse::<Field>().is_err());
        assert_eq!(Field::Complex.to_string(), "complex");
    }
}
