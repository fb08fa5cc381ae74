//! Seeded generation of valid problems with controlled conditioning, and the
//! dense LU oracle used to check the structured inverse.
//!
//! The random source is ChaCha20 (`rand_chacha`) seeded through
//! `SeedableRng::seed_from_u64`; normal variates come from
//! `rand_distr::StandardNormal`. The draw order inside [`generate`] is part of
//! the reproducibility contract and must not change within a major version.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dense::lu_inverse;
use crate::direct_path::AnsatzParams;
use crate::error::{Error, Result};
use crate::problem::RankModifiedProblem;
use crate::scalar::{mul, mul_adjoint, Field, Scalar};

pub type InstanceRng = ChaCha20Rng;

pub fn rng_from_seed(seed: u64) -> InstanceRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Parameters of a generated instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub field: Field,
    /// `σ_max / σ_min` over the nonzero singular values of `A`.
    pub sigma_spread: f64,
    /// Share of `e` (and `f`) lying inside range(A) (range(A*)), in `[0, 1)`.
    pub coupling: f64,
    /// Condition number of `D`.
    pub d_cond: f64,
}

impl GeneratorSpec {
    /// Real field, spread 10, coupling 0.5, `d_cond` 10.
    pub fn new(n: usize, k: usize, seed: u64) -> Self {
        Self {
            n,
            k,
            seed,
            field: Field::Real,
            sigma_spread: 10.0,
            coupling: 0.5,
            d_cond: 10.0,
        }
    }

    pub fn with_field(self, field: Field) -> Self {
        Self { field, ..self }
    }

    pub fn with_spread(self, sigma_spread: f64) -> Self {
        Self { sigma_spread, ..self }
    }

    pub fn with_coupling(self, coupling: f64) -> Self {
        Self { coupling, ..self }
    }

    pub fn with_d_cond(self, d_cond: f64) -> Self {
        Self { d_cond, ..self }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.n > self.k && self.k >= 1) {
            return Err(Error::InvalidSpec(format!("need n > k >= 1, got n = {}, k = {}", self.n, self.k)));
        }
        if !(self.sigma_spread >= 1.0) || !self.sigma_spread.is_finite() {
            return Err(Error::InvalidSpec(format!("sigma_spread must be >= 1, got {}", self.sigma_spread)));
        }
        if !(0.0..1.0).contains(&self.coupling) {
            return Err(Error::InvalidSpec(format!("coupling must lie in [0, 1), got {}", self.coupling)));
        }
        if !(self.d_cond >= 1.0) || !self.d_cond.is_finite() {
            return Err(Error::InvalidSpec(format!("d_cond must be >= 1, got {}", self.d_cond)));
        }
        Ok(())
    }
}

/// Builds `A = U_r Σ_r V_r*` from Haar-random unitaries and a log-uniform
/// spectrum, then
///
/// ```text
/// e = c U_r R1 + sqrt(1 - c^2) U_k Q
/// ```
///
/// with `R1` Gaussian (Frobenius norm `sqrt(k)`) and `Q` Haar-random, and `f`
/// likewise from the `V` blocks. `D = Q1 diag(s) Q2*` with a log-spaced `s`
/// from 1 down to `1 / d_cond`.
pub fn generate<T: Scalar>(spec: &GeneratorSpec) -> Result<RankModifiedProblem<T>> {
    spec.check()?;
    if spec.field != T::FIELD {
        return Err(Error::InvalidSpec(format!(
            "spec asks for a {} problem but {} scalars were requested",
            spec.field,
            T::FIELD
        )));
    }
    let (n, k) = (spec.n, spec.k);
    let r = n - k;
    let mut rng = rng_from_seed(spec.seed);

    let u = random_unitary::<T>(&mut rng, n);
    let v = random_unitary::<T>(&mut rng, n);
    let sigma = log_uniform_spectrum(&mut rng, r, spec.sigma_spread);

    let (u_r, u_k) = (u.columns(0, r).into_owned(), u.columns(r, k).into_owned());
    let (v_r, v_k) = (v.columns(0, r).into_owned(), v.columns(r, k).into_owned());

    let mut u_scaled = u_r.clone();
    for (mut c, &s) in u_scaled.column_iter_mut().zip(sigma.iter()) {
        c *= T::from_real(s);
    }
    let a = mul_adjoint(&u_scaled, &v_r);

    let e = coupled_block(&mut rng, &u_r, &u_k, spec.coupling);
    let f = coupled_block(&mut rng, &v_r, &v_k, spec.coupling);

    let q1 = random_unitary::<T>(&mut rng, k);
    let q2 = random_unitary::<T>(&mut rng, k);
    let d_spectrum = log_spaced(k, spec.d_cond);
    let mut q1_scaled = q1;
    for (mut c, &s) in q1_scaled.column_iter_mut().zip(d_spectrum.iter()) {
        c *= T::from_real(s);
    }
    let d = mul_adjoint(&q1_scaled, &q2);

    RankModifiedProblem::new(a, e, d, f)
}

/// `c * range_basis * R1 + sqrt(1 - c^2) * null_basis * Q`.
fn coupled_block<T: Scalar>(
    rng: &mut InstanceRng,
    range_basis: &DMatrix<T>,
    null_basis: &DMatrix<T>,
    coupling: f64,
) -> DMatrix<T> {
    let r = range_basis.ncols();
    let k = null_basis.ncols();
    let mut r1 = gaussian_matrix::<T>(rng, r, k);
    let norm = r1.norm();
    if norm > 0.0 {
        r1 *= T::from_real((k as f64).sqrt() / norm);
    }
    let q = random_unitary::<T>(rng, k);
    let inside = mul(range_basis, &r1) * T::from_real(coupling);
    let outside = mul(null_basis, &q) * T::from_real((1.0 - coupling * coupling).sqrt());
    inside + outside
}

/// `r` values with `σ_1 = 1`, `σ_r = 1 / spread`, and the interior drawn
/// log-uniformly between them, sorted non-increasing.
fn log_uniform_spectrum(rng: &mut InstanceRng, r: usize, spread: f64) -> Vec<f64> {
    let log_spread = spread.ln();
    let mut exponents: Vec<f64> = (0..r)
        .map(|i| match i {
            0 => 0.0,
            i if i + 1 == r => 1.0,
            _ => rng.random::<f64>(),
        })
        .collect();
    exponents.sort_by(f64::total_cmp);
    exponents.into_iter().map(|t| (-t * log_spread).exp()).collect()
}

/// `k` values spaced geometrically from 1 to `1 / cond`.
fn log_spaced(k: usize, cond: f64) -> Vec<f64> {
    if k == 1 {
        return vec![1.0];
    }
    (0..k)
        .map(|i| (-(i as f64) / (k - 1) as f64 * cond.ln()).exp())
        .collect()
}

/// Standard normal entries; complex entries have independent real and
/// imaginary parts of variance 1/2.
pub fn gaussian_matrix<T: Scalar>(rng: &mut InstanceRng, rows: usize, cols: usize) -> DMatrix<T> {
    // Column-major fill keeps the draw order independent of nalgebra internals.
    let mut values = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let z = match T::FIELD {
            Field::Real => T::from_parts(rng.sample(StandardNormal), 0.0),
            Field::Complex => {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                T::from_parts(re * std::f64::consts::FRAC_1_SQRT_2, im * std::f64::consts::FRAC_1_SQRT_2)
            }
        };
        values.push(z);
    }
    DMatrix::from_vec(rows, cols, values)
}

/// Haar-distributed unitary (orthogonal for the real field): QR of a
/// Gaussian matrix with the phases of `diag(R)` folded back into `Q`.
pub fn random_unitary<T: Scalar>(rng: &mut InstanceRng, n: usize) -> DMatrix<T> {
    let qr = gaussian_matrix::<T>(rng, n, n).qr();
    let mut q = qr.q();
    let r = qr.r();
    for (j, mut c) in q.column_iter_mut().enumerate() {
        let rjj = r[(j, j)];
        let modulus = rjj.modulus();
        if modulus > 0.0 {
            c *= rjj.unscale(modulus);
        }
    }
    q
}

/// Random k x k matrix with singular values log-spaced from 1 to `1 / cond`.
pub fn random_with_condition<T: Scalar>(rng: &mut InstanceRng, k: usize, cond: f64) -> DMatrix<T> {
    let q1 = random_unitary::<T>(rng, k);
    let q2 = random_unitary::<T>(rng, k);
    let s = DVector::from_vec(log_spaced(k, cond));
    let mut scaled = q1;
    for (mut c, &sv) in scaled.column_iter_mut().zip(s.iter()) {
        c *= T::from_real(sv);
    }
    mul_adjoint(&scaled, &q2)
}

/// Random admissible `(u, v, M)` for the direct construction: `e` and `f`
/// tilted by Gaussian blocks of half their norm, and `M` with condition
/// number 4.
pub fn random_ansatz<T: Scalar>(problem: &RankModifiedProblem<T>, rng: &mut InstanceRng) -> Result<AnsatzParams<T>> {
    let (n, k) = (problem.n(), problem.k());
    let mut tilt = |base: &DMatrix<T>| {
        let noise = gaussian_matrix::<T>(rng, n, k);
        let scale = 0.5 * base.norm() / noise.norm();
        base + noise * T::from_real(scale)
    };
    let u = tilt(problem.e());
    let v = tilt(problem.f());
    let m = random_with_condition::<T>(rng, k, 4.0);
    AnsatzParams::new(problem, u, v, m)
}

/// Dense inverse of `A + e D f*` by LU with partial pivoting.
pub fn dense_inverse_oracle<T: Scalar>(problem: &RankModifiedProblem<T>) -> Result<DMatrix<T>> {
    lu_inverse(&problem.assemble())
        .map(|(inv, _)| inv)
        .ok_or(Error::OracleSingular)
}
