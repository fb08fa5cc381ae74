//! Timing harness for the D-swap update: one-time construction of
//! `(G, x, y)`, reassembly for a fresh core, and dense LU of the fresh
//! completed matrix. A Woodbury update on the shifted, invertible `A + sI`
//! is timed alongside for context.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rankmod::dense::{lu_inverse, pivot_inverse};
use rankmod::direct_path::structured_inverse_direct;
use rankmod::instances::{generate, random_ansatz, random_with_condition, rng_from_seed, GeneratorSpec};
use rankmod::scalar::{adjoint_mul, mul, mul_adjoint};
use rankmod::svd_path::{compact_svd, structured_inverse_from_svd};
use rankmod::{assemble_parts, Complex64, Field, RankModifiedProblem, Scalar};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::commands::{CliError, Outcome, EXIT_OK};
use crate::rmp::RmpFile;

/// Below this reassembly speedup the verdict is `fail`.
pub const FAIL_BELOW: f64 = 2.0;
/// Below this reassembly speedup the verdict is `warn`.
pub const WARN_BELOW: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchOptions {
    pub spec: GeneratorSpec,
    pub repeats: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Ok,
    Warn,
    Fail,
}

impl Verdict {
    pub fn from_speedup(speedup: f64) -> Self {
        if speedup < FAIL_BELOW {
            Verdict::Fail
        } else if speedup < WARN_BELOW {
            Verdict::Warn
        } else {
            Verdict::Ok
        }
    }
}

/// Median of the samples in seconds, plus the sample count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timing {
    pub median_s: f64,
    pub samples: usize,
}

impl Timing {
    fn from_samples(mut samples: Vec<Duration>) -> Self {
        samples.sort();
        let n = samples.len();
        let median = if n % 2 == 1 {
            samples[n / 2].as_secs_f64()
        } else {
            0.5 * (samples[n / 2 - 1].as_secs_f64() + samples[n / 2].as_secs_f64())
        };
        Self {
            median_s: median,
            samples: n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub n: usize,
    pub k: usize,
    pub field: Field,
    pub seed: u64,
    pub repeats: usize,
    pub problem_sha256: String,
    pub construct_svd: Timing,
    pub construct_direct: Timing,
    pub construct_general: Timing,
    pub reassemble: Timing,
    pub dense_lu: Timing,
    pub woodbury_shifted: Timing,
    pub woodbury_shift: f64,
    /// Dense LU time over reassembly time.
    pub speedup: f64,
    pub residual_reassemble: f64,
    pub residual_dense_lu: f64,
    pub residual_woodbury: f64,
    pub verdict: Verdict,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn time<R>(f: impl FnOnce() -> R) -> (Duration, R) {
    let start = Instant::now();
    let out = f();
    (start.elapsed(), out)
}

fn residual<T: Scalar>(m: &DMatrix<T>, inv: &DMatrix<T>) -> f64 {
    let n = m.nrows();
    (mul(m, inv) - DMatrix::<T>::identity(n, n)).norm()
}

pub fn run_bench(opts: &BenchOptions) -> Result<BenchReport, CliError> {
    opts.spec.check()?;
    if opts.repeats == 0 {
        return Err(rankmod::Error::InvalidSpec("repeats must be at least 1".into()).into());
    }
    match opts.spec.field {
        Field::Real => bench_typed::<f64>(opts),
        Field::Complex => bench_typed::<Complex64>(opts),
    }
}

fn bench_typed<T: Scalar>(opts: &BenchOptions) -> Result<BenchReport, CliError> {
    let spec = &opts.spec;
    let problem: RankModifiedProblem<T> = generate(spec)?;
    let sha = sha256_hex(RmpFile::from_problem(&problem).to_json().as_bytes());
    let (a, e, f) = (problem.a(), problem.e(), problem.f());
    let n = problem.n();
    let tol = problem.tol_rank();

    let mut svd_samples = Vec::with_capacity(opts.repeats);
    let mut direct_samples = Vec::with_capacity(opts.repeats);
    let mut general_samples = Vec::with_capacity(opts.repeats);
    let mut inv = None;
    for i in 0..opts.repeats {
        let (t, built) = time(|| compact_svd(a, tol).and_then(|svd| structured_inverse_from_svd(&svd, e, f)));
        svd_samples.push(t);
        inv = Some(built?);
        let (t, built) = time(|| structured_inverse_direct(&problem));
        direct_samples.push(t);
        built?;
        let mut rng = rng_from_seed(spec.seed.wrapping_add(i as u64));
        let (t, built) = time(|| {
            random_ansatz(&problem, &mut rng)
                .and_then(|params| rankmod::direct_path::structured_inverse_general(&problem, &params))
        });
        general_samples.push(t);
        built?;
    }
    let inv = inv.expect("at least one repeat");

    // Woodbury on A + sI; the shift is the largest singular value of A.
    let shift = problem.svd().singular_values[0];
    let shifted = a + DMatrix::<T>::identity(n, n) * T::from_real(shift);
    let (shifted_inv, _) = lu_inverse(&shifted).ok_or(rankmod::Error::OracleSingular)?;
    let left = mul(&shifted_inv, e);
    let right = adjoint_mul(f, &shifted_inv);
    let small = adjoint_mul(f, &left);

    let mut rng = rng_from_seed(spec.seed ^ 0x5eed);
    let mut reassemble_samples = Vec::with_capacity(opts.repeats);
    let mut lu_samples = Vec::with_capacity(opts.repeats);
    let mut woodbury_samples = Vec::with_capacity(opts.repeats);
    let mut residuals = (0.0, 0.0, 0.0);
    for _ in 0..opts.repeats {
        let d = random_with_condition::<T>(&mut rng, problem.k(), spec.d_cond);
        let atilde = assemble_parts(a, e, &d, f);

        let (t, fast) = time(|| inv.reassemble_inverse(&d));
        reassemble_samples.push(t);
        let fast = fast?;

        let (t, dense) = time(|| lu_inverse(&atilde));
        lu_samples.push(t);
        let (dense, _) = dense.ok_or(rankmod::Error::OracleSingular)?;

        let (t, woodbury) = time(|| -> rankmod::Result<DMatrix<T>> {
            let core = pivot_inverse(&d, "D", rankmod::dense::default_singular_tol(d.nrows()))? + &small;
            let core_inv = pivot_inverse(&core, "Woodbury core", rankmod::dense::default_singular_tol(d.nrows()))?;
            Ok(&shifted_inv - mul(&mul(&left, &core_inv), &right))
        });
        woodbury_samples.push(t);
        let woodbury = woodbury?;

        let shifted_tilde = &shifted + mul_adjoint(&mul(e, &d), f);
        residuals = (
            residual(&atilde, &fast),
            residual(&atilde, &dense),
            residual(&shifted_tilde, &woodbury),
        );
    }

    let reassemble = Timing::from_samples(reassemble_samples);
    let dense_lu = Timing::from_samples(lu_samples);
    let speedup = dense_lu.median_s / reassemble.median_s.max(f64::MIN_POSITIVE);

    Ok(BenchReport {
        n,
        k: problem.k(),
        field: T::FIELD,
        seed: spec.seed,
        repeats: opts.repeats,
        problem_sha256: sha,
        construct_svd: Timing::from_samples(svd_samples),
        construct_direct: Timing::from_samples(direct_samples),
        construct_general: Timing::from_samples(general_samples),
        reassemble,
        dense_lu,
        woodbury_shifted: Timing::from_samples(woodbury_samples),
        woodbury_shift: shift,
        speedup,
        residual_reassemble: residuals.0,
        residual_dense_lu: residuals.1,
        residual_woodbury: residuals.2,
        verdict: Verdict::from_speedup(speedup),
    })
}

/// The verdict is informational; the command succeeds whenever the timings
/// were collected.
pub fn cmd_bench(opts: &BenchOptions) -> Result<Outcome, CliError> {
    let report = run_bench(opts)?;
    let mut value: Value = serde_json::to_value(&report).expect("reports always serialize");
    value["command"] = json!("bench");
    Ok(Outcome {
        report: value,
        exit: EXIT_OK,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_thresholds() {
        assert_eq!(Verdict::from_speedup(1.9), Verdict::Fail);
        assert_eq!(Verdict::from_speedup(2.0), Verdict::Warn);
        assert_eq!(Verdict::from_speedup(4.99), Verdict::Warn);
        assert_eq!(Verdict::from_speedup(5.0), Verdict::Ok);
    }

    #[test]
    fn median_of_even_and_odd_counts() {
        let ms = |v: &[u64]| v.iter().map(|&x| Duration::from_millis(x)).collect::<Vec<_>>();
        assert_eq!(Timing::from_samples(ms(&[3, 1, 2])).median_s, 0.002);
        assert_eq!(Timing::from_samples(ms(&[4, 1, 3, 2])).median_s, 0.0025);
    }

    #[test]
    fn small_bench_reports_positive_timings() {
        let report = run_bench(&BenchOptions {
            spec: GeneratorSpec::new(50, 1, 0),
            repeats: 3,
        })
        .unwrap();
        assert!(report.reassemble.median_s > 0.0 && report.dense_lu.median_s > 0.0);
        assert!(report.construct_svd.median_s > 0.0);
        assert_eq!(report.reassemble.samples, 3);
        assert!(report.residual_reassemble < 1e-10);
        assert!(report.residual_dense_lu < 1e-10);
        assert!(report.residual_woodbury < 1e-10);
    }

    #[test]
    fn zero_repeats_is_rejected() {
        let err = run_bench(&BenchOptions {
            spec: GeneratorSpec::new(10, 1, 0),
            repeats: 0,
        })
        .unwrap_err();
        assert_eq!(err.exit, crate::commands::EXIT_PARSE);
    }
}
