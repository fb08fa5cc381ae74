//! The `invert`, `check`, `det` and `gen` subcommands. Each returns a JSON
//! report for standard output plus an exit code, or a [`CliError`].

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rankmod::dense::{cond2, rel_diff};
use rankmod::determinant::{compare_determinants, LogDet};
use rankmod::direct_path::{structured_inverse_direct_with_diagnostics, structured_inverse_general_with_diagnostics};
use rankmod::identities::{check_corollary, check_penrose, nullspace_difference_check, riedel_inverse};
use rankmod::instances::{generate, random_ansatz, rng_from_seed, GeneratorSpec};
use rankmod::svd_path::{pseudoinverse, structured_inverse_svd};
use rankmod::{validate, Complex64, Field, IdentityTolerance, RankModifiedProblem, Scalar, StructuredInverse};
use serde_json::{json, Value};

use crate::rmp::{FileError, RmpFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;
pub const EXIT_IDENTITY: i32 = 5;

/// Relative agreement required between two routes to the same matrix.
pub const PATH_AGREEMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub exit: i32,
    pub code: String,
    pub message: String,
}

impl CliError {
    pub fn parse(message: impl Into<String>) -> Self {
        Self {
            exit: EXIT_PARSE,
            code: "ParseError".into(),
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "error": self.code, "message": self.message, "exit_code": self.exit })
    }
}

impl From<FileError> for CliError {
    fn from(err: FileError) -> Self {
        CliError::parse(err.to_string())
    }
}

impl From<rankmod::Error> for CliError {
    fn from(err: rankmod::Error) -> Self {
        let exit = match &err {
            rankmod::Error::InvalidSpec(_) | rankmod::Error::InvalidTolerance(_) => EXIT_PARSE,
            e if e.is_validation() => EXIT_VALIDATION,
            _ => EXIT_NUMERICAL,
        };
        Self {
            exit,
            code: err.code().into(),
            message: err.to_string(),
        }
    }
}

/// A successful run: the report and the exit code to finish with.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub exit: i32,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Self { report, exit: EXIT_OK }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InversePath {
    Svd,
    Direct,
    General,
}

impl InversePath {
    pub fn name(self) -> &'static str {
        match self {
            InversePath::Svd => "svd",
            InversePath::Direct => "direct",
            InversePath::General => "general",
        }
    }
}

impl std::str::FromStr for InversePath {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "svd" => Ok(InversePath::Svd),
            "direct" => Ok(InversePath::Direct),
            "general" => Ok(InversePath::General),
            other => Err(format!("unknown path `{other}` (expected svd, direct or general)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct InvertOptions {
    pub input: PathBuf,
    pub path: InversePath,
    pub out: Option<PathBuf>,
    pub tol_rank: Option<f64>,
    /// Seed for the random `(u, v, M)` of the general path.
    pub seed: u64,
}

pub fn cmd_invert(opts: &InvertOptions) -> Result<Outcome, CliError> {
    let file = RmpFile::read(&opts.input)?;
    match file.field {
        Field::Real => invert_typed::<f64>(&file, opts),
        Field::Complex => invert_typed::<Complex64>(&file, opts),
    }
}

fn load_problem<T: Scalar>(file: &RmpFile, tol_rank: Option<f64>) -> Result<RankModifiedProblem<T>, CliError> {
    let raw = file.raw_problem::<T>()?;
    let tol = tol_rank.unwrap_or_else(|| rankmod::default_rank_tol(file.n));
    Ok(validate(raw.a, raw.e, raw.d, raw.f, tol)?)
}

/// Builds the structured inverse along `path`; the second value is the
/// condition number of the inner matrix for the SVD-free paths.
pub fn build_inverse<T: Scalar>(
    problem: &RankModifiedProblem<T>,
    path: InversePath,
    seed: u64,
) -> rankmod::Result<(StructuredInverse<T>, Option<f64>)> {
    match path {
        InversePath::Svd => structured_inverse_svd(problem).map(|inv| (inv, None)),
        InversePath::Direct => {
            structured_inverse_direct_with_diagnostics(problem).map(|(inv, d)| (inv, Some(d.inner_condition)))
        }
        InversePath::General => {
            let params = random_ansatz(problem, &mut rng_from_seed(seed))?;
            structured_inverse_general_with_diagnostics(problem, &params).map(|(inv, d)| (inv, Some(d.inner_condition)))
        }
    }
}

fn invert_typed<T: Scalar>(file: &RmpFile, opts: &InvertOptions) -> Result<Outcome, CliError> {
    let problem = load_problem::<T>(file, opts.tol_rank)?;
    let (inv, inner_condition) = build_inverse(&problem, opts.path, opts.seed)?;
    let dense = inv.reassemble_inverse(problem.d())?;

    let atilde = problem.assemble();
    let id = DMatrix::<T>::identity(problem.n(), problem.n());
    let residual = (rankmod::scalar::mul(&atilde, &dense) - &id).norm();
    let residual_left = (rankmod::scalar::mul(&dense, &atilde) - &id).norm();

    let reference = match opts.path {
        InversePath::Svd => InversePath::Direct,
        _ => InversePath::Svd,
    };
    let agreement = match build_inverse(&problem, reference, opts.seed) {
        Ok((other, _)) => {
            let g = rel_diff(inv.g(), other.g());
            let x = rel_diff(inv.x(), other.x());
            let y = rel_diff(inv.y(), other.y());
            json!({
                "reference_path": reference.name(),
                "g_rel_diff": g,
                "x_rel_diff": x,
                "y_rel_diff": y,
                "agree": g.max(x).max(y) <= PATH_AGREEMENT_TOL,
            })
        }
        Err(err) => json!({ "reference_path": reference.name(), "error": err.code() }),
    };

    if let Some(out) = &opts.out {
        RmpFile::from_problem(&problem).with_inverse(&inv, Some(&dense)).write(out)?;
    }

    Ok(Outcome::ok(json!({
        "command": "invert",
        "path": opts.path.name(),
        "field": T::FIELD,
        "n": problem.n(),
        "k": problem.k(),
        "residual": residual,
        "residual_left": residual_left,
        "cond_atilde": cond2(&atilde),
        "diagnostics": {
            "split": problem.diagnostics(),
            "inner_condition": inner_condition,
        },
        "agreement": agreement,
        "out": opts.out.as_deref().map(Path::display).map(|d| d.to_string()),
    })))
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub input: PathBuf,
    pub tol: IdentityTolerance,
    pub tol_rank: Option<f64>,
}

pub fn cmd_check(opts: &CheckOptions) -> Result<Outcome, CliError> {
    let file = RmpFile::read(&opts.input)?;
    match file.field {
        Field::Real => check_typed::<f64>(&file, opts),
        Field::Complex => check_typed::<Complex64>(&file, opts),
    }
}

fn check_typed<T: Scalar>(file: &RmpFile, opts: &CheckOptions) -> Result<Outcome, CliError> {
    let problem = load_problem::<T>(file, opts.tol_rank)?;
    let (inv, source) = match file.stored_inverse::<T>()? {
        Some((g, x, y)) => (StructuredInverse::from_parts(g, x, y)?, "stored"),
        None => (structured_inverse_svd(&problem)?, "svd"),
    };
    let tol = &opts.tol;

    let corollary = check_corollary(&problem, &inv, tol)?;
    let penrose = check_penrose(problem.a(), inv.g(), tol)?;
    let a_plus = pseudoinverse(problem.svd());
    let penrose_pinv = check_penrose(problem.a(), &a_plus, tol)?;
    let nullspace = nullspace_difference_check(&problem, tol)?;
    let riedel = riedel_inverse(&problem)?;
    let riedel_diff = rel_diff(&riedel, &inv.reassemble_inverse(problem.d())?);
    let riedel_pass = riedel_diff <= PATH_AGREEMENT_TOL;

    let all_pass =
        corollary.all_pass() && penrose.reflexive() && penrose_pinv.moore_penrose() && nullspace.pass && riedel_pass;

    Ok(Outcome {
        report: json!({
            "command": "check",
            "field": T::FIELD,
            "n": problem.n(),
            "k": problem.k(),
            "inverse_source": source,
            "tolerance": tol,
            "identities": corollary,
            "penrose": {
                "G": penrose,
                "G_reflexive": penrose.reflexive(),
                "G_is_moore_penrose": penrose.moore_penrose(),
                "pseudoinverse": penrose_pinv,
            },
            "nullspace_difference": nullspace,
            "riedel": { "relative_difference": riedel_diff, "pass": riedel_pass },
            "all_pass": all_pass,
        }),
        exit: if all_pass { EXIT_OK } else { EXIT_IDENTITY },
    })
}

#[derive(Debug, Clone)]
pub struct DetOptions {
    pub input: PathBuf,
    pub tol_rank: Option<f64>,
}

pub fn cmd_det(opts: &DetOptions) -> Result<Outcome, CliError> {
    let file = RmpFile::read(&opts.input)?;
    match file.field {
        Field::Real => det_typed::<f64>(&file, opts),
        Field::Complex => det_typed::<Complex64>(&file, opts),
    }
}

fn scalar_json<T: Scalar>(ld: &LogDet<T>) -> Value {
    match ld.value() {
        None => Value::Null,
        Some(v) => match T::FIELD {
            Field::Real => json!(v.parts().0),
            Field::Complex => {
                let (re, im) = v.parts();
                json!([re, im])
            }
        },
    }
}

fn det_typed<T: Scalar>(file: &RmpFile, opts: &DetOptions) -> Result<Outcome, CliError> {
    let problem = load_problem::<T>(file, opts.tol_rank)?;
    let inv = structured_inverse_svd(&problem)?;
    let (cmp, [lemma, dense, inverse]) = compare_determinants(&problem, &inv)?;
    Ok(Outcome::ok(json!({
        "command": "det",
        "field": T::FIELD,
        "n": problem.n(),
        "k": problem.k(),
        "det_lemma": scalar_json(&lemma),
        "det_dense": scalar_json(&dense),
        "det_inverse_lemma": scalar_json(&inverse),
        "relative_gap": cmp.relative_gap,
        "reciprocal_gap": cmp.reciprocal_gap,
        "log_abs": {
            "lemma": cmp.log_abs_lemma,
            "dense": cmp.log_abs_dense,
            "inverse_lemma": cmp.log_abs_inverse_lemma,
        },
    })))
}

/// Generates the problem described by `spec` as an RMP file.
pub fn gen_file(spec: &GeneratorSpec) -> Result<RmpFile, CliError> {
    spec.check()?;
    Ok(match spec.field {
        Field::Real => RmpFile::from_problem(&generate::<f64>(spec)?),
        Field::Complex => RmpFile::from_problem(&generate::<Complex64>(spec)?),
    })
}

/// Writes the generated file to `out`, or returns its text for standard
/// output when no path is given.
pub fn cmd_gen(spec: &GeneratorSpec, out: Option<&Path>) -> Result<Outcome, CliError> {
    let file = gen_file(spec)?;
    match out {
        Some(path) => {
            file.write(path)?;
            Ok(Outcome::ok(json!({
                "command": "gen",
                "spec": spec,
                "out": path.display().to_string(),
                "sha256": crate::bench::sha256_hex(file.to_json().as_bytes()),
            })))
        }
        None => Ok(Outcome::ok(serde_json::to_value(&file).expect("RMP files always serialize"))),
    }
}
