use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: String,
        found: String,
    },

    #[error("rank of A is {detected}, need rank n - k with n > k >= 1 (n = {n}, k = {k})")]
    RankOfANotNMinusK { n: usize, k: usize, detected: usize },

    #[error("core matrix D is singular (smallest singular value {sigma_min:e} <= threshold {threshold:e})")]
    DSingular { sigma_min: f64, threshold: f64 },

    #[error("columns of e do not complete the column space of A (smallest singular value of Uk*e is {sigma_min:e}, threshold {threshold:e})")]
    SpanDeficientE { sigma_min: f64, threshold: f64 },

    #[error("columns of f do not complete the column space of A* (smallest singular value of f*Vk is {sigma_min:e}, threshold {threshold:e})")]
    SpanDeficientF { sigma_min: f64, threshold: f64 },

    #[error("pivot matrix {which} is numerically singular")]
    PivotSingular { which: &'static str },

    #[error("inner matrix of the direct construction is singular")]
    InnerMatrixSingular,

    #[error("dense LU oracle found the assembled matrix singular")]
    OracleSingular,

    #[error("singular value decomposition did not converge")]
    SvdNoConvergence,

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::RankOfANotNMinusK { .. } => "RankOfANotNMinusK",
            Error::DSingular { .. } => "DSingular",
            Error::SpanDeficientE { .. } => "SpanDeficientE",
            Error::SpanDeficientF { .. } => "SpanDeficientF",
            Error::PivotSingular { .. } => "PivotSingular",
            Error::InnerMatrixSingular => "InnerMatrixSingular",
            Error::OracleSingular => "OracleSingular",
            Error::SvdNoConvergence => "SvdNoConvergence",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::InvalidTolerance(_) => "InvalidTolerance",
        }
    }

    /// Whether the error comes from checking the hypotheses of a problem
    /// rather than from a numerical breakdown later on.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::RankOfANotNMinusK { .. }
                | Error::DSingular { .. }
                | Error::SpanDeficientE { .. }
                | Error::SpanDeficientF { .. }
        )
    }

    pub(crate) fn dims(what: &'static str, expected: (usize, usize), found: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            what,
            expected: format!("{}x{}", expected.0, expected.1),
            found: format!("{}x{}", found.0, found.1),
        }
    }
}
