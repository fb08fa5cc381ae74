//! Explicit inverses of matrices `Ã = A + e D f*` where `A` (n x n) is
//! singular with rank n - k and the rank-k term `e D f*` supplies exactly
//! the missing rank.
//!
//! The inverse has the form `Ã^-1 = G + x D^-1 y*` with `G`, `x`, `y`
//! independent of `D`, so once they are known the inverse for any other
//! invertible core costs O(n^2 k). Two constructions are provided:
//!
//! * [`svd_path`] from a rank-split singular value decomposition of `A`;
//! * [`direct_path`] from `A`, `e`, `f` alone.
//!
//! [`identities`] checks the product relations the factors satisfy,
//! [`determinant`] the determinant lemma for the singular case, and
//! [`instances`] generates seeded test problems together with a dense LU
//! oracle.

mod backend;
pub mod dense;
pub mod determinant;
pub mod direct_path;
pub mod error;
pub mod identities;
pub mod instances;
pub mod problem;
pub mod scalar;
pub mod svd_path;

pub use error::{Error, Result};
pub use problem::{assemble_parts, default_rank_tol, validate, IdentityTolerance, RankModifiedProblem, StructuredInverse};
pub use scalar::{Field, Scalar};
pub use svd_path::{CompactSvd, SplitDiagnostics};

pub use num_complex::Complex64;
