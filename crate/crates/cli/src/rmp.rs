//! RMP problem files: JSON with `version` (always 1), `field`, `n`, `k` and
//! dense row-major arrays `A`, `e`, `D`, `f`. Complex entries are written as
//! `[re, im]` pairs. A structured inverse may be stored alongside in `G`,
//! `x`, `y`, and the dense inverse in `inverse`.

use std::path::Path;

use nalgebra::DMatrix;
use rankmod::{Field, RankModifiedProblem, Scalar, StructuredInverse};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const VERSION: u32 = 1;

/// Row-major matrix payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entries {
    Real(Vec<f64>),
    Complex(Vec<[f64; 2]>),
}

impl Entries {
    pub fn len(&self) -> usize {
        match self {
            Entries::Real(v) => v.len(),
            Entries::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn from_matrix<T: Scalar>(m: &DMatrix<T>) -> Self {
        // DMatrix is column-major; the file is row-major.
        let rows = (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| (i, j)));
        match T::FIELD {
            Field::Real => Entries::Real(rows.map(|(i, j)| m[(i, j)].parts().0).collect()),
            Field::Complex => Entries::Complex(
                rows.map(|(i, j)| {
                    let (re, im) = m[(i, j)].parts();
                    [re, im]
                })
                .collect(),
            ),
        }
    }

    fn to_matrix<T: Scalar>(&self, name: &'static str, rows: usize, cols: usize) -> Result<DMatrix<T>, FileError> {
        if self.len() != rows * cols {
            return Err(FileError::Shape {
                name,
                expected: rows * cols,
                found: self.len(),
            });
        }
        let values: Vec<T> = match (self, T::FIELD) {
            (Entries::Real(v), Field::Real) => v.iter().map(|&re| T::from_parts(re, 0.0)).collect(),
            (Entries::Complex(v), Field::Complex) => v.iter().map(|&[re, im]| T::from_parts(re, im)).collect(),
            // An empty array deserializes as real; accept it for either field.
            (Entries::Real(v), Field::Complex) if v.is_empty() => Vec::new(),
            _ => return Err(FileError::FieldMismatch { name }),
        };
        Ok(DMatrix::from_row_slice(rows, cols, &values))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RmpFile {
    pub version: u32,
    pub field: Field,
    pub n: usize,
    pub k: usize,
    #[serde(rename = "A")]
    pub a: Entries,
    pub e: Entries,
    #[serde(rename = "D")]
    pub d: Entries,
    pub f: Entries,
    #[serde(rename = "G", default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Entries>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Entries>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Entries>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse: Option<Entries>,
}

/// Raw matrices read from a file, before validation.
#[derive(Debug, Clone)]
pub struct RawProblem<T: Scalar> {
    pub a: DMatrix<T>,
    pub e: DMatrix<T>,
    pub d: DMatrix<T>,
    pub f: DMatrix<T>,
}

impl RmpFile {
    pub fn from_problem<T: Scalar>(problem: &RankModifiedProblem<T>) -> Self {
        Self {
            version: VERSION,
            field: T::FIELD,
            n: problem.n(),
            k: problem.k(),
            a: Entries::from_matrix(problem.a()),
            e: Entries::from_matrix(problem.e()),
            d: Entries::from_matrix(problem.d()),
            f: Entries::from_matrix(problem.f()),
            g: None,
            x: None,
            y: None,
            inverse: None,
        }
    }

    pub fn with_inverse<T: Scalar>(mut self, inv: &StructuredInverse<T>, dense: Option<&DMatrix<T>>) -> Self {
        self.g = Some(Entries::from_matrix(inv.g()));
        self.x = Some(Entries::from_matrix(inv.x()));
        self.y = Some(Entries::from_matrix(inv.y()));
        self.inverse = dense.map(Entries::from_matrix);
        self
    }

    pub fn parse(text: &str) -> Result<Self, FileError> {
        let file: RmpFile = serde_json::from_str(text).map_err(|e| FileError::Json(e.to_string()))?;
        if file.version != VERSION {
            return Err(FileError::Version(file.version));
        }
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self, FileError> {
        let text = std::fs::read_to_string(path).map_err(|e| FileError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("RMP files always serialize");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<(), FileError> {
        std::fs::write(path, self.to_json()).map_err(|e| FileError::Io(format!("{}: {e}", path.display())))
    }

    /// Decodes the problem matrices, checking every array length.
    pub fn raw_problem<T: Scalar>(&self) -> Result<RawProblem<T>, FileError> {
        self.check_field::<T>()?;
        let (n, k) = (self.n, self.k);
        Ok(RawProblem {
            a: self.a.to_matrix("A", n, n)?,
            e: self.e.to_matrix("e", n, k)?,
            d: self.d.to_matrix("D", k, k)?,
            f: self.f.to_matrix("f", n, k)?,
        })
    }

    /// The stored `(G, x, y)`, if all three are present.
    pub fn stored_inverse<T: Scalar>(&self) -> Result<Option<(DMatrix<T>, DMatrix<T>, DMatrix<T>)>, FileError> {
        self.check_field::<T>()?;
        let (n, k) = (self.n, self.k);
        match (&self.g, &self.x, &self.y) {
            (Some(g), Some(x), Some(y)) => Ok(Some((
                g.to_matrix("G", n, n)?,
                x.to_matrix("x", n, k)?,
                y.to_matrix("y", n, k)?,
            ))),
            (None, None, None) => Ok(None),
            _ => Err(FileError::PartialInverse),
        }
    }

    fn check_field<T: Scalar>(&self) -> Result<(), FileError> {
        if self.field != T::FIELD {
            return Err(FileError::FieldMismatch { name: "field" });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FileError {
    #[error("cannot access file: {0}")]
    Io(String),
    #[error("malformed RMP JSON: {0}")]
    Json(String),
    #[error("unsupported RMP version {0} (expected 1)")]
    Version(u32),
    #[error("array {name} has {found} entries, expected {expected}")]
    Shape {
        name: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("entries of {name} do not match the declared field")]
    FieldMismatch { name: &'static str },
    #[error("G, x and y must be stored together")]
    PartialInverse,
}
