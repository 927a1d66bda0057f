//! Symmetric matrices under the Frobenius metric: graph Laplacians and
//! covariance matrices.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SYMMETRY_TOLERANCE: f64 = 1e-10;
pub const KIND_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Laplacian,
    Covariance,
    Free,
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatrixKind::Laplacian => "laplacian",
            MatrixKind::Covariance => "covariance",
            MatrixKind::Free => "free",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrixPoint {
    entries: DMatrix<f64>,
    kind: MatrixKind,
}

impl SymmetricMatrixPoint {
    pub fn new(entries: DMatrix<f64>, kind: MatrixKind) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::InvalidPoint {
                rule: format!("matrix is {}x{}, not square", entries.nrows(), entries.ncols()),
            });
        }
        if entries.nrows() == 0 {
            return Err(Error::EmptyInput);
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidPoint {
                rule: "matrix entries must be finite".into(),
            });
        }
        let m = entries.nrows();
        for j in 0..m {
            for k in (j + 1)..m {
                if (entries[(j, k)] - entries[(k, j)]).abs() > SYMMETRY_TOLERANCE {
                    return Err(Error::InvalidPoint {
                        rule: format!("matrix is not symmetric at ({j}, {k})"),
                    });
                }
            }
        }
        if let Some(rule) = kind_violation(&entries, kind) {
            return Err(Error::InvalidPoint { rule });
        }
        Ok(Self { entries, kind })
    }

    /// Builds from rows; see [`SymmetricMatrixPoint::new`] for validation.
    pub fn from_rows(rows: &[Vec<f64>], kind: MatrixKind) -> Result<Self> {
        let m = rows.len();
        if let Some((j, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != m) {
            return Err(Error::InvalidPoint {
                rule: format!("row {j} has {} entries, expected {m}", row.len()),
            });
        }
        Self::new(DMatrix::from_fn(m, m, |j, k| rows[j][k]), kind)
    }

    /// 1×1 matrix; the scalar special case.
    pub fn scalar(value: f64) -> Result<Self> {
        Self::new(DMatrix::from_element(1, 1, value), MatrixKind::Free)
    }

    pub fn zeros(m: usize, kind: MatrixKind) -> Self {
        Self {
            entries: DMatrix::zeros(m, m),
            kind,
        }
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    /// Reinterprets the matrix under another kind, re-validating.
    pub fn with_kind(self, kind: MatrixKind) -> Result<Self> {
        Self::new(self.entries, kind)
    }

    /// Wraps an arithmetic result, falling back to `Free` when the requested
    /// kind's constraints fail. Returns the violated rule alongside.
    pub(crate) fn from_arithmetic(entries: DMatrix<f64>, kind: MatrixKind) -> (Self, Option<String>) {
        // symmetrise away rounding asymmetry
        let entries = (&entries + entries.transpose()) * 0.5;
        match kind_violation(&entries, kind) {
            None => (Self { entries, kind }, None),
            Some(rule) => (
                Self {
                    entries,
                    kind: MatrixKind::Free,
                },
                Some(rule),
            ),
        }
    }
}

fn kind_violation(entries: &DMatrix<f64>, kind: MatrixKind) -> Option<String> {
    let m = entries.nrows();
    match kind {
        MatrixKind::Free => None,
        MatrixKind::Laplacian => {
            for j in 0..m {
                let row_sum: f64 = entries.row(j).sum();
                if row_sum.abs() > KIND_TOLERANCE {
                    return Some(format!("Laplacian row {j} sums to {row_sum}"));
                }
                for k in 0..m {
                    if j != k && entries[(j, k)] > KIND_TOLERANCE {
                        return Some(format!(
                            "Laplacian off-diagonal ({j}, {k}) = {} is positive",
                            entries[(j, k)]
                        ));
                    }
                }
            }
            None
        }
        MatrixKind::Covariance => {
            let min_eig = entries
                .clone()
                .symmetric_eigenvalues()
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            (min_eig < -KIND_TOLERANCE)
                .then(|| format!("covariance has negative eigenvalue {min_eig}"))
        }
    }
}

fn check_sizes(a: &SymmetricMatrixPoint, b: &SymmetricMatrixPoint) -> Result<()> {
    if a.size() != b.size() {
        return Err(Error::DimensionMismatch {
            expected: a.size(),
            found: b.size(),
        });
    }
    Ok(())
}

fn common_kind(a: MatrixKind, b: MatrixKind) -> MatrixKind {
    if a == b {
        a
    } else {
        MatrixKind::Free
    }
}

/// `‖a − b‖_F`.
pub fn frobenius_distance(a: &SymmetricMatrixPoint, b: &SymmetricMatrixPoint) -> Result<f64> {
    check_sizes(a, b)?;
    Ok((&a.entries - &b.entries).norm())
}

/// Line segment `a + t (b − a)`.
pub fn interpolate(a: &SymmetricMatrixPoint, b: &SymmetricMatrixPoint, t: f64) -> Result<SymmetricMatrixPoint> {
    check_sizes(a, b)?;
    if t == 0.0 {
        return Ok(a.clone());
    }
    if t == 1.0 {
        return Ok(b.clone());
    }
    let entries = &a.entries * (1.0 - t) + &b.entries * t;
    Ok(SymmetricMatrixPoint::from_arithmetic(entries, common_kind(a.kind, b.kind)).0)
}

/// Outcome of [`matrix_transport`]; `kind_violation` names the rule the
/// result broke, in which case it is returned with kind `Free`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixTransport {
    pub point: SymmetricMatrixPoint,
    pub kind_violation: Option<(MatrixKind, String)>,
}

/// `ω + (β − α)`.
pub fn matrix_transport(
    alpha: &SymmetricMatrixPoint,
    beta: &SymmetricMatrixPoint,
    omega: &SymmetricMatrixPoint,
) -> Result<MatrixTransport> {
    check_sizes(alpha, beta)?;
    check_sizes(alpha, omega)?;
    let entries = &omega.entries + (&beta.entries - &alpha.entries);
    let kind = omega.kind;
    let (point, violation) = SymmetricMatrixPoint::from_arithmetic(entries, kind);
    Ok(MatrixTransport {
        point,
        kind_violation: violation.map(|rule| (kind, rule)),
    })
}

/// `L = D − W` for a weighted adjacency matrix.
pub fn laplacian_from_adjacency(weights: &DMatrix<f64>) -> Result<SymmetricMatrixPoint> {
    let m = weights.nrows();
    if weights.ncols() != m {
        return Err(Error::InvalidPoint {
            rule: "adjacency matrix is not square".into(),
        });
    }
    for j in 0..m {
        if weights[(j, j)] != 0.0 {
            return Err(Error::InvalidPoint {
                rule: format!("adjacency diagonal ({j}, {j}) is nonzero"),
            });
        }
        for k in 0..m {
            let w = weights[(j, k)];
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidPoint {
                    rule: format!("edge weight ({j}, {k}) = {w} is not a nonnegative number"),
                });
            }
            if w != weights[(k, j)] {
                return Err(Error::InvalidPoint {
                    rule: format!("adjacency matrix is not symmetric at ({j}, {k})"),
                });
            }
        }
    }
    let mut lap = -weights.clone();
    for j in 0..m {
        lap[(j, j)] = weights.row(j).sum();
    }
    SymmetricMatrixPoint::new(lap, MatrixKind::Laplacian)
}
