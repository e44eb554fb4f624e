//! Dense symmetric-matrix primitives: eigendecomposition, adjugate,
//! definiteness tests, square roots, and the diagonal perturbation that
//! separates repeated nonzero eigenvalues.

mod dense;
mod eigen;
mod perturb;

pub use dense::{Lu, Matrix};
pub use eigen::{sym_eigen, EigenDecomposition};
pub use perturb::{nonzero_eigenvalue_gap, perturb_to_simple_eigenvalues, Perturbation};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative threshold below which an eigenvalue counts as zero.
pub const ZERO_EIGENVALUE_REL: f64 = 1e-10;

/// Absolute eigenvalue threshold used for "zero" decisions on `a`:
/// `|λ| ≤ 1e-10·max(1, ‖A‖_max)`.
pub fn zero_threshold(a: &SymMatrix) -> f64 {
    ZERO_EIGENVALUE_REL * a.max_abs().max(1.0)
}

/// A real symmetric matrix. Symmetry is exact and checked on construction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    /// Validates exact symmetry and finiteness.
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                found: m.cols(),
            });
        }
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                if !m[(i, j)].is_finite() {
                    return Err(Error::NonFinite(i, j));
                }
            }
        }
        for i in 0..m.rows() {
            for j in i + 1..m.cols() {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::NotSymmetric(i, j));
                }
            }
        }
        Ok(SymMatrix(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    /// Takes the average `(M + Mᵀ)/2`; used for products that are symmetric
    /// in exact arithmetic.
    pub fn symmetrize(m: &Matrix) -> Self {
        assert!(m.is_square());
        SymMatrix(Matrix::from_fn(m.rows(), m.cols(), |i, j| {
            if i == j {
                m[(i, i)]
            } else {
                0.5 * (m[(i, j)] + m[(j, i)])
            }
        }))
    }

    /// Builds from the upper triangle `f(i, j)` with `i ≤ j`.
    pub fn from_upper(m: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut out = Matrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let x = f(i, j);
                out[(i, j)] = x;
                out[(j, i)] = x;
            }
        }
        SymMatrix(out)
    }

    pub fn identity(m: usize) -> Self {
        SymMatrix(Matrix::identity(m))
    }

    pub fn diagonal(d: &[f64]) -> Self {
        SymMatrix(Matrix::from_diagonal(d))
    }

    /// Side length.
    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        self.0.max_abs()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0.to_rows()
    }

    /// `D·A·D` for a diagonal scaling.
    pub fn congruent(&self, d: &DiagonalScaling) -> SymMatrix {
        SymMatrix(self.0.scale_both(&d.0))
    }

    pub fn add_identity(&self, t: f64) -> SymMatrix {
        let mut m = self.0.clone();
        for i in 0..m.rows() {
            m[(i, i)] += t;
        }
        SymMatrix(m)
    }
}

impl std::ops::Index<(usize, usize)> for SymMatrix {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

impl<'de> Deserialize<'de> for SymMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let m = Matrix::deserialize(de)?;
        SymMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

/// Positive diagonal matrix `D`, stored as its diagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalScaling(Vec<f64>);

impl DiagonalScaling {
    pub fn new(d: Vec<f64>) -> Result<Self> {
        if let Some(bad) = d.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "diagonal scaling entries must be positive, found {bad}"
            )));
        }
        Ok(DiagonalScaling(d))
    }

    pub fn identity(m: usize) -> Self {
        DiagonalScaling(vec![1.0; m])
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    /// `max_i |d_i − 1|`.
    pub fn distance_to_identity(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, d| m.max((d - 1.0).abs()))
    }
}

/// Classical determinant via partial-pivot LU.
pub fn determinant(a: &SymMatrix) -> f64 {
    a.as_matrix().determinant()
}

/// Transpose of the cofactor matrix, `A·ad(A) = det(A)·Id`. Defined for
/// singular `A`.
pub fn adjugate(a: &SymMatrix) -> SymMatrix {
    let m = a.dim();
    if m == 0 {
        return a.clone();
    }
    if m == 1 {
        return SymMatrix::identity(1);
    }
    if m > 4 {
        let lu = a.as_matrix().lu();
        let det = lu.determinant();
        if det.abs() >= 1e-10 {
            if let Ok(inv) = lu.inverse() {
                return SymMatrix::symmetrize(&inv.scale(det));
            }
        }
    }
    cofactor_adjugate(a.as_matrix())
}

fn cofactor_adjugate(a: &Matrix) -> SymMatrix {
    let m = a.rows();
    // ad(A)[i][j] = (-1)^(i+j) · det(A without row j, column i)
    let adj = Matrix::from_fn(m, m, |i, j| {
        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        sign * a.without(j, i).determinant()
    });
    SymMatrix::symmetrize(&adj)
}

/// True iff the smallest eigenvalue exceeds `tol`.
pub fn is_positive_definite(a: &SymMatrix, tol: f64) -> Result<bool> {
    Ok(sym_eigen(a)?.min_value() > tol)
}

/// Deletes row and column `drop`.
pub fn principal_submatrix(a: &SymMatrix, drop: usize) -> Result<SymMatrix> {
    if drop >= a.dim() {
        return Err(Error::IndexOutOfRange {
            index: drop,
            size: a.dim(),
        });
    }
    Ok(SymMatrix(a.as_matrix().without(drop, drop)))
}

/// Symmetric semi-positive definite square root. Eigenvalues down to
/// `-1e-10·max(1, ‖A‖_max)` are clamped to zero.
pub fn sqrt_spd(a: &SymMatrix) -> Result<SymMatrix> {
    let eig = sym_eigen(a)?;
    let floor = -zero_threshold(a);
    let min = eig.min_value();
    if min < floor {
        return Err(Error::NotSemiPositive {
            min_eigenvalue: min,
        });
    }
    Ok(eig.map_values(|l| l.max(0.0).sqrt()))
}

/// `B = sqrt(sqrt(A²))`: same eigenvectors as `A`, eigenvalues `sqrt|λ_i|`.
pub fn quartic_root_b(a: &SymMatrix) -> Result<SymMatrix> {
    let eig = sym_eigen(a)?;
    quartic_root_from_eigen(&eig)
}

pub(crate) fn quartic_root_from_eigen(eig: &EigenDecomposition) -> Result<SymMatrix> {
    let det: f64 = eig.values().iter().product();
    if det.abs() <= 1e-12 {
        return Err(Error::RankDeficient { det });
    }
    Ok(eig.map_values(|l| l.abs().sqrt()))
}
