use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{schedule, MatrixPath, Spacing, DEFAULT_FINAL_GAP};
use crate::error::{Error, Result};
use crate::gram::{AngleGramMatrix, Geometry};
use crate::matrix_core::SymMatrix;
use crate::volume_engine::lobachevsky;

/// `[−cos a_ij]` with every off-diagonal angle equal to `angle`. No
/// classification is attached, so boundary targets can be built with it.
pub fn regular_gram(n: usize, angle: f64) -> SymMatrix {
    SymMatrix::from_upper(n + 1, |i, j| if i == j { 1.0 } else { -angle.cos() })
}

/// Triangle angle Gram from the angles `[a_01, a_02, a_12]`.
pub fn triangle_gram(angles: [f64; 3]) -> SymMatrix {
    SymMatrix::from_upper(3, |i, j| match (i, j) {
        (0, 0) | (1, 1) | (2, 2) => 1.0,
        (0, 1) => -angles[0].cos(),
        (0, 2) => -angles[1].cos(),
        _ => -angles[2].cos(),
    })
}

/// Named boundary approaches with a known limiting volume.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PathFamily {
    /// Spherical triangles with one angle fixed at `alpha` whose other two
    /// angles open to `(π + α)/2`: the triangle degenerates to a lune of
    /// area `2α`.
    Lune { alpha: f64 },
    /// Straight Gram path between two triangles given by angles
    /// `[a_01, a_02, a_12]`; the limit is the angle excess or defect of
    /// `end`.
    Triangle { start: [f64; 3], end: [f64; 3] },
    /// Regular hyperbolic tetrahedra whose dihedral angles decrease from
    /// `start_angle` to `π/3`, where all vertices become ideal.
    IdealRegularTetrahedron { start_angle: f64 },
}

impl PathFamily {
    pub fn endpoints(&self) -> Result<(AngleGramMatrix, SymMatrix)> {
        let (a0, a1) = match *self {
            PathFamily::Lune { alpha } => {
                if !(alpha > 0.0 && alpha < PI) {
                    return Err(Error::InvalidAngles(format!("lune angle must lie in (0,π), got {alpha}")));
                }
                let side = (PI + alpha) / 2.0;
                (
                    triangle_gram([alpha, PI / 2.0, PI / 2.0]),
                    triangle_gram([alpha, side, side]),
                )
            }
            PathFamily::Triangle { start, end } => (triangle_gram(start), triangle_gram(end)),
            PathFamily::IdealRegularTetrahedron { start_angle } => {
                (regular_gram(3, start_angle), regular_gram(3, PI / 3.0))
            }
        };
        Ok((AngleGramMatrix::with_default_tol(a0)?, a1))
    }

    pub fn geometry(&self) -> Result<Geometry> {
        let (a0, _) = self.endpoints()?;
        a0.tag()
            .geometry()
            .ok_or_else(|| Error::ClassificationMismatch {
                expected: "Spherical or Hyperbolic".into(),
                found: a0.tag().to_string(),
            })
    }

    /// Volume the path converges to.
    pub fn expected_limit(&self) -> Result<f64> {
        Ok(match *self {
            PathFamily::Lune { alpha } => 2.0 * alpha,
            PathFamily::Triangle { end, .. } => {
                let sum: f64 = end.iter().sum();
                match self.geometry()? {
                    Geometry::Spherical => (sum - PI).max(0.0),
                    Geometry::Hyperbolic => (PI - sum).max(0.0),
                }
            }
            PathFamily::IdealRegularTetrahedron { .. } => 3.0 * lobachevsky(PI / 3.0),
        })
    }

    pub fn path(&self, steps: usize, spacing: Spacing) -> Result<MatrixPath> {
        self.path_on(schedule(steps, spacing, 0.0, DEFAULT_FINAL_GAP)?)
    }

    pub fn path_on(&self, schedule: Vec<f64>) -> Result<MatrixPath> {
        let (a0, a1) = self.endpoints()?;
        MatrixPath::new(a0, a1, schedule)
    }
}
