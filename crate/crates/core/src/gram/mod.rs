//! Angle Gram matrices `G* = [−cos a_ij]`, their classification against the
//! spherical and hyperbolic moduli spaces and the closure of both, the
//! Gram dualities, and recovery of vertex coordinates.

mod duals;
mod vertices;

pub use duals::{
    hyperbolic_distance_from_angle, hyperbolic_dual, spherical_distance_from_angle, spherical_dual,
};
pub use vertices::{
    adjugate_positivity_check, decompose_lorentz, vertices_from_angle_gram,
    vertices_from_hyperbolic_gram, vertices_from_spherical_gram, LorentzDecomposition,
    SimplexVertices,
};

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix_core::{adjugate, determinant, principal_submatrix, sym_eigen, Matrix, SymMatrix};

/// Default classification tolerance, relative to `‖g‖_max`.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Slack allowed on unit diagonals and cosine bounds of computed matrices.
const UNIT_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Geometry {
    #[serde(alias = "spherical")]
    Spherical,
    #[serde(alias = "hyperbolic")]
    Hyperbolic,
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Geometry::Spherical => f.write_str("Spherical"),
            Geometry::Hyperbolic => f.write_str("Hyperbolic"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tag {
    Spherical,
    Hyperbolic,
    ClosureBoundary,
    Invalid,
}

impl Tag {
    pub fn geometry(self) -> Option<Geometry> {
        match self {
            Tag::Spherical => Some(Geometry::Spherical),
            Tag::Hyperbolic => Some(Geometry::Hyperbolic),
            _ => None,
        }
    }
}

impl From<Geometry> for Tag {
    fn from(g: Geometry) -> Tag {
        match g {
            Geometry::Spherical => Tag::Spherical,
            Geometry::Hyperbolic => Tag::Hyperbolic,
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tag::Spherical => "Spherical",
            Tag::Hyperbolic => "Hyperbolic",
            Tag::ClosureBoundary => "ClosureBoundary",
            Tag::Invalid => "Invalid",
        };
        f.write_str(s)
    }
}

/// Dihedral angle matrix `[a_ij]` of an n-simplex, with `a_ii = π`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngleMatrix {
    n: usize,
    a: SymMatrix,
}

impl AngleMatrix {
    pub fn new(a: SymMatrix) -> Result<Self> {
        let m = a.dim();
        if m < 2 {
            return Err(Error::InvalidAngles("need at least two faces".into()));
        }
        for i in 0..m {
            if a[(i, i)] != PI {
                return Err(Error::InvalidAngles(format!(
                    "diagonal entry {i} is {} (must be π)",
                    a[(i, i)]
                )));
            }
            for j in 0..m {
                let x = a[(i, j)];
                if !(0.0..=PI).contains(&x) {
                    return Err(Error::InvalidAngles(format!(
                        "angle at ({i},{j}) is {x}, outside [0, π]"
                    )));
                }
            }
        }
        Ok(AngleMatrix { n: m - 1, a })
    }

    /// Builds from off-diagonal angles `f(i, j)`, `i < j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::new(SymMatrix::from_upper(n + 1, |i, j| if i == j { PI } else { f(i, j) }))
    }

    /// Every dihedral angle equal to `angle`.
    pub fn regular(n: usize, angle: f64) -> Result<Self> {
        Self::from_fn(n, |_, _| angle)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.a
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[(i, j)]
    }

    /// Off-diagonal angles `(i, j, a_ij)` for `i < j`.
    pub fn pairs(&self) -> Vec<(usize, usize, f64)> {
        let m = self.n + 1;
        (0..m)
            .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, self.a[(i, j)]))
            .collect()
    }
}

/// Diagnostics behind a classification verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub tag: Tag,
    /// Absolute tolerance actually applied (`tol·‖g‖_max`).
    pub tol: f64,
    pub min_eigenvalue: f64,
    pub det: f64,
    pub min_adjugate_entry: f64,
    /// Smallest eigenvalue of each principal submatrix obtained by deleting
    /// row/column `i`.
    pub minor_min_eigenvalues: Vec<f64>,
    pub minor_positive_definite: Vec<bool>,
}

/// Classifies a unit-diagonal symmetric matrix.
///
/// * `Spherical`: positive definite.
/// * `Hyperbolic`: `det < 0`, every adjugate entry positive, every maximal
///   proper principal submatrix positive definite.
/// * `ClosureBoundary`: semi-positive definite, or the hyperbolic conditions
///   hold with strict inequalities relaxed by `tol`.
/// * `Invalid`: none of the above.
///
/// `tol` is relative to `‖g‖_max`.
pub fn classify_angle_gram(g: &SymMatrix, tol: f64) -> Result<Classification> {
    let m = g.dim();
    if m < 2 {
        return Err(Error::InvalidArgument("angle Gram needs side ≥ 2".into()));
    }
    for i in 0..m {
        if (g[(i, i)] - 1.0).abs() > UNIT_SLACK {
            return Err(Error::NotAngleGramCandidate {
                index: i,
                value: g[(i, i)],
            });
        }
    }
    let t = tol * g.max_abs().max(1.0);
    let min_eigenvalue = sym_eigen(g)?.min_value();
    let det = determinant(g);
    let adj = adjugate(g);
    let min_adjugate_entry = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| adj[(i, j)])
        .fold(f64::INFINITY, f64::min);
    let mut minor_min_eigenvalues = Vec::with_capacity(m);
    for k in 0..m {
        let sub = principal_submatrix(g, k)?;
        minor_min_eigenvalues.push(sym_eigen(&sub)?.min_value());
    }
    let minor_positive_definite: Vec<bool> = minor_min_eigenvalues.iter().map(|&l| l > t).collect();

    let tag = if min_eigenvalue > t {
        Tag::Spherical
    } else if det < -t && min_adjugate_entry > t && minor_positive_definite.iter().all(|&b| b) {
        Tag::Hyperbolic
    } else if min_eigenvalue >= -t
        || (det <= t
            && min_adjugate_entry >= -t
            && minor_min_eigenvalues.iter().all(|&l| l >= -t))
    {
        Tag::ClosureBoundary
    } else {
        Tag::Invalid
    };

    Ok(Classification {
        tag,
        tol: t,
        min_eigenvalue,
        det,
        min_adjugate_entry,
        minor_min_eigenvalues,
        minor_positive_definite,
    })
}

/// Angle Gram matrix `G* = [−cos a_ij]` with its classification.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngleGramMatrix {
    n: usize,
    g: SymMatrix,
    classification: Classification,
}

impl AngleGramMatrix {
    /// Validates the unit diagonal (snapping entries within 1e-12 of one to
    /// exactly one) and classifies with `tol`.
    pub fn new(g: SymMatrix, tol: f64) -> Result<Self> {
        let m = g.dim();
        if m < 2 {
            return Err(Error::InvalidArgument("angle Gram needs side ≥ 2".into()));
        }
        let mut raw = g.into_matrix();
        for i in 0..m {
            if (raw[(i, i)] - 1.0).abs() > UNIT_SLACK {
                return Err(Error::NotAngleGramCandidate {
                    index: i,
                    value: raw[(i, i)],
                });
            }
            raw[(i, i)] = 1.0;
        }
        let g = SymMatrix::new(raw)?;
        // Two endpoint normals of a hyperbolic segment have |<u,v>| > 1, so
        // the cosine bound only applies from triangles upward.
        if m > 2 {
            for i in 0..m {
                for j in 0..m {
                    if g[(i, j)].abs() > 1.0 + UNIT_SLACK {
                        return Err(Error::InvalidArgument(format!(
                            "angle Gram entry ({i},{j}) = {} exceeds 1 in magnitude",
                            g[(i, j)]
                        )));
                    }
                }
            }
        }
        let classification = classify_angle_gram(&g, tol)?;
        Ok(AngleGramMatrix {
            n: m - 1,
            g,
            classification,
        })
    }

    pub fn with_default_tol(g: SymMatrix) -> Result<Self> {
        Self::new(g, DEFAULT_TOL)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.g
    }

    pub fn classification(&self) -> &Classification {
        &self.classification
    }

    pub fn tag(&self) -> Tag {
        self.classification.tag
    }

    /// Fails unless the matrix is classified as `geometry`.
    pub fn require(&self, geometry: Geometry) -> Result<()> {
        if self.tag() == Tag::from(geometry) {
            Ok(())
        } else if self.tag() == Tag::ClosureBoundary {
            Err(Error::BoundaryMatrix)
        } else {
            Err(Error::ClassificationMismatch {
                expected: geometry.to_string(),
                found: self.tag().to_string(),
            })
        }
    }

    /// Recovers `a_ij = arccos(−g_ij)`.
    pub fn angles(&self) -> Result<AngleMatrix> {
        AngleMatrix::from_fn(self.n, |i, j| (-self.g[(i, j)]).clamp(-1.0, 1.0).acos())
    }
}

/// `G* = [−cos a_ij]`, classified with the default tolerance.
pub fn angle_gram_from_angles(am: &AngleMatrix) -> Result<AngleGramMatrix> {
    let m = am.n() + 1;
    let g = SymMatrix::from_upper(m, |i, j| if i == j { 1.0 } else { -am.get(i, j).cos() });
    AngleGramMatrix::with_default_tol(g)
}

/// Distance Gram matrix: `[cos d_ij]` (spherical) or `[cosh d_ij]`
/// (hyperbolic).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceGramMatrix {
    n: usize,
    g: SymMatrix,
    geometry: Geometry,
}

impl DistanceGramMatrix {
    pub fn new(g: SymMatrix, geometry: Geometry) -> Result<Self> {
        let m = g.dim();
        if m < 2 {
            return Err(Error::InvalidArgument("distance Gram needs side ≥ 2".into()));
        }
        let mut raw = g.into_matrix();
        for i in 0..m {
            if (raw[(i, i)] - 1.0).abs() > UNIT_SLACK {
                return Err(Error::InvalidArgument(format!(
                    "distance Gram diagonal entry {i} is {}",
                    raw[(i, i)]
                )));
            }
            raw[(i, i)] = 1.0;
        }
        for i in 0..m {
            for j in 0..m {
                let x = raw[(i, j)];
                let ok = match geometry {
                    Geometry::Spherical => x.abs() <= 1.0 + UNIT_SLACK,
                    Geometry::Hyperbolic => x >= 1.0 - UNIT_SLACK * x.abs().max(1.0),
                };
                if !ok {
                    return Err(Error::InvalidArgument(format!(
                        "{geometry} distance Gram entry ({i},{j}) = {x} out of range"
                    )));
                }
            }
        }
        Ok(DistanceGramMatrix {
            n: m - 1,
            g: SymMatrix::new(raw)?,
            geometry,
        })
    }

    /// Builds from a pairwise distance matrix.
    pub fn from_distances(d: &SymMatrix, geometry: Geometry) -> Result<Self> {
        let f: fn(f64) -> f64 = match geometry {
            Geometry::Spherical => f64::cos,
            Geometry::Hyperbolic => f64::cosh,
        };
        let m = d.dim();
        Self::new(SymMatrix::from_upper(m, |i, j| f(d[(i, j)])), geometry)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.g
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    /// Pairwise distances `arccos g_ij` or `arccosh g_ij`.
    pub fn distances(&self) -> SymMatrix {
        let m = self.n + 1;
        SymMatrix::from_upper(m, |i, j| match self.geometry {
            Geometry::Spherical => self.g[(i, j)].clamp(-1.0, 1.0).acos(),
            Geometry::Hyperbolic => self.g[(i, j)].max(1.0).acosh(),
        })
    }
}

/// Angle Gram matrix of the simplex spanned by `vertices`, computed from the
/// inward unit normals of its faces.
pub fn angle_gram_from_vertices(vertices: &SimplexVertices) -> Result<AngleGramMatrix> {
    let normals = vertices.unit_normals()?;
    let m = vertices.n() + 1;
    let g = match vertices.geometry() {
        Geometry::Spherical => Matrix::from_fn(m, m, |i, j| dot(&normals[i], &normals[j])),
        Geometry::Hyperbolic => Matrix::from_fn(m, m, |i, j| {
            crate::hyperbolic_geom::mink_dot(&normals[i], &normals[j])
        }),
    };
    let mut g = SymMatrix::symmetrize(&g).into_matrix();
    for i in 0..m {
        g[(i, i)] = 1.0;
    }
    AngleGramMatrix::with_default_tol(SymMatrix::new(g)?)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle(angle: f64) -> AngleGramMatrix {
        angle_gram_from_angles(&AngleMatrix::regular(2, angle).unwrap()).unwrap()
    }

    #[test]
    fn right_angles_give_identity() {
        let g = angle_gram_from_angles(&AngleMatrix::regular(3, PI / 2.0).unwrap()).unwrap();
        assert!(g.matrix().as_matrix().max_abs_diff(&Matrix::identity(4)) < 1e-15);
        assert_eq!(g.tag(), Tag::Spherical);
    }

    #[test]
    fn equilateral_euclidean_triangle_is_boundary() {
        let g = triangle(PI / 3.0);
        for (i, j, _) in g.angles().unwrap().pairs() {
            assert!((g.matrix()[(i, j)] + 0.5).abs() < 1e-15);
        }
        // eigenvalues {3/2, 3/2, 0}: det vanishes
        assert!(g.classification().det.abs() < 1e-12);
        assert_eq!(g.tag(), Tag::ClosureBoundary);
    }

    #[test]
    fn pi_over_six_triangle_is_hyperbolic() {
        let g = triangle(PI / 6.0);
        let c = g.classification();
        let cs = (PI / 6.0).cos();
        // det(I − cJ') for three faces: 1 − 3c² − 2c³
        let det = 1.0 - 3.0 * cs * cs - 2.0 * cs * cs * cs;
        assert!((c.det - det).abs() < 1e-12);
        assert!(c.det < 0.0);
        // ad_ii = 1 − c², ad_ij = c + c²
        assert!((c.min_adjugate_entry - (1.0 - cs * cs)).abs() < 1e-12);
        assert!(c.minor_positive_definite.iter().all(|&b| b));
        assert_eq!(c.tag, Tag::Hyperbolic);
    }

    #[test]
    fn identity_is_spherical() {
        let c = classify_angle_gram(&SymMatrix::identity(4), DEFAULT_TOL).unwrap();
        assert_eq!(c.tag, Tag::Spherical);
        assert_eq!(c.minor_min_eigenvalues.len(), 4);
    }

    #[test]
    fn euclidean_right_triangle_is_boundary() {
        let am = AngleMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 1) => PI / 2.0,
            _ => PI / 4.0,
        })
        .unwrap();
        let g = angle_gram_from_angles(&am).unwrap();
        assert!(g.classification().det.abs() < 1e-12);
        assert_eq!(g.tag(), Tag::ClosureBoundary);
    }

    #[test]
    fn invalid_matrix() {
        // two negative eigenvalues: diag(1,1,1) with large positive off-diagonals
        let g = SymMatrix::from_upper(4, |i, j| if i == j { 1.0 } else { 0.9 });
        let g = SymMatrix::new(g.into_matrix()).unwrap();
        let c = classify_angle_gram(&g, DEFAULT_TOL).unwrap();
        assert_eq!(c.tag, Tag::Spherical);
        let bad = SymMatrix::from_rows(&[
            vec![1.0, -0.9, -0.9, -0.9],
            vec![-0.9, 1.0, -0.9, -0.9],
            vec![-0.9, -0.9, 1.0, -0.9],
            vec![-0.9, -0.9, -0.9, 1.0],
        ])
        .unwrap();
        let c = classify_angle_gram(&bad, DEFAULT_TOL).unwrap();
        assert_eq!(c.tag, Tag::Invalid);
    }

    #[test]
    fn non_unit_diagonal_is_rejected() {
        let g = SymMatrix::diagonal(&[1.0, 2.0]);
        assert!(matches!(
            classify_angle_gram(&g, DEFAULT_TOL),
            Err(Error::NotAngleGramCandidate { index: 1, .. })
        ));
    }

    #[test]
    fn angle_matrix_validation() {
        let bad = SymMatrix::from_rows(&[vec![PI, 4.0], vec![4.0, PI]]).unwrap();
        assert!(AngleMatrix::new(bad).is_err());
        let bad = SymMatrix::from_rows(&[vec![3.0, 1.0], vec![1.0, PI]]).unwrap();
        assert!(AngleMatrix::new(bad).is_err());
    }

    #[test]
    fn distance_gram_ranges() {
        let d = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let g = DistanceGramMatrix::from_distances(&d, Geometry::Hyperbolic).unwrap();
        assert!((g.matrix()[(0, 1)] - 1f64.cosh()).abs() < 1e-15);
        assert!((g.distances()[(0, 1)] - 1.0).abs() < 1e-12);
        let bad = SymMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        assert!(DistanceGramMatrix::new(bad, Geometry::Hyperbolic).is_err());
    }
}
