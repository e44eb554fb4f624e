//! Hyperboloid-model primitives with the form
//! `⟨x,y⟩ = Σ_{i<n} x_i·y_i − x_n·y_n` (time coordinate last), the Klein
//! model, inscribed balls and truncated volumes.

mod inball;
mod klein_mc;

pub use inball::{inscribed_ball, InscribedBall};
pub use klein_mc::{tail_volume, tail_volumes, KleinSimplex, TailVolumeResult};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::{Geometry, SimplexVertices};

/// Tolerance on `⟨u,u⟩ = ±1` checks, relative to the Euclidean norm squared.
pub const FORM_TOL: f64 = 1e-8;

/// Minkowski form on plain slices; lengths must agree.
pub fn mink_dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len() - 1;
    let space: f64 = a[..n].iter().zip(&b[..n]).map(|(x, y)| x * y).sum();
    space - a[n] * b[n]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiVector(Vec<f64>);

impl MinkowskiVector {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: x.len(),
            });
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i, 0));
        }
        Ok(MinkowskiVector(x))
    }

    /// The hyperboloid apex `e_{n+1}`.
    pub fn apex(n: usize) -> Self {
        let mut x = vec![0.0; n + 1];
        x[n] = 1.0;
        MinkowskiVector(x)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn inner(&self, other: &MinkowskiVector) -> Result<f64> {
        mink_inner(&self.0, &other.0)
    }
}

/// `⟨u,v⟩` with a length check.
pub fn mink_inner(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    if u.len() < 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: u.len(),
        });
    }
    Ok(mink_dot(u, v))
}

fn euclid2(u: &[f64]) -> f64 {
    u.iter().map(|x| x * x).sum()
}

fn check_on_hyperboloid(u: &[f64]) -> Result<()> {
    let form = mink_dot(u, u);
    let n = u.len() - 1;
    if (form + 1.0).abs() > FORM_TOL * euclid2(u).max(1.0) || u[n] <= 0.0 {
        return Err(Error::OffHyperboloid { value: form });
    }
    Ok(())
}

fn check_unit_spacelike(u: &[f64]) -> Result<()> {
    let form = mink_dot(u, u);
    if (form - 1.0).abs() > FORM_TOL * euclid2(u).max(1.0) {
        return Err(Error::OffHyperboloid { value: form });
    }
    Ok(())
}

/// `acosh(−⟨u,v⟩)`; for nearby points the equivalent
/// `2·asinh(√⟨u−v,u−v⟩/2)` avoids cancellation.
pub fn dist_hh(u: &[f64], v: &[f64]) -> Result<f64> {
    mink_inner(u, v)?;
    check_on_hyperboloid(u)?;
    check_on_hyperboloid(v)?;
    Ok(dist_unchecked(u, v))
}

pub(crate) fn dist_unchecked(u: &[f64], v: &[f64]) -> f64 {
    let c = -mink_dot(u, v);
    if c < 2.0 {
        let diff: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
        let chord = mink_dot(&diff, &diff).max(0.0).sqrt();
        2.0 * (chord / 2.0).asinh()
    } else {
        c.acosh()
    }
}

/// Angle between the hyperplanes `u^⊥` and `v^⊥` measured with the normals:
/// `arccos(−⟨u,v⟩)`.
pub fn dihedral_angle(u: &[f64], v: &[f64]) -> Result<f64> {
    let c = mink_inner(u, v)?;
    check_unit_spacelike(u)?;
    check_unit_spacelike(v)?;
    if c.abs() >= 1.0 {
        return Err(Error::HyperplanesDisjoint { value: c.abs() });
    }
    Ok((-c).acos())
}

/// Distance from a hyperboloid point to the hyperplane `v^⊥`:
/// `asinh|⟨u,v⟩|`.
pub fn dist_point_hyperplane(u: &[f64], v: &[f64]) -> Result<f64> {
    let c = mink_inner(u, v)?;
    check_on_hyperboloid(u)?;
    check_unit_spacelike(v)?;
    Ok(c.abs().asinh())
}

/// Point of the open unit ball (or its boundary, for ideal points).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KleinPoint(Vec<f64>);

impl KleinPoint {
    pub fn new(t: Vec<f64>) -> Result<Self> {
        let norm = euclid2(&t).sqrt();
        if !(norm <= 1.0) {
            return Err(Error::IdealPoint { norm });
        }
        Ok(KleinPoint(t))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        euclid2(&self.0).sqrt()
    }

    pub fn is_ideal(&self) -> bool {
        self.norm() >= 1.0
    }
}

/// Central projection `u ↦ u_space / u_time`.
pub fn klein_embed(u: &[f64]) -> Result<KleinPoint> {
    if u.len() < 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: u.len(),
        });
    }
    check_on_hyperboloid(u)?;
    let n = u.len() - 1;
    KleinPoint::new(u[..n].iter().map(|x| x / u[n]).collect())
}

/// `(t, 1)/√(1−‖t‖²)`.
pub fn klein_lift(t: &KleinPoint) -> Result<Vec<f64>> {
    let s = 1.0 - euclid2(t.coords());
    if !(s > 0.0) {
        return Err(Error::IdealPoint { norm: t.norm() });
    }
    let k = 1.0 / s.sqrt();
    let mut out: Vec<f64> = t.coords().iter().map(|x| x * k).collect();
    out.push(k);
    Ok(out)
}

/// Inward unit normals of the faces of a hyperbolic simplex.
pub fn face_normals(vertices: &SimplexVertices) -> Result<Vec<Vec<f64>>> {
    if vertices.geometry() != Geometry::Hyperbolic {
        return Err(Error::ClassificationMismatch {
            expected: Geometry::Hyperbolic.to_string(),
            found: vertices.geometry().to_string(),
        });
    }
    vertices.unit_normals()
}

/// Radius of the ball around `e_{n+1}` cut out by `⟨x,x⟩ ≤ −p·(x,x)`:
/// `acosh(√((1+p)/(2p)))`.
pub fn omega_ball_radius(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("p must lie in (0,1), got {p}")));
    }
    Ok(((1.0 + p) / (2.0 * p)).sqrt().acosh())
}
