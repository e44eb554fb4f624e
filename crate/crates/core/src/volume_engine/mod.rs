//! Volume computation: the orthant integral `F`, spherical volumes from
//! Gaussian orthant probabilities, hyperbolic volumes by Klein-model or
//! cone-coordinate Monte Carlo, and closed-form oracles.

pub mod mc;
pub mod oracles;
pub mod orthant;

pub use mc::{combined_se, within_se, MCConfig, Method, VolumeEstimate, Welford};
pub use oracles::{
    bivariate_orthant, gauss_bonnet_area, hyperbolic_triangle_area, ideal_tetrahedron_volume,
    lobachevsky, mu, sphere_volume, trivariate_orthant,
};
pub use orthant::{orthant_event, orthant_probability, orthant_probability_indicator};

use std::f64::consts::PI;

use rand_distr::StandardNormal;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::{
    classify_angle_gram, vertices_from_angle_gram, AngleGramMatrix, DistanceGramMatrix, Geometry,
    SimplexVertices, Tag, DEFAULT_TOL,
};
use crate::hyperbolic_geom::KleinSimplex;
use crate::matrix_core::{determinant, SymMatrix};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum HyperbolicMethod {
    #[default]
    KleinMC,
    ConeMC,
}

/// Rescales to unit diagonal and classifies.
fn classify_scaled(a: &SymMatrix) -> Result<Tag> {
    let m = a.dim();
    let mut d = Vec::with_capacity(m);
    for i in 0..m {
        let x = a[(i, i)];
        if !(x > 0.0) {
            return Err(Error::NotAngleGramCandidate { index: i, value: x });
        }
        d.push(1.0 / x.sqrt());
    }
    let mut unit = a.as_matrix().scale_both(&d);
    for i in 0..m {
        unit[(i, i)] = 1.0;
    }
    Ok(classify_angle_gram(&SymMatrix::symmetrize(&unit), DEFAULT_TOL)?.tag)
}

/// `F(A) = √|det ad(A)| · ∫_{x ≥ 0} e^{−xᵀ·ad(A)·x} dx`.
///
/// Positive definite `A`: `ad(A) ∝ A⁻¹`, so `F = π^{m/2}·P(N(0, A) ≥ 0)`.
/// Hyperbolic `A`: `ad(A) = |det A|·Q` with `Q = −A⁻¹` entrywise positive,
/// and `F = |det A|^{−1/2} ∫_{z ≥ 0} e^{−zᵀQz} dz`, sampled with independent
/// half-normals matched to the diagonal of `Q` (the weights are bounded
/// because the off-diagonal part of `Q` is positive on the orthant).
///
/// `A` need not have unit diagonal: `F(D·A·D) = F(A)`.
pub fn f_function(a: &SymMatrix, mc: &MCConfig) -> Result<VolumeEstimate> {
    match classify_scaled(a)? {
        Tag::Spherical => {
            let p = orthant_probability(a, mc)?;
            Ok(p.scaled(PI.powf(a.dim() as f64 / 2.0)))
        }
        Tag::Hyperbolic => cone_integral(a, mc),
        Tag::ClosureBoundary => Err(Error::BoundaryMatrix),
        Tag::Invalid => Err(Error::ClassificationMismatch {
            expected: "Spherical or Hyperbolic".into(),
            found: Tag::Invalid.to_string(),
        }),
    }
}

fn cone_integral(a: &SymMatrix, mc: &MCConfig) -> Result<VolumeEstimate> {
    let m = a.dim();
    let det = determinant(a);
    let inv = a
        .as_matrix()
        .inverse()
        .map_err(|_| Error::RankDeficient { det })?;
    let q = inv.scale(-1.0);
    let diag: Vec<f64> = (0..m).map(|i| q[(i, i)]).collect();
    if diag.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::NotHyperbolicGram("−A⁻¹ has a nonpositive diagonal".into()));
    }
    let sd: Vec<f64> = diag.iter().map(|&x| (0.5 / x).sqrt()).collect();
    // ∫ e^{−q_ii z²} over z ≥ 0 is √(π/q_ii)/2
    let norm: f64 = diag.iter().map(|&x| (PI / x).sqrt() / 2.0).product();
    let stats = mc::run_scalar(mc, |rng| {
        let z: Vec<f64> = sd
            .iter()
            .map(|&s| s * rng.sample::<f64, _>(StandardNormal).abs())
            .collect();
        let mut cross = 0.0;
        for i in 0..m {
            for j in i + 1..m {
                cross += 2.0 * q[(i, j)] * z[i] * z[j];
            }
        }
        (-cross).exp()
    })?;
    Ok(VolumeEstimate::from_stats(
        &stats,
        norm / det.abs().sqrt(),
        Method::ConeMC,
    ))
}

fn require(a: &AngleGramMatrix, geometry: Geometry) -> Result<()> {
    a.require(geometry)
}

/// `V = μ_n⁻¹·π^{(n+1)/2}·P(N(0, G*) ≥ 0)`.
pub fn spherical_volume(a: &AngleGramMatrix, mc: &MCConfig) -> Result<VolumeEstimate> {
    require(a, Geometry::Spherical)?;
    let p = orthant_probability(a.matrix(), mc)?;
    Ok(p.scaled(PI.powf((a.n() as f64 + 1.0) / 2.0) / mu(a.n())))
}

/// Same volume from the distance Gram: the cone over the simplex pulls back
/// to the orthant under the vertex matrix, giving
/// `V = μ_n⁻¹·π^{(n+1)/2}·P(N(0, G⁻¹) ≥ 0)`.
pub fn spherical_volume_from_distance(
    g: &DistanceGramMatrix,
    mc: &MCConfig,
) -> Result<VolumeEstimate> {
    if g.geometry() != Geometry::Spherical {
        return Err(Error::ClassificationMismatch {
            expected: Geometry::Spherical.to_string(),
            found: g.geometry().to_string(),
        });
    }
    let inv = g
        .matrix()
        .as_matrix()
        .inverse()
        .map_err(|_| Error::DegenerateSimplex("singular distance Gram".into()))?;
    let p = orthant_probability(&SymMatrix::symmetrize(&inv), mc)?;
    Ok(p.scaled(PI.powf((g.n() as f64 + 1.0) / 2.0) / mu(g.n())))
}

pub fn hyperbolic_volume(
    a: &AngleGramMatrix,
    mc: &MCConfig,
    method: HyperbolicMethod,
) -> Result<VolumeEstimate> {
    require(a, Geometry::Hyperbolic)?;
    match method {
        HyperbolicMethod::KleinMC => {
            let v = vertices_from_angle_gram(a)?;
            KleinSimplex::new(&v)?.volume(mc)
        }
        HyperbolicMethod::ConeMC => Ok(cone_integral(a.matrix(), mc)?.scaled(1.0 / mu(a.n()))),
    }
}

/// Volume of a simplex given by its vertices.
pub fn volume_from_vertices(v: &SimplexVertices, mc: &MCConfig) -> Result<VolumeEstimate> {
    match v.geometry() {
        Geometry::Hyperbolic => KleinSimplex::new(v)?.volume(mc),
        Geometry::Spherical => spherical_volume_from_distance(&v.distance_gram()?, mc),
    }
}

/// Dispatches on the classification: orthant route for spherical input,
/// Klein-model route for hyperbolic input.
pub fn volume(a: &AngleGramMatrix, mc: &MCConfig) -> Result<VolumeEstimate> {
    match a.tag() {
        Tag::Spherical => spherical_volume(a, mc),
        Tag::Hyperbolic => hyperbolic_volume(a, mc, HyperbolicMethod::KleinMC),
        Tag::ClosureBoundary => Err(Error::BoundaryMatrix),
        Tag::Invalid => Err(Error::ClassificationMismatch {
            expected: "Spherical or Hyperbolic".into(),
            found: Tag::Invalid.to_string(),
        }),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceBoundCheck {
    pub volume: VolumeEstimate,
    /// Area of the face opposite each vertex.
    pub face_areas: Vec<f64>,
    pub holds: bool,
}

/// Checks `vol₃(σ) ≤ area(τ)/2 + 3·SE` for every face `τ` of a hyperbolic
/// tetrahedron; face areas are exact angle defects.
pub fn thurston_face_bound_check(
    vertices: &SimplexVertices,
    mc: &MCConfig,
) -> Result<FaceBoundCheck> {
    if vertices.geometry() != Geometry::Hyperbolic || vertices.n() != 3 {
        return Err(Error::InvalidArgument(
            "face bound check needs a hyperbolic tetrahedron".into(),
        ));
    }
    let volume = KleinSimplex::new(vertices)?.volume(mc)?;
    let vs = vertices.vertices();
    let mut face_areas = Vec::with_capacity(4);
    for skip in 0..4 {
        let f: Vec<&Vec<f64>> = vs.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, v)| v).collect();
        let area = hyperbolic_triangle_area(f[0], f[1], f[2]);
        if !(area > 0.0) {
            return Err(Error::DegenerateSimplex(format!("face {skip} has zero area")));
        }
        face_areas.push(area);
    }
    let holds = face_areas
        .iter()
        .all(|&area| volume.value <= 0.5 * area + 3.0 * volume.std_error);
    Ok(FaceBoundCheck {
        volume,
        face_areas,
        holds,
    })
}
