use serde::{Deserialize, Serialize};

use super::random::random_angle_gram;
use super::{schedule, Spacing};
use crate::error::{Error, Result};
use crate::gram::{angle_gram_from_vertices, decompose_lorentz, AngleGramMatrix, Geometry, SimplexVertices};
use crate::hyperbolic_geom::dist_point_hyperplane;
use crate::matrix_core::SymMatrix;
use crate::volume_engine::mc::derive_seed;
use crate::volume_engine::{combined_se, spherical_volume, MCConfig, VolumeEstimate};

/// Spherical triangles with one vertex at the north pole and the other two
/// at colatitude `π − ε`, longitudes `0` and `α`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthSequence {
    pub alpha: f64,
    pub eps: Vec<f64>,
    pub volumes: Vec<VolumeEstimate>,
    /// Edge lengths `(d_01, d_02, d_12)` at the last step.
    pub final_lengths: [f64; 3],
    pub final_distance_gram: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthDiscontinuityReport {
    pub first: LengthSequence,
    pub second: LengthSequence,
    /// `‖G_α − G_α′‖_max` between the final distance Grams.
    pub final_distance_gram_diff: f64,
    /// Final-step volume difference, first minus second.
    pub volume_gap: f64,
    pub gap_std_error: f64,
    /// `2α − 2α′`.
    pub expected_gap: f64,
}

fn polar_triangle(alpha: f64, eps: f64) -> Result<SimplexVertices> {
    let (s, c) = eps.sin_cos();
    SimplexVertices::from_vertices(
        &[
            vec![0.0, 0.0, 1.0],
            vec![s, 0.0, -c],
            vec![s * alpha.cos(), s * alpha.sin(), -c],
        ],
        Geometry::Spherical,
    )
}

fn length_sequence(alpha: f64, eps: &[f64], mc: &MCConfig, stream: u64) -> Result<LengthSequence> {
    let mut volumes = Vec::with_capacity(eps.len());
    let mut last = None;
    for (k, &e) in eps.iter().enumerate() {
        let v = polar_triangle(alpha, e)?;
        let a = angle_gram_from_vertices(&v)?;
        volumes.push(spherical_volume(&a, &mc.fork(stream + k as u64))?);
        last = Some(v);
    }
    let v = last.ok_or_else(|| Error::InvalidArgument("empty ε schedule".into()))?;
    let g = v.distance_gram()?;
    let d = g.distances();
    Ok(LengthSequence {
        alpha,
        eps: eps.to_vec(),
        volumes,
        final_lengths: [d[(0, 1)], d[(0, 2)], d[(1, 2)]],
        final_distance_gram: g.matrix().to_rows(),
    })
}

/// Two sequences of spherical triangles whose edge lengths converge to
/// `(π, π, 0)` while the angle at the pole stays `α` resp. `α′`. Their
/// distance Grams converge to the same matrix but their areas converge to
/// the lune areas `2α` and `2α′`.
///
/// `ε` runs geometrically from `0.5` down to `1e-4` over `steps` points.
pub fn length_discontinuity_demo(
    alpha: f64,
    alpha_prime: f64,
    steps: usize,
    mc: &MCConfig,
) -> Result<LengthDiscontinuityReport> {
    mc.validate()?;
    for a in [alpha, alpha_prime] {
        if !(a > 0.0 && a < std::f64::consts::PI) {
            return Err(Error::InvalidAngles(format!("pole angle must lie in (0,π), got {a}")));
        }
    }
    // ε_k = 1 − t_k on a geometric schedule from 0.5 to 1e-4
    let eps: Vec<f64> = schedule(steps, Spacing::Geometric, 0.5, 1e-4)?
        .into_iter()
        .map(|t| 1.0 - t)
        .collect();
    let first = length_sequence(alpha, &eps, mc, 0)?;
    let second = length_sequence(alpha_prime, &eps, mc, steps as u64)?;
    let g1 = SymMatrix::from_rows(&first.final_distance_gram)?;
    let g2 = SymMatrix::from_rows(&second.final_distance_gram)?;
    let v1 = first.volumes[steps - 1];
    let v2 = second.volumes[steps - 1];
    Ok(LengthDiscontinuityReport {
        final_distance_gram_diff: g1.as_matrix().max_abs_diff(g2.as_matrix()),
        volume_gap: v1.value - v2.value,
        gap_std_error: combined_se(v1.std_error, v2.std_error),
        expected_gap: 2.0 * (alpha - alpha_prime),
        first,
        second,
    })
}

/// Distance from the apex `e_{n+1}` to the faces of the simplex realized
/// by the eigen-decomposition of a hyperbolic angle Gram, against
/// `acosh(√(1 + |λ_{n+1}|))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApexBoundCase {
    pub n: usize,
    /// `|λ_{n+1}|`.
    pub lambda: f64,
    pub bound: f64,
    pub max_distance: f64,
    /// `bound − max_distance`.
    pub slack: f64,
    /// Smallest coordinate of `e_{n+1}` in the cone basis; nonnegative iff
    /// the apex lies in the simplex.
    pub min_cone_coefficient: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApexBoundReport {
    pub n: usize,
    pub cases: Vec<ApexBoundCase>,
    pub passed: usize,
    pub total: usize,
}

pub fn apex_distance_bound_case(a: &AngleGramMatrix) -> Result<ApexBoundCase> {
    a.require(Geometry::Hyperbolic)?;
    let dec = decompose_lorentz(a)?;
    let m = a.n() + 1;
    let mut apex = vec![0.0; m];
    apex[m - 1] = 1.0;
    let coeffs = dec.cone_map().lu().solve(&apex)?;
    let min_cone_coefficient = coeffs.iter().copied().fold(f64::INFINITY, f64::min);
    let normals = dec.normals();
    let mut max_distance = 0.0f64;
    for i in 0..m {
        max_distance = max_distance.max(dist_point_hyperplane(&apex, &normals.column(i))?);
    }
    let lambda = dec.negative_eigenvalue_magnitude();
    let bound = (1.0 + lambda).sqrt().acosh();
    Ok(ApexBoundCase {
        n: a.n(),
        lambda,
        bound,
        max_distance,
        slack: bound - max_distance,
        min_cone_coefficient,
        holds: min_cone_coefficient >= -1e-12 && max_distance <= bound + 1e-8,
    })
}

/// [`apex_distance_bound_case`] on `samples` random hyperbolic angle Grams.
pub fn apex_distance_bound_experiment(samples: usize, n: usize, seed: u64) -> Result<ApexBoundReport> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("dimension must be at least 2, got {n}")));
    }
    let cases = (0..samples)
        .map(|k| {
            let a = random_angle_gram(n, Geometry::Hyperbolic, derive_seed(seed, k as u64))?;
            apex_distance_bound_case(&a)
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = cases.iter().filter(|c| c.holds).count();
    Ok(ApexBoundReport {
        n,
        passed,
        total: cases.len(),
        cases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::{angle_gram_from_angles, AngleMatrix};
    use crate::volume_engine::within_se;
    use std::f64::consts::PI;

    #[test]
    fn polar_triangle_angles() {
        let v = polar_triangle(0.9, 0.3).unwrap();
        let a = angle_gram_from_vertices(&v).unwrap().angles().unwrap();
        // angle at the pole sits between the faces through it
        assert!((a.get(1, 2) - 0.9).abs() < 1e-12);
        assert!((a.get(0, 1) - a.get(0, 2)).abs() < 1e-12);
    }

    #[test]
    fn lengths_agree_but_areas_differ() {
        let r = length_discontinuity_demo(PI / 2.0, PI / 4.0, 8, &MCConfig::new(4, 200_000)).unwrap();
        assert!(r.final_distance_gram_diff < 1e-6);
        for s in [&r.first, &r.second] {
            assert!(s.final_lengths[0] > PI - 2e-4 && s.final_lengths[1] > PI - 2e-4);
            assert!(s.final_lengths[2] < 2e-4);
        }
        assert!(within_se(r.volume_gap, PI / 2.0, r.gap_std_error, 4.0), "{r:?}");
        assert!(r.volume_gap.abs() > 5.0 * r.gap_std_error);
    }

    #[test]
    fn equal_angles_give_no_gap() {
        let r = length_discontinuity_demo(1.0, 1.0, 4, &MCConfig::new(5, 100_000)).unwrap();
        assert_eq!(r.final_distance_gram_diff, 0.0);
        assert!(within_se(r.volume_gap, 0.0, r.gap_std_error, 4.0));
    }

    #[test]
    fn equilateral_triangle_bound() {
        let a = angle_gram_from_angles(&AngleMatrix::regular(2, PI / 6.0).unwrap()).unwrap();
        let c = apex_distance_bound_case(&a).unwrap();
        assert!(c.holds);
        assert!(c.slack >= 0.0);
        // λ = 1 − 2cos(π/6) and the eigenvector is uniform, so all faces are
        // at distance asinh(√(λ/3))
        let lambda = 3f64.sqrt() - 1.0;
        assert!((c.lambda - lambda).abs() < 1e-12);
        assert!((c.max_distance - (lambda / 3.0).sqrt().asinh()).abs() < 1e-12);
    }

    #[test]
    fn random_cases_pass() {
        for n in [2, 3] {
            let r = apex_distance_bound_experiment(30, n, 11).unwrap();
            assert_eq!(r.passed, r.total);
        }
        assert!(apex_distance_bound_experiment(1, 1, 0).is_err());
    }
}
