use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::gram::{
    hyperbolic_dual, spherical_dual, AngleGramMatrix, Geometry, SimplexVertices, Tag,
};
use crate::matrix_core::{sym_eigen, SymMatrix};

const MAX_ATTEMPTS: usize = 1000;
/// Draws whose Gram matrices have an eigenvalue this close to zero are
/// redrawn.
const MIN_ABS_EIGENVALUE: f64 = 1e-3;

fn min_abs_eigenvalue(a: &SymMatrix) -> Result<f64> {
    Ok(sym_eigen(a)?
        .values()
        .iter()
        .fold(f64::INFINITY, |m, l| m.min(l.abs())))
}

fn random_direction(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn draw_vertices(rng: &mut ChaCha8Rng, n: usize, geometry: Geometry) -> Result<SimplexVertices> {
    let pts: Vec<Vec<f64>> = match geometry {
        Geometry::Spherical => (0..=n).map(|_| random_direction(rng, n + 1)).collect(),
        Geometry::Hyperbolic => {
            let rho = rng.random_range(0.5..3.0);
            (0..=n)
                .map(|_| {
                    let r: f64 = rng.random_range(0.0..rho);
                    let mut p: Vec<f64> =
                        random_direction(rng, n).into_iter().map(|x| x * r.sinh()).collect();
                    p.push(r.cosh());
                    p
                })
                .collect()
        }
    };
    SimplexVertices::from_vertices(&pts, geometry)
}

/// Random nondegenerate simplex together with its angle Gram matrix.
///
/// Spherical: `n+1` uniform points of `Sⁿ`. Hyperbolic: `n+1` points at
/// radius uniform in `[0, ρ]` around the apex, `ρ` uniform in `[0.5, 3]`.
/// Draws are rejected while the distance or angle Gram has an eigenvalue
/// within `1e-3` of zero, or the angle Gram classifies differently from
/// the requested geometry.
pub fn random_simplex(
    n: usize,
    geometry: Geometry,
    seed: u64,
) -> Result<(SimplexVertices, AngleGramMatrix)> {
    if n < 1 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let Ok(v) = draw_vertices(&mut rng, n, geometry) else {
            continue;
        };
        let Ok(g) = v.distance_gram() else {
            continue;
        };
        if min_abs_eigenvalue(g.matrix())? < MIN_ABS_EIGENVALUE {
            continue;
        }
        let dual = match geometry {
            Geometry::Spherical => spherical_dual(&g),
            Geometry::Hyperbolic => hyperbolic_dual(&g),
        };
        let Ok((a, _)) = dual else {
            continue;
        };
        if a.tag() != Tag::from(geometry) || min_abs_eigenvalue(a.matrix())? < MIN_ABS_EIGENVALUE {
            continue;
        }
        return Ok((v, a));
    }
    Err(Error::RejectionExhausted {
        attempts: MAX_ATTEMPTS,
    })
}

/// Angle Gram matrix of a [`random_simplex`].
pub fn random_angle_gram(n: usize, geometry: Geometry, seed: u64) -> Result<AngleGramMatrix> {
    Ok(random_simplex(n, geometry, seed)?.1)
}
