//! Closed forms used to check the estimators: `μ_k`, sphere volumes,
//! Gaussian orthant probabilities in two and three dimensions, the
//! Lobachevsky function and triangle areas from angles.

use std::f64::consts::PI;

use super::mc::{Method, VolumeEstimate};
use crate::error::{Error, Result};
use crate::gram::{AngleMatrix, Geometry};
use crate::hyperbolic_geom::mink_dot;

/// `μ_k = ∫₀^∞ x^k e^{−x²} dx`, via `μ_k = ((k−1)/2)·μ_{k−2}`.
pub fn mu(k: usize) -> f64 {
    let mut even = PI.sqrt() / 2.0;
    let mut odd = 0.5;
    let mut j = if k % 2 == 0 { 0 } else { 1 };
    while j + 2 <= k {
        j += 2;
        if j % 2 == 0 {
            even *= (j as f64 - 1.0) / 2.0;
        } else {
            odd *= (j as f64 - 1.0) / 2.0;
        }
    }
    if k % 2 == 0 {
        even
    } else {
        odd
    }
}

/// Volume of the unit sphere `Sⁿ ⊂ R^{n+1}`, `π^{(n+1)/2}/μ_n`.
pub fn sphere_volume(n: usize) -> f64 {
    PI.powf((n as f64 + 1.0) / 2.0) / mu(n)
}

/// `P(X₁ ≥ 0, X₂ ≥ 0)` for unit variances and correlation `ρ`.
pub fn bivariate_orthant(rho: f64) -> f64 {
    0.25 + rho.asin() / (2.0 * PI)
}

/// Trivariate analogue: `1/8 + (asin ρ₁₂ + asin ρ₁₃ + asin ρ₂₃)/(4π)`.
pub fn trivariate_orthant(r12: f64, r13: f64, r23: f64) -> f64 {
    0.125 + (r12.asin() + r13.asin() + r23.asin()) / (4.0 * PI)
}

fn zeta_even(k: usize) -> f64 {
    // direct sum plus Euler–Maclaurin tail
    let s = 2.0 * k as f64;
    let n = 64usize;
    let head: f64 = (1..n).map(|j| (j as f64).powf(-s)).sum();
    let nf = n as f64;
    let tail = nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s) + s / 12.0 * nf.powf(-s - 1.0)
        - s * (s + 1.0) * (s + 2.0) / 720.0 * nf.powf(-s - 3.0);
    head + tail
}

/// `Λ(θ) = −∫₀^θ log|2 sin t| dt`; odd and π-periodic.
pub fn lobachevsky(theta: f64) -> f64 {
    // reduce to (−π/2, π/2]
    let mut t = theta - PI * (theta / PI).round();
    if t <= -PI / 2.0 {
        t += PI;
    }
    if t == 0.0 {
        return 0.0;
    }
    let sign = t.signum();
    let t = t.abs();
    // −log(2 sin t) = −log(2t) + Σ ζ(2k) t^{2k}/(k π^{2k})
    let mut sum = t - t * (2.0 * t).ln();
    let r = (t / PI) * (t / PI);
    let mut pow = t * r;
    for k in 1..=60 {
        let term = zeta_even(k) * pow / (k as f64 * (2.0 * k as f64 + 1.0));
        sum += term;
        if term.abs() < 1e-17 {
            break;
        }
        pow *= r;
    }
    sign * sum
}

/// `Λ(α) + Λ(β) + Λ(γ)` for an ideal tetrahedron with dihedral angles
/// `α + β + γ = π`.
pub fn ideal_tetrahedron_volume(alpha: f64, beta: f64, gamma: f64) -> Result<f64> {
    if !(alpha > 0.0 && beta > 0.0 && gamma > 0.0) || (alpha + beta + gamma - PI).abs() > 1e-9 {
        return Err(Error::InvalidAngles(format!(
            "ideal tetrahedron angles must be positive and sum to π, got {alpha}, {beta}, {gamma}"
        )));
    }
    Ok(lobachevsky(alpha) + lobachevsky(beta) + lobachevsky(gamma))
}

/// Area of a spherical (`Σ − π`) or hyperbolic (`π − Σ`) triangle from its
/// angles.
pub fn gauss_bonnet_area(am: &AngleMatrix, geometry: Geometry) -> Result<VolumeEstimate> {
    if am.n() != 2 {
        return Err(Error::InvalidArgument(format!(
            "angle-defect area needs a triangle, got n = {}",
            am.n()
        )));
    }
    let sum: f64 = am.pairs().iter().map(|p| p.2).sum();
    let area = match geometry {
        Geometry::Spherical => sum - PI,
        Geometry::Hyperbolic => PI - sum,
    };
    if !(area > 0.0) {
        return Err(Error::ClassificationMismatch {
            expected: geometry.to_string(),
            found: format!("angle sum {sum}"),
        });
    }
    Ok(VolumeEstimate::analytic(area, Method::GaussBonnet2D))
}

/// Area of the hyperbolic triangle with hyperboloid vertices `a, b, c`, from
/// the vertex angles between tangent vectors.
pub fn hyperbolic_triangle_area(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    fn angle_at(p: &[f64], q: &[f64], r: &[f64]) -> f64 {
        let tangent = |x: &[f64]| -> Vec<f64> {
            let k = mink_dot(x, p);
            x.iter().zip(p).map(|(xi, pi)| xi + k * pi).collect()
        };
        let tq = tangent(q);
        let tr = tangent(r);
        let cos = mink_dot(&tq, &tr) / (mink_dot(&tq, &tq) * mink_dot(&tr, &tr)).sqrt();
        cos.clamp(-1.0, 1.0).acos()
    }
    (PI - angle_at(a, b, c) - angle_at(b, c, a) - angle_at(c, a, b)).max(0.0)
}
