use serde::{Deserialize, Serialize};

use super::{dist_unchecked, face_normals, mink_dot};
use crate::error::{Error, Result};
use crate::gram::SimplexVertices;
use crate::matrix_core::Matrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InscribedBall {
    pub center: Vec<f64>,
    pub radius: f64,
    /// `max_i |d(center, face_i) − radius|`.
    pub equidistance_residual: f64,
}

/// The center is the point at equal signed distance `r` from every face on
/// the inner side. With inward unit normals `w_i` this reads
/// `⟨x, w_i⟩ = sinh r` for all `i`, which is linear in `x` up to the final
/// normalization onto the hyperboloid.
pub fn inscribed_ball(vertices: &SimplexVertices) -> Result<InscribedBall> {
    let w = face_normals(vertices)?;
    let m = w.len();
    let n = m - 1;
    // rows are w_iᵀ·S
    let system = Matrix::from_fn(m, m, |i, k| if k == n { -w[i][k] } else { w[i][k] });
    let y = system
        .lu()
        .solve(&vec![1.0; m])
        .map_err(|_| Error::DegenerateSimplex("singular normal system".into()))?;
    let form = mink_dot(&y, &y);
    if !(form < 0.0) || y[n] <= 0.0 {
        return Err(Error::DegenerateSimplex(format!(
            "equidistant point is not inside the simplex (form {form:e})"
        )));
    }
    let k = (-form).sqrt();
    let center: Vec<f64> = y.iter().map(|v| v / k).collect();
    let radius = (1.0 / k).asinh();
    let equidistance_residual = w
        .iter()
        .map(|wi| (mink_dot(&center, wi).asinh() - radius).abs())
        .fold(0.0_f64, f64::max);
    Ok(InscribedBall {
        center,
        radius,
        equidistance_residual,
    })
}

impl InscribedBall {
    /// Smallest distance from `x` to the face hyperplanes, negative if `x` is
    /// on the outer side of some face.
    pub fn min_face_distance(normals: &[Vec<f64>], x: &[f64]) -> f64 {
        normals
            .iter()
            .map(|w| mink_dot(x, w).asinh())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn distance_to(&self, x: &[f64]) -> f64 {
        dist_unchecked(&self.center, x)
    }
}
