use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::{check_on_hyperboloid, mink_dot};
use crate::error::{Error, Result};
use crate::gram::{Geometry, SimplexVertices};
use crate::volume_engine::mc::{run_chunked, MCConfig, Method, VolumeEstimate};

/// Share of the budget drawn uniformly from the simplex; the rest is split
/// evenly among proposals concentrated at each vertex.
const UNIFORM_SHARE: f64 = 0.5;

/// Klein-model image of a hyperbolic simplex, prepared for importance
/// sampling of `∫ (1−‖t‖²)^{−(n+1)/2} g dt`.
///
/// A point with barycentric coordinates `λ` is `t = Σ λ_j p_j` with
/// `p_j = v_j,space / v_j,time`, and `1 − ‖t‖² = λᵀMλ` with
/// `M_jk = −⟨v_j,v_k⟩ / (v_j,time·v_k,time)`. All entries of `M` are
/// positive, so the density never suffers cancellation even when vertices
/// sit far out.
///
/// The proposal mixes the uniform distribution with one component per
/// vertex `i` in which `s = 1 − λ_i` has density `a·s^{a−1}`,
/// `a = (n−1)/2`, and the remaining coordinates are uniform given `s`. Near
/// an ideal vertex the integrand grows like `s^{−(n+1)/2}`, which this
/// component matches, so importance weights stay bounded as the simplex
/// degenerates toward an ideal one.
#[derive(Clone, Debug)]
pub struct KleinSimplex {
    n: usize,
    vertices: Vec<Vec<f64>>,
    time: Vec<f64>,
    form: Vec<f64>,
    euclidean_volume: f64,
}

impl KleinSimplex {
    pub fn new(vertices: &SimplexVertices) -> Result<Self> {
        if vertices.geometry() != Geometry::Hyperbolic {
            return Err(Error::ClassificationMismatch {
                expected: Geometry::Hyperbolic.to_string(),
                found: vertices.geometry().to_string(),
            });
        }
        let n = vertices.n();
        let vs = vertices.vertices();
        let time: Vec<f64> = vs.iter().map(|v| v[n]).collect();
        let m = n + 1;
        let mut form = vec![0.0; m * m];
        for j in 0..m {
            for k in 0..m {
                let g = if j == k { 1.0 } else { (-mink_dot(&vs[j], &vs[k])).max(1.0) };
                form[j * m + k] = g / (time[j] * time[k]);
            }
        }
        let klein: Vec<Vec<f64>> = vs
            .iter()
            .map(|v| v[..n].iter().map(|x| x / v[n]).collect())
            .collect();
        let edges = crate::matrix_core::Matrix::from_fn(n, n, |r, c| klein[c + 1][r] - klein[0][r]);
        let factorial: f64 = (1..=n).map(|k| k as f64).product();
        let euclidean_volume = edges.determinant().abs() / factorial;
        if !(euclidean_volume > 0.0) {
            return Err(Error::DegenerateSimplex("flat Klein simplex".into()));
        }
        Ok(KleinSimplex {
            n,
            vertices: vs,
            time,
            form,
            euclidean_volume,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Euclidean volume of the Klein-model simplex.
    pub fn euclidean_volume(&self) -> f64 {
        self.euclidean_volume
    }

    /// `1 − ‖t‖²` at barycentric coordinates `λ`.
    pub fn one_minus_norm2(&self, lambda: &[f64]) -> f64 {
        let m = self.n + 1;
        let mut acc = 0.0;
        for j in 0..m {
            let row = &self.form[j * m..(j + 1) * m];
            let inner: f64 = row.iter().zip(lambda).map(|(a, l)| a * l).sum();
            acc += lambda[j] * inner;
        }
        acc
    }

    /// Hyperboloid point with barycentric Klein coordinates `λ`.
    pub fn lift(&self, lambda: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n + 1];
        for (v, (&l, &t)) in self.vertices.iter().zip(lambda.iter().zip(&self.time)) {
            for k in 0..=n {
                y[k] += l * v[k] / t;
            }
        }
        let s = self.one_minus_norm2(lambda).sqrt();
        y.iter().map(|x| x / s).collect()
    }

    /// Coefficients `c_j` with `cosh d(y, x) = Σ λ_j c_j / √(λᵀMλ)`.
    pub fn distance_coefficients(&self, x: &[f64]) -> Vec<f64> {
        self.vertices
            .iter()
            .zip(&self.time)
            .map(|(v, t)| -mink_dot(v, x) / t)
            .collect()
    }

    /// Draws `λ` from the mixture proposal and returns the importance weight
    /// `(1−‖t‖²)^{−(n+1)/2} / (V_E·q(λ))`.
    pub(crate) fn draw(&self, rng: &mut ChaCha8Rng, lambda: &mut [f64]) -> f64 {
        let n = self.n;
        let m = n + 1;
        let mixture = n >= 2;
        let a = (n as f64 - 1.0) / 2.0;
        if !mixture || rng.random::<f64>() < UNIFORM_SHARE {
            dirichlet_into(rng, lambda);
        } else {
            let i = rng.random_range(0..m);
            let s = rng.random::<f64>().powf(1.0 / a);
            let mut rest = vec![0.0; n];
            dirichlet_into(rng, &mut rest);
            let mut it = rest.into_iter();
            for (j, l) in lambda.iter_mut().enumerate() {
                *l = if j == i { 1.0 - s } else { s * it.next().unwrap_or(0.0) };
            }
        }
        let density = if mixture {
            let per_vertex = (1.0 - UNIFORM_SHARE) / m as f64;
            let mut q = UNIFORM_SHARE;
            for j in 0..m {
                let s: f64 = lambda.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, l)| l).sum();
                q += per_vertex * (a / n as f64) * s.powf(a - n as f64);
            }
            q
        } else {
            1.0
        };
        let h = self.one_minus_norm2(lambda);
        h.powf(-(m as f64) / 2.0) / density
    }

    /// Hyperbolic volume.
    pub fn volume(&self, mc: &MCConfig) -> Result<VolumeEstimate> {
        let out = self.tail_estimates(None, &[], mc)?;
        Ok(out[0])
    }

    /// Volume of the simplex outside `B_R(x)` for every `R` in `radii`, all
    /// from the same sample points. Index 0 of the result is the full
    /// volume, then one entry per radius.
    fn tail_estimates(
        &self,
        x: Option<&[f64]>,
        radii: &[f64],
        mc: &MCConfig,
    ) -> Result<Vec<VolumeEstimate>> {
        let m = self.n + 1;
        let coeffs = x.map(|x| self.distance_coefficients(x));
        let cosh_r: Vec<f64> = radii.iter().map(|r| r.cosh()).collect();
        let stats = run_chunked(mc, 1 + radii.len(), |rng, buf| {
            let mut lambda = vec![0.0; m];
            let w = self.draw(rng, &mut lambda);
            buf[0] = w;
            if let Some(c) = &coeffs {
                let num: f64 = lambda.iter().zip(c).map(|(l, cj)| l * cj).sum();
                let cosh_d = num / self.one_minus_norm2(&lambda).sqrt();
                for (slot, (&r, &ch)) in buf[1..].iter_mut().zip(radii.iter().zip(&cosh_r)) {
                    *slot = if r <= 0.0 || cosh_d > ch { w } else { 0.0 };
                }
            }
        })?;
        Ok(stats
            .iter()
            .map(|w| VolumeEstimate::from_stats(w, self.euclidean_volume, Method::KleinMC))
            .collect())
    }
}

fn dirichlet_into(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    let mut total = 0.0;
    for x in out.iter_mut() {
        *x = rng.sample::<f64, _>(Exp1);
        total += *x;
    }
    for x in out.iter_mut() {
        *x /= total;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailVolumeResult {
    pub radius: f64,
    pub estimate: VolumeEstimate,
}

/// `vol(σ − B_R(x))` for each radius, sharing sample points across radii so
/// that the sequence is nonincreasing for every seed.
pub fn tail_volumes(
    vertices: &SimplexVertices,
    x: &[f64],
    radii: &[f64],
    mc: &MCConfig,
) -> Result<Vec<TailVolumeResult>> {
    if x.len() != vertices.n() + 1 {
        return Err(Error::DimensionMismatch {
            expected: vertices.n() + 1,
            found: x.len(),
        });
    }
    check_on_hyperboloid(x)?;
    if let Some(r) = radii.iter().find(|r| !(**r >= 0.0)) {
        return Err(Error::InvalidArgument(format!("radius must be nonnegative, got {r}")));
    }
    let ks = KleinSimplex::new(vertices)?;
    let est = ks.tail_estimates(Some(x), radii, mc)?;
    Ok(radii
        .iter()
        .zip(&est[1..])
        .map(|(&radius, &estimate)| TailVolumeResult { radius, estimate })
        .collect())
}

pub fn tail_volume(
    vertices: &SimplexVertices,
    x: &[f64],
    radius: f64,
    mc: &MCConfig,
) -> Result<TailVolumeResult> {
    Ok(tail_volumes(vertices, x, &[radius], mc)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::{angle_gram_from_angles, vertices_from_angle_gram, AngleMatrix};
    use crate::hyperbolic_geom::inscribed_ball;
    use crate::volume_engine::mc::within_se;
    use std::f64::consts::PI;

    fn triangle(a: f64, b: f64, c: f64) -> SimplexVertices {
        let am = AngleMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 1) => a,
            (0, 2) => b,
            _ => c,
        })
        .unwrap();
        vertices_from_angle_gram(&angle_gram_from_angles(&am).unwrap()).unwrap()
    }

    #[test]
    fn barycentric_form_matches_lift() {
        let v = triangle(0.4, 0.5, 0.6);
        let ks = KleinSimplex::new(&v).unwrap();
        let lambda = [0.2, 0.3, 0.5];
        let y = ks.lift(&lambda);
        assert!((mink_dot(&y, &y) + 1.0).abs() < 1e-12);
        // t = Σ λ_j p_j directly
        let vs = v.vertices();
        let t: Vec<f64> = (0..2)
            .map(|k| (0..3).map(|j| lambda[j] * vs[j][k] / vs[j][2]).sum())
            .collect();
        let direct = 1.0 - t.iter().map(|x| x * x).sum::<f64>();
        assert!((ks.one_minus_norm2(&lambda) - direct).abs() < 1e-12);
    }

    #[test]
    fn triangle_area_is_angle_defect() {
        let (a, b, c) = (0.4, 0.5, 0.6);
        let v = triangle(a, b, c);
        let est = KleinSimplex::new(&v)
            .unwrap()
            .volume(&MCConfig::new(1, 200_000))
            .unwrap();
        let exact = PI - a - b - c;
        assert!(within_se(est.value, exact, est.std_error, 4.0), "{est:?} vs {exact}");
        assert!(!est.variance_overflow);
    }

    #[test]
    fn near_ideal_triangle_has_bounded_error() {
        let eps = 1e-3;
        let v = triangle(eps, eps, eps);
        let est = KleinSimplex::new(&v)
            .unwrap()
            .volume(&MCConfig::new(2, 200_000))
            .unwrap();
        let exact = PI - 3.0 * eps;
        assert!(est.relative_error() < 0.01, "{est:?}");
        assert!(within_se(est.value, exact, est.std_error, 4.0), "{est:?} vs {exact}");
    }

    #[test]
    fn tail_volumes_are_monotone_and_exhaust() {
        let v = triangle(0.3, 0.5, 0.7);
        let ball = inscribed_ball(&v).unwrap();
        let radii = [0.0, 1.0, 2.0, 4.0, 8.0, 30.0];
        let mc = MCConfig::new(3, 50_000);
        let tails = tail_volumes(&v, &ball.center, &radii, &mc).unwrap();
        let full = KleinSimplex::new(&v).unwrap().volume(&mc).unwrap();
        assert_eq!(tails[0].estimate.value, full.value);
        for w in tails.windows(2) {
            assert!(w[1].estimate.value <= w[0].estimate.value);
        }
        assert_eq!(tails[5].estimate.value, 0.0);
        let single = tail_volume(&v, &ball.center, 2.0, &mc).unwrap();
        assert_eq!(single.estimate.value, tails[2].estimate.value);
    }

    #[test]
    fn tail_rejects_bad_inputs() {
        let v = triangle(0.3, 0.5, 0.7);
        let mc = MCConfig::new(3, 100);
        assert!(tail_volume(&v, &[0.0, 0.0, 2.0], 1.0, &mc).is_err());
        assert!(tail_volume(&v, &[0.0, 0.0, 1.0], -1.0, &mc).is_err());
        assert!(tail_volume(&v, &[0.0, 0.0, 1.0], 1.0, &MCConfig::new(0, 0)).is_err());
    }
}
