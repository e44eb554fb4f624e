use serde::Serialize;

use super::{
    dot, spherical_distance_from_angle, AngleGramMatrix, DistanceGramMatrix, Geometry, Tag,
};
use crate::error::{Error, Result};
use crate::hyperbolic_geom::mink_dot;
use crate::matrix_core::{
    determinant, principal_submatrix, quartic_root_from_eigen, sym_eigen, zero_threshold,
    adjugate, Matrix, SymMatrix,
};

const NORM_SLACK: f64 = 1e-12;
const INDEPENDENCE_REL: f64 = 1e-14;

/// Vertices of a spherical or hyperbolic n-simplex, stored as the columns of
/// an `(n+1)×(n+1)` matrix. Hyperbolic vertices live on the upper sheet of
/// `⟨x,x⟩ = −1` with the time coordinate last.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimplexVertices {
    n: usize,
    geometry: Geometry,
    v: Matrix,
}

impl SimplexVertices {
    pub fn new(v: Matrix, geometry: Geometry) -> Result<Self> {
        if !v.is_square() || v.rows() < 2 {
            return Err(Error::DimensionMismatch {
                expected: v.rows().max(2),
                found: v.cols(),
            });
        }
        let m = v.rows();
        for j in 0..m {
            let col = v.column(j);
            let euclid = dot(&col, &col);
            match geometry {
                Geometry::Spherical => {
                    if (euclid - 1.0).abs() > NORM_SLACK {
                        return Err(Error::OffHyperboloid { value: euclid });
                    }
                }
                Geometry::Hyperbolic => {
                    let form = mink_dot(&col, &col);
                    if (form + 1.0).abs() > NORM_SLACK * euclid.max(1.0) || col[m - 1] <= 0.0 {
                        return Err(Error::OffHyperboloid { value: form });
                    }
                }
            }
        }
        let scale: f64 = (0..m).map(|j| dot(&v.column(j), &v.column(j)).sqrt()).product();
        let det = v.determinant();
        if !(det.abs() > INDEPENDENCE_REL * scale) {
            return Err(Error::DegenerateSimplex(format!(
                "vertices are linearly dependent (det {det:e})"
            )));
        }
        Ok(SimplexVertices { n: m - 1, geometry, v })
    }

    /// Each inner vector is one vertex.
    pub fn from_vertices(vertices: &[Vec<f64>], geometry: Geometry) -> Result<Self> {
        Self::new(Matrix::from_columns(vertices)?, geometry)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    /// Vertices as columns.
    pub fn matrix(&self) -> &Matrix {
        &self.v
    }

    pub fn vertex(&self, i: usize) -> Vec<f64> {
        self.v.column(i)
    }

    pub fn vertices(&self) -> Vec<Vec<f64>> {
        (0..=self.n).map(|i| self.vertex(i)).collect()
    }

    /// Pairwise products: Euclidean, or minus the Minkowski form.
    pub fn distance_gram(&self) -> Result<DistanceGramMatrix> {
        let vs = self.vertices();
        let m = self.n + 1;
        let g = SymMatrix::from_upper(m, |i, j| {
            if i == j {
                1.0
            } else {
                match self.geometry {
                    Geometry::Spherical => dot(&vs[i], &vs[j]).clamp(-1.0, 1.0),
                    Geometry::Hyperbolic => (-mink_dot(&vs[i], &vs[j])).max(1.0),
                }
            }
        });
        DistanceGramMatrix::new(g, self.geometry)
    }

    /// Inward unit normals `w_i` of the faces, face `i` opposite vertex `i`,
    /// with `(v_j, w_i) = 0` for `j ≠ i` and `(v_i, w_i) > 0` in the ambient
    /// form.
    pub fn unit_normals(&self) -> Result<Vec<Vec<f64>>> {
        let m = self.n + 1;
        let inv_t = self
            .v
            .transpose()
            .inverse()
            .map_err(|_| Error::DegenerateSimplex("singular vertex matrix".into()))?;
        let mut out = Vec::with_capacity(m);
        for i in 0..m {
            let mut w = inv_t.column(i);
            let norm2 = match self.geometry {
                Geometry::Spherical => dot(&w, &w),
                Geometry::Hyperbolic => {
                    // S·(Bᵀ)⁻¹ is biorthogonal to B under the Minkowski form
                    w[m - 1] = -w[m - 1];
                    mink_dot(&w, &w)
                }
            };
            if !(norm2 > 0.0) {
                return Err(Error::DegenerateSimplex(format!(
                    "face {i} normal is not spacelike ({norm2:e})"
                )));
            }
            let s = norm2.sqrt();
            out.push(w.into_iter().map(|x| x / s).collect());
        }
        Ok(out)
    }
}

/// Cholesky factorisation `G = BᵀB`; vertex `i` is column `i` of `B`.
pub fn vertices_from_spherical_gram(g: &DistanceGramMatrix) -> Result<SimplexVertices> {
    if g.geometry() != Geometry::Spherical {
        return Err(Error::ClassificationMismatch {
            expected: Geometry::Spherical.to_string(),
            found: g.geometry().to_string(),
        });
    }
    let l = g
        .matrix()
        .as_matrix()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite {
            min_eigenvalue: sym_eigen(g.matrix()).map(|e| e.min_value()).unwrap_or(f64::NAN),
        })?;
    let mut b = l.transpose();
    // snap column norms onto the sphere
    for j in 0..b.cols() {
        let c = b.column(j);
        let s = dot(&c, &c).sqrt();
        for i in 0..b.rows() {
            b[(i, j)] /= s;
        }
    }
    SimplexVertices::new(b, Geometry::Spherical)
}

/// Solves `−BᵀSB = G` with `S = diag(1,…,1,−1)`. The first vertex is placed
/// at the hyperboloid apex `e_{n+1}`; vertex `j` then has time coordinate
/// `G_1j` and spatial parts given by the Cholesky factor of
/// `M_ij = G_1i·G_1j − G_ij` (`i, j ≥ 2`).
pub fn vertices_from_hyperbolic_gram(g: &DistanceGramMatrix) -> Result<SimplexVertices> {
    if g.geometry() != Geometry::Hyperbolic {
        return Err(Error::ClassificationMismatch {
            expected: Geometry::Hyperbolic.to_string(),
            found: g.geometry().to_string(),
        });
    }
    let gm = g.matrix();
    let m = gm.dim();
    let n = m - 1;
    let schur = Matrix::from_fn(n, n, |i, j| gm[(0, i + 1)] * gm[(0, j + 1)] - gm[(i + 1, j + 1)]);
    let l = schur.cholesky().ok_or_else(|| {
        Error::NotHyperbolicGram("−G does not have signature (n,1)".into())
    })?;
    let mut b = Matrix::zeros(m, m);
    b[(n, 0)] = 1.0;
    for j in 1..m {
        for k in 0..n {
            b[(k, j)] = l[(j - 1, k)];
        }
        b[(n, j)] = gm[(0, j)];
    }
    // re-project onto the hyperboloid to absorb rounding in the factor
    for j in 1..m {
        let spatial: f64 = (0..n).map(|k| b[(k, j)] * b[(k, j)]).sum();
        b[(n, j)] = (1.0 + spatial).sqrt();
    }
    SimplexVertices::new(b, Geometry::Hyperbolic)
}

/// `A = B·U·S·Uᵀ·B` with `B = (A²)^{1/4}` and `U` the eigenvectors of `A`,
/// the negative-eigenvalue vector last.
#[derive(Clone, Debug, Serialize)]
pub struct LorentzDecomposition {
    pub b: SymMatrix,
    pub u: Matrix,
    /// Eigenvalues of `A`, descending; the last one is negative.
    pub eigenvalues: Vec<f64>,
}

impl LorentzDecomposition {
    fn sign(&self) -> Vec<f64> {
        let m = self.eigenvalues.len();
        (0..m).map(|k| if k + 1 == m { -1.0 } else { 1.0 }).collect()
    }

    /// `‖B·U·S·Uᵀ·B − A‖_max`.
    pub fn reconstruction_residual(&self, a: &SymMatrix) -> f64 {
        let s = Matrix::from_diagonal(&self.sign());
        let b = self.b.as_matrix();
        let prod = &(&(&(b * &self.u) * &s) * &self.u.transpose()) * b;
        prod.max_abs_diff(a.as_matrix())
    }

    /// `‖Uᵀ·B·A⁻¹·B·U − S‖_max`.
    pub fn dual_residual(&self, a: &SymMatrix) -> Result<f64> {
        let inv = a
            .as_matrix()
            .inverse()
            .map_err(|_| Error::RankDeficient { det: determinant(a) })?;
        let b = self.b.as_matrix();
        let prod = &(&(&(&self.u.transpose() * b) * &inv) * b) * &self.u;
        Ok(prod.max_abs_diff(&Matrix::from_diagonal(&self.sign())))
    }

    /// `|λ_{n+1}|`.
    pub fn negative_eigenvalue_magnitude(&self) -> f64 {
        self.eigenvalues.last().map_or(0.0, |l| l.abs())
    }

    /// Eigenvector of the negative eigenvalue.
    pub fn negative_eigenvector(&self) -> Vec<f64> {
        self.u.column(self.u.cols() - 1)
    }

    /// `Uᵀ·B⁻¹`; its columns span the cone over the simplex.
    pub fn cone_map(&self) -> Matrix {
        let m = self.eigenvalues.len();
        Matrix::from_fn(m, m, |k, i| self.u[(i, k)] / self.eigenvalues[k].abs().sqrt())
    }

    /// `S·Uᵀ·B`; column `i` is the inward unit normal of face `i`.
    pub fn normals(&self) -> Matrix {
        let m = self.eigenvalues.len();
        let s = self.sign();
        Matrix::from_fn(m, m, |k, i| s[k] * self.u[(i, k)] * self.eigenvalues[k].abs().sqrt())
    }
}

/// Eigen-decomposes an angle Gram with signature `(n,1)`.
pub fn decompose_lorentz(a: &AngleGramMatrix) -> Result<LorentzDecomposition> {
    decompose_lorentz_sym(a.matrix())
}

pub(crate) fn decompose_lorentz_sym(a: &SymMatrix) -> Result<LorentzDecomposition> {
    let eig = sym_eigen(a)?;
    let (positive, negative, zero) = eig.inertia(zero_threshold(a));
    if negative != 1 || zero != 0 {
        return Err(Error::Signature {
            positive,
            negative,
            zero,
        });
    }
    let b = quartic_root_from_eigen(&eig)?;
    Ok(LorentzDecomposition {
        b,
        u: eig.vectors().clone(),
        eigenvalues: eig.values().to_vec(),
    })
}

/// Vertices of the simplex with angle Gram `a`.
///
/// Hyperbolic: vertex `i` is `Uᵀ·B⁻¹·e_i` scaled onto the hyperboloid, which
/// lands on the upper sheet once the negative eigenvector is oriented with
/// positive entries. Spherical: dual distance Gram, then Cholesky.
pub fn vertices_from_angle_gram(a: &AngleGramMatrix) -> Result<SimplexVertices> {
    match a.tag() {
        Tag::Spherical => {
            let (g, _) = spherical_distance_from_angle(a)?;
            vertices_from_spherical_gram(&g)
        }
        Tag::Hyperbolic => {
            let dec = decompose_lorentz(a)?;
            let m = a.n() + 1;
            if dec.negative_eigenvector().iter().any(|&x| x <= 0.0) {
                return Err(Error::DegenerateSimplex(
                    "negative eigenvector has mixed signs; no sheet choice places every vertex on H^n"
                        .into(),
                ));
            }
            let c = dec.cone_map();
            let mut v = Matrix::zeros(m, m);
            for i in 0..m {
                let u = c.column(i);
                let form = mink_dot(&u, &u);
                if !(form < 0.0) {
                    return Err(Error::DegenerateSimplex(format!(
                        "cone generator {i} is not timelike ({form:e})"
                    )));
                }
                let s = (-form).sqrt();
                for k in 0..m {
                    v[(k, i)] = u[k] / s;
                }
            }
            SimplexVertices::new(v, Geometry::Hyperbolic)
        }
        Tag::ClosureBoundary => Err(Error::BoundaryMatrix),
        Tag::Invalid => Err(Error::ClassificationMismatch {
            expected: "Spherical or Hyperbolic".into(),
            found: Tag::Invalid.to_string(),
        }),
    }
}

/// Whether every adjugate entry of `a` is bounded away from zero
/// (`min |ad_ij| > 1e-12`), for matrices whose maximal proper principal
/// submatrices are positive definite and whose determinant is not positive.
pub fn adjugate_positivity_check(a: &SymMatrix) -> Result<bool> {
    let m = a.dim();
    if m < 2 {
        return Err(Error::LemmaHypotheses("need side ≥ 2".into()));
    }
    for k in 0..m {
        let sub = principal_submatrix(a, k)?;
        let min = sym_eigen(&sub)?.min_value();
        if !(min > 0.0) {
            return Err(Error::LemmaHypotheses(format!(
                "principal submatrix without index {k} is not positive definite (λ_min {min:e})"
            )));
        }
    }
    let det = determinant(a);
    if det > zero_threshold(a) {
        return Err(Error::LemmaHypotheses(format!("det = {det:e} > 0")));
    }
    let adj = adjugate(a);
    let min = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| adj[(i, j)].abs())
        .fold(f64::INFINITY, f64::min);
    Ok(min > 1e-12)
}
