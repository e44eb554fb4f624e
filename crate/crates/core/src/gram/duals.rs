use super::{AngleGramMatrix, DistanceGramMatrix, Geometry, Tag};
use crate::error::{Error, Result};
use crate::matrix_core::{sym_eigen, zero_threshold, DiagonalScaling, SymMatrix};

/// `D·M⁻¹·D` (times `sign`) with `d_i = 1/√(sign·(M⁻¹)_ii)`, symmetrized and
/// with the diagonal snapped to one.
fn normalized_inverse(m: &SymMatrix, sign: f64) -> Result<(SymMatrix, DiagonalScaling)> {
    let inv = m.as_matrix().inverse().map_err(|_| Error::DegenerateSimplex("singular Gram matrix".into()))?;
    let dim = m.dim();
    let mut d = Vec::with_capacity(dim);
    for i in 0..dim {
        let x = sign * inv[(i, i)];
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::NotHyperbolicGram(format!(
                "diagonal entry {i} of the scaled inverse is {x:e}"
            )));
        }
        d.push(1.0 / x.sqrt());
    }
    let mut out = inv.scale_both(&d).scale(sign);
    for i in 0..dim {
        out[(i, i)] = 1.0;
    }
    Ok((SymMatrix::symmetrize(&out), DiagonalScaling::new(d)?))
}

fn expect_geometry(found: Geometry, expected: Geometry) -> Result<()> {
    if found == expected {
        Ok(())
    } else {
        Err(Error::ClassificationMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        })
    }
}

fn expect_tag(a: &AngleGramMatrix, expected: Tag) -> Result<()> {
    if a.tag() == expected {
        Ok(())
    } else {
        Err(Error::ClassificationMismatch {
            expected: expected.to_string(),
            found: a.tag().to_string(),
        })
    }
}

/// Angle Gram of a spherical simplex from its distance Gram:
/// `G* = D·G⁻¹·D` with `d_i = 1/√((G⁻¹)_ii)`.
pub fn spherical_dual(g: &DistanceGramMatrix) -> Result<(AngleGramMatrix, DiagonalScaling)> {
    expect_geometry(g.geometry(), Geometry::Spherical)?;
    if g.matrix().as_matrix().cholesky().is_none() {
        return Err(Error::DegenerateSimplex(
            "distance Gram is not positive definite".into(),
        ));
    }
    let (dual, d) = normalized_inverse(g.matrix(), 1.0)
        .map_err(|_| Error::DegenerateSimplex("singular distance Gram".into()))?;
    let a = AngleGramMatrix::with_default_tol(dual)?;
    expect_tag(&a, Tag::Spherical)?;
    Ok((a, d))
}

/// Inverse of [`spherical_dual`]; the formula is the same since the map is
/// an involution.
pub fn spherical_distance_from_angle(
    a: &AngleGramMatrix,
) -> Result<(DistanceGramMatrix, DiagonalScaling)> {
    expect_tag(a, Tag::Spherical)?;
    let (g, d) = normalized_inverse(a.matrix(), 1.0)
        .map_err(|_| Error::DegenerateSimplex("singular angle Gram".into()))?;
    Ok((DistanceGramMatrix::new(g, Geometry::Spherical)?, d))
}

/// Angle Gram of a hyperbolic simplex from its distance Gram:
/// `G* = −D·G⁻¹·D` with `d_i = 1/√(−(G⁻¹)_ii)`.
///
/// For a segment (`n = 1`) the two normals are ultraparallel and the
/// off-diagonal entry comes out as `−cosh d`.
pub fn hyperbolic_dual(g: &DistanceGramMatrix) -> Result<(AngleGramMatrix, DiagonalScaling)> {
    expect_geometry(g.geometry(), Geometry::Hyperbolic)?;
    let eig = sym_eigen(g.matrix())?;
    let (positive, negative, zero) = eig.inertia(zero_threshold(g.matrix()));
    if positive != 1 || zero != 0 {
        return Err(Error::NotHyperbolicGram(format!(
            "−G has signature ({negative},{positive}) with {zero} zero eigenvalues"
        )));
    }
    let (dual, d) = normalized_inverse(g.matrix(), -1.0)?;
    let a = AngleGramMatrix::with_default_tol(dual)?;
    expect_tag(&a, Tag::Hyperbolic)?;
    Ok((a, d))
}

/// Distance Gram of the hyperbolic simplex with angle Gram `a`:
/// `G = −D·A⁻¹·D` with `d_i = 1/√(−(A⁻¹)_ii)`.
pub fn hyperbolic_distance_from_angle(
    a: &AngleGramMatrix,
) -> Result<(DistanceGramMatrix, DiagonalScaling)> {
    expect_tag(a, Tag::Hyperbolic)?;
    let (g, d) = normalized_inverse(a.matrix(), -1.0)?;
    Ok((DistanceGramMatrix::new(g, Geometry::Hyperbolic)?, d))
}
