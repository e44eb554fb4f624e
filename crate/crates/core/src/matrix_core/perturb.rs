use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{sym_eigen, zero_threshold, DiagonalScaling, SymMatrix};
use crate::error::{Error, Result};

const MAX_ATTEMPTS: usize = 64;

/// Minimum relative separation that counts as "simple".
const GAP_REL: f64 = 1e-8;

/// Result of [`perturb_to_simple_eigenvalues`].
#[derive(Clone, Debug, Serialize)]
pub struct Perturbation {
    pub scaling: DiagonalScaling,
    /// Minimum gap between nonzero eigenvalues of `D·A·D`
    /// (`+∞` when there are fewer than two).
    pub gap: f64,
    pub attempts: usize,
}

/// Smallest distance between consecutive nonzero eigenvalues of `a`.
pub fn nonzero_eigenvalue_gap(a: &SymMatrix) -> Result<f64> {
    let eig = sym_eigen(a)?;
    let zero = zero_threshold(a);
    let nz: Vec<f64> = eig
        .values()
        .iter()
        .copied()
        .filter(|l| l.abs() > zero)
        .collect();
    Ok(nz
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(f64::INFINITY, f64::min))
}

/// Finds a positive diagonal `D` with `max|d_i − 1| ≤ eps` such that every
/// nonzero eigenvalue of `D·A·D` is simple.
///
/// `A` must have at most one negative eigenvalue. The identity is tried
/// first; after that, diagonals are drawn uniformly from `[1−eps, 1+eps]`.
/// Scalings that leave a repeated nonzero eigenvalue form a measure-zero
/// set, so a random draw almost surely works; up to 64 draws are made.
pub fn perturb_to_simple_eigenvalues(a: &SymMatrix, eps: f64, seed: u64) -> Result<Perturbation> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let eig = sym_eigen(a)?;
    let (positive, negative, zero) = eig.inertia(zero_threshold(a));
    if negative > 1 {
        return Err(Error::Signature {
            positive,
            negative,
            zero,
        });
    }

    let m = a.dim();
    let accept = GAP_REL * a.max_abs().max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best_gap = 0.0_f64;
    for attempt in 0..=MAX_ATTEMPTS {
        let scaling = if attempt == 0 {
            DiagonalScaling::identity(m)
        } else {
            let d = (0..m)
                .map(|_| 1.0 + eps * rng.random_range(-1.0..=1.0))
                .collect();
            DiagonalScaling::new(d)?
        };
        let dad = a.congruent(&scaling);
        let gap = nonzero_eigenvalue_gap(&dad)?;
        if gap > accept {
            return Ok(Perturbation {
                scaling,
                gap,
                attempts: attempt,
            });
        }
        best_gap = best_gap.max(gap);
    }
    Err(Error::PerturbationFailed { best_gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_core::Matrix;

    fn rank(a: &SymMatrix) -> usize {
        let (p, n, _) = sym_eigen(a).unwrap().inertia(zero_threshold(a));
        p + n
    }

    #[test]
    fn distinct_spectrum_keeps_identity() {
        let a = SymMatrix::diagonal(&[3.0, 2.0, -1.0]);
        let p = perturb_to_simple_eigenvalues(&a, 0.01, 1).unwrap();
        assert_eq!(p.attempts, 0);
        assert_eq!(p.scaling, DiagonalScaling::identity(3));
    }

    #[test]
    fn identity_two_by_two_gets_split() {
        let a = SymMatrix::identity(2);
        let p = perturb_to_simple_eigenvalues(&a, 0.01, 7).unwrap();
        assert!(p.attempts >= 1);
        assert!(p.scaling.distance_to_identity() <= 0.01);
        let d = p.scaling.entries();
        // DAD = diag(d0², d1²)
        assert!((d[0] * d[0] - d[1] * d[1]).abs() > 0.0);
        assert!((p.gap - (d[0] * d[0] - d[1] * d[1]).abs()).abs() < 1e-12);
    }

    #[test]
    fn rank_three_semidefinite_five_by_five() {
        // Q·diag(2,2,1,0,0)·Qᵀ: repeated eigenvalue and a two-dimensional kernel
        let x = Matrix::from_rows(&[
            vec![1.0, 0.3, -0.2, 0.5, 0.1],
            vec![0.0, 1.0, 0.4, -0.3, 0.2],
            vec![0.2, -0.1, 1.0, 0.0, 0.6],
            vec![0.5, 0.2, 0.1, 1.0, -0.4],
            vec![-0.3, 0.6, 0.2, 0.1, 1.0],
        ])
        .unwrap();
        let q = {
            // Gram–Schmidt on the columns
            let mut cols: Vec<Vec<f64>> = Vec::new();
            for j in 0..5 {
                let mut c = x.column(j);
                for prev in &cols {
                    let dot: f64 = c.iter().zip(prev).map(|(a, b)| a * b).sum();
                    for (ci, pi) in c.iter_mut().zip(prev) {
                        *ci -= dot * pi;
                    }
                }
                let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
                cols.push(c.into_iter().map(|v| v / norm).collect());
            }
            Matrix::from_columns(&cols).unwrap()
        };
        let lam = Matrix::from_diagonal(&[2.0, 2.0, 1.0, 0.0, 0.0]);
        let a = SymMatrix::symmetrize(&(&(&q * &lam) * &q.transpose()));
        assert!(nonzero_eigenvalue_gap(&a).unwrap() < 1e-8);
        let p = perturb_to_simple_eigenvalues(&a, 0.01, 99).unwrap();
        assert!(p.scaling.distance_to_identity() <= 0.01);
        let dad = a.congruent(&p.scaling);
        let gap = nonzero_eigenvalue_gap(&dad).unwrap();
        assert!(gap > 0.0);
        assert_eq!(rank(&dad), rank(&a));
    }

    #[test]
    fn rejects_two_negative_eigenvalues() {
        let a = SymMatrix::diagonal(&[1.0, -1.0, -2.0]);
        assert!(matches!(
            perturb_to_simple_eigenvalues(&a, 0.01, 0),
            Err(Error::Signature { negative: 2, .. })
        ));
    }
}
