use serde::Serialize;

use super::{Matrix, SymMatrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues sorted descending with matching orthonormal eigenvector
/// columns.
#[derive(Clone, Debug, Serialize)]
pub struct EigenDecomposition {
    values: Vec<f64>,
    vectors: Matrix,
}

impl EigenDecomposition {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Columns are unit eigenvectors, column `i` paired with `values()[i]`.
    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i)
    }

    pub fn min_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::INFINITY)
    }

    pub fn max_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NEG_INFINITY)
    }

    /// Counts of (positive, negative, zero) eigenvalues with `|λ| ≤ zero_tol`
    /// treated as zero.
    pub fn inertia(&self, zero_tol: f64) -> (usize, usize, usize) {
        self.values.iter().fold((0, 0, 0), |(p, n, z), &l| {
            if l > zero_tol {
                (p + 1, n, z)
            } else if l < -zero_tol {
                (p, n + 1, z)
            } else {
                (p, n, z + 1)
            }
        })
    }

    /// `U·diag(f(λ))·Uᵀ`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let fv: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let u = &self.vectors;
        let m = u.rows();
        SymMatrix::from_upper(m, |i, j| (0..m).map(|k| u[(i, k)] * fv[k] * u[(j, k)]).sum())
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.map_values(|l| l)
    }
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
///
/// Each sweep annihilates every off-diagonal pair once with a plane
/// rotation; rotations accumulate into the eigenvector matrix, so the
/// columns stay orthonormal to rounding. Eigenvector signs are fixed so that
/// the entry of largest magnitude in each column is positive.
pub fn sym_eigen(a: &SymMatrix) -> Result<EigenDecomposition> {
    let m = a.dim();
    let mut w = a.as_matrix().clone();
    let mut v = Matrix::identity(m);
    let scale = a.max_abs();

    if scale > 0.0 {
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            let off: f64 = (0..m)
                .flat_map(|p| (p + 1..m).map(move |q| (p, q)))
                .map(|(p, q)| w[(p, q)] * w[(p, q)])
                .sum();
            if off.sqrt() <= 1e-15 * scale {
                converged = true;
                break;
            }
            for p in 0..m {
                for q in p + 1..m {
                    let apq = w[(p, q)];
                    if apq == 0.0 {
                        continue;
                    }
                    let app = w[(p, p)];
                    let aqq = w[(q, q)];
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..m {
                        let wkp = w[(k, p)];
                        let wkq = w[(k, q)];
                        w[(k, p)] = c * wkp - s * wkq;
                        w[(k, q)] = s * wkp + c * wkq;
                    }
                    for k in 0..m {
                        let wpk = w[(p, k)];
                        let wqk = w[(q, k)];
                        w[(p, k)] = c * wpk - s * wqk;
                        w[(q, k)] = s * wpk + c * wqk;
                    }
                    w[(p, q)] = 0.0;
                    w[(q, p)] = 0.0;
                    for k in 0..m {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
        if !converged {
            let off: f64 = (0..m)
                .flat_map(|p| (p + 1..m).map(move |q| (p, q)))
                .map(|(p, q)| w[(p, q)] * w[(p, q)])
                .sum();
            if off.sqrt() > 1e-12 * scale {
                return Err(Error::NoConvergence {
                    residual: off.sqrt(),
                });
            }
        }
    }

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| w[(j, j)].total_cmp(&w[(i, i)]));
    let values: Vec<f64> = order.iter().map(|&i| w[(i, i)]).collect();
    let mut vectors = Matrix::from_fn(m, m, |r, c| v[(r, order[c])]);
    for c in 0..m {
        let pivot = (0..m)
            .map(|r| vectors[(r, c)])
            .fold(0.0_f64, |best, x| if x.abs() > best.abs() { x } else { best });
        if pivot < 0.0 {
            for r in 0..m {
                vectors[(r, c)] = -vectors[(r, c)];
            }
        }
    }
    let out = EigenDecomposition { values, vectors };

    let residual = out.reconstruct().as_matrix().max_abs_diff(a.as_matrix());
    if residual > 1e-9 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NoConvergence { residual });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn orthonormality_error(u: &Matrix) -> f64 {
        (&u.transpose() * u).max_abs_diff(&Matrix::identity(u.rows()))
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let e = sym_eigen(&SymMatrix::identity(3)).unwrap();
        assert_eq!(e.values(), &[1.0, 1.0, 1.0]);
        assert!(orthonormality_error(e.vectors()) < 1e-10);
    }

    #[test]
    fn diagonal_spectrum_is_sorted() {
        let e = sym_eigen(&SymMatrix::diagonal(&[2.0, 5.0, -1.0])).unwrap();
        assert_eq!(e.values(), &[5.0, 2.0, -1.0]);
        let expected = Matrix::from_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert_eq!(e.vectors(), &expected);
    }

    #[test]
    fn random_6x6_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let a = SymMatrix::from_upper(6, |_, _| rng.random_range(-3.0..3.0));
            let e = sym_eigen(&a).unwrap();
            assert!(orthonormality_error(e.vectors()) <= 1e-10);
            let res = e.reconstruct().as_matrix().max_abs_diff(a.as_matrix());
            assert!(res <= 1e-9 * a.max_abs());
            assert!(e.values().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn zero_matrix() {
        let e = sym_eigen(&SymMatrix::diagonal(&[0.0, 0.0])).unwrap();
        assert_eq!(e.values(), &[0.0, 0.0]);
    }

    proptest! {
        // eigenvalues move continuously: a 1e-6 perturbation moves sorted
        // eigenvalues by at most 1e-4
        #[test]
        fn eigenvalues_are_continuous(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = SymMatrix::from_upper(5, |_, _| rng.random_range(-1.0..1.0));
            let b = SymMatrix::from_upper(5, |i, j| a[(i, j)] + rng.random_range(-1e-6..1e-6));
            let ea = sym_eigen(&a).unwrap();
            let eb = sym_eigen(&b).unwrap();
            for (x, y) in ea.values().iter().zip(eb.values()) {
                prop_assert!((x - y).abs() <= 1e-4);
            }
        }
    }
}
