use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::{erfc, erfc_inv};

use super::mc::{run_scalar, MCConfig, Method, VolumeEstimate};
use crate::error::{Error, Result};
use crate::matrix_core::{sym_eigen, Matrix, SymMatrix};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    -SQRT_2 * erfc_inv(2.0 * p)
}

/// Uniform on the open interval `(0, 1)`.
pub(crate) fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.random::<u64>() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

fn cholesky_or_err(m: &SymMatrix) -> Result<Matrix> {
    m.as_matrix().cholesky().ok_or_else(|| Error::NotPositiveDefinite {
        min_eigenvalue: sym_eigen(m).map(|e| e.min_value()).unwrap_or(f64::NAN),
    })
}

/// `P(X ≥ 0)` for `X ~ N(0, M)`, estimated by sequential conditioning on the
/// Cholesky factor `M = L·Lᵀ`: coordinate `i` of `X = L·Z` is nonnegative
/// iff `Z_i ≥ a_i(Z_1..Z_{i−1})`, so each draw contributes
/// `Π_i Φ(−a_i)` with `Z_i` sampled from the matching truncated normal.
/// Every draw is an unbiased estimate in `[0, 1]`; for diagonal `M` it is
/// exactly `2^{−m}`.
pub fn orthant_probability(m: &SymMatrix, mc: &MCConfig) -> Result<VolumeEstimate> {
    let l = cholesky_or_err(m)?;
    let dim = m.dim();
    let stats = run_scalar(mc, |rng| {
        let mut z = vec![0.0; dim];
        let mut weight = 1.0;
        for i in 0..dim {
            let partial: f64 = (0..i).map(|j| l[(i, j)] * z[j]).sum();
            let a = -partial / l[(i, i)];
            let p = normal_cdf(-a);
            weight *= p;
            if weight == 0.0 {
                return 0.0;
            }
            // Z_i ≥ a with P(Z_i > x) = Φ(−x)/Φ(−a)
            z[i] = -normal_quantile(open_unit(rng) * p);
        }
        weight
    })?;
    Ok(VolumeEstimate::from_stats(&stats, 1.0, Method::OrthantMC))
}

/// Plain hit-or-miss version of [`orthant_probability`].
pub fn orthant_probability_indicator(m: &SymMatrix, mc: &MCConfig) -> Result<VolumeEstimate> {
    let l = cholesky_or_err(m)?;
    let dim = m.dim();
    let stats = run_scalar(mc, |rng| {
        let z: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if orthant_event(&l, &z) {
            1.0
        } else {
            0.0
        }
    })?;
    Ok(VolumeEstimate::from_stats(&stats, 1.0, Method::OrthantMC))
}

/// Whether `factor·x` lies in the closed nonnegative orthant.
pub fn orthant_event(factor: &Matrix, x: &[f64]) -> bool {
    factor.mul_vec(x).iter().all(|&v| v >= 0.0)
}
