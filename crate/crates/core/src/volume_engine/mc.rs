//! Chunked, seed-deterministic Monte Carlo plumbing shared by every
//! estimator.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SAMPLES: u64 = 1_000_000;
pub const DEFAULT_CHUNK: u64 = 16_384;

/// Relative standard error above which an estimate is flagged.
pub const VARIANCE_OVERFLOW_REL: f64 = 0.1;

/// Estimates are a pure function of `(seed, samples, chunk)`: chunk `k` draws
/// from the ChaCha8 stream `k` of `seed`, and chunk statistics are merged in
/// chunk order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MCConfig {
    pub seed: u64,
    pub samples: u64,
    pub chunk: u64,
}

impl Default for MCConfig {
    fn default() -> Self {
        MCConfig {
            seed: 0,
            samples: DEFAULT_SAMPLES,
            chunk: DEFAULT_CHUNK,
        }
    }
}

impl MCConfig {
    pub fn new(seed: u64, samples: u64) -> Self {
        MCConfig {
            seed,
            samples,
            chunk: DEFAULT_CHUNK,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidArgument("sample count must be at least 1".into()));
        }
        if self.chunk == 0 {
            return Err(Error::InvalidArgument("chunk size must be at least 1".into()));
        }
        Ok(())
    }

    /// Same budget, seed replaced by `derive_seed(self.seed, k)`.
    pub fn fork(&self, k: u64) -> MCConfig {
        MCConfig {
            seed: derive_seed(self.seed, k),
            ..*self
        }
    }

    pub fn with_samples(&self, samples: u64) -> MCConfig {
        MCConfig { samples, ..*self }
    }
}

/// SplitMix64 finaliser applied to `seed + k·γ`.
pub fn derive_seed(seed: u64, k: u64) -> u64 {
    let mut z = seed.wrapping_add(k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Running mean and sum of squared deviations.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Welford) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64) * (other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    /// Sample standard deviation over `√n`.
    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// Runs `draw` once per sample. Each call fills `width` values, each
/// accumulated into its own [`Welford`]; all values of one call come from
/// the same random point, so the estimates are coupled.
pub fn run_chunked<F>(mc: &MCConfig, width: usize, draw: F) -> Result<Vec<Welford>>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
{
    mc.validate()?;
    let chunks = mc.samples.div_ceil(mc.chunk);
    let parts: Vec<Vec<Welford>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
            rng.set_stream(k);
            let len = mc.chunk.min(mc.samples - k * mc.chunk);
            let mut acc = vec![Welford::default(); width];
            let mut buf = vec![0.0; width];
            for _ in 0..len {
                draw(&mut rng, &mut buf);
                for (a, &x) in acc.iter_mut().zip(&buf) {
                    a.push(x);
                }
            }
            acc
        })
        .collect();
    let mut total = vec![Welford::default(); width];
    for part in &parts {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    Ok(total)
}

/// Single-valued convenience wrapper around [`run_chunked`].
pub fn run_scalar<F>(mc: &MCConfig, draw: F) -> Result<Welford>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let out = run_chunked(mc, 1, |rng, buf| buf[0] = draw(rng))?;
    Ok(out[0])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    OrthantMC,
    KleinMC,
    ConeMC,
    GaussBonnet2D,
    Analytic,
}

impl Method {
    pub fn is_analytic(self) -> bool {
        matches!(self, Method::GaussBonnet2D | Method::Analytic)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::OrthantMC => "OrthantMC",
            Method::KleinMC => "KleinMC",
            Method::ConeMC => "ConeMC",
            Method::GaussBonnet2D => "GaussBonnet2D",
            Method::Analytic => "Analytic",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub std_error: f64,
    pub method: Method,
    pub samples: u64,
    /// Relative standard error above 10%.
    pub variance_overflow: bool,
}

impl VolumeEstimate {
    pub fn analytic(value: f64, method: Method) -> Self {
        VolumeEstimate {
            value,
            std_error: 0.0,
            method,
            samples: 0,
            variance_overflow: false,
        }
    }

    pub fn from_stats(w: &Welford, scale: f64, method: Method) -> Self {
        let value = (w.mean() * scale).max(0.0);
        let std_error = w.std_error() * scale.abs();
        VolumeEstimate {
            value,
            std_error,
            method,
            samples: w.count(),
            variance_overflow: std_error > VARIANCE_OVERFLOW_REL * value.abs(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        VolumeEstimate {
            value: self.value * s,
            std_error: self.std_error * s.abs(),
            ..*self
        }
    }

    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            if self.std_error == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.std_error / self.value.abs()
        }
    }
}

/// Combined standard error of two independent estimates.
pub fn combined_se(a: f64, b: f64) -> f64 {
    (a * a + b * b).sqrt()
}

/// Whether `|value − target| ≤ k·se`, allowing rounding at the
/// `1e-12·|target|` level so that zero-variance estimators compare equal to
/// their exact targets.
pub fn within_se(value: f64, target: f64, se: f64, k: f64) -> bool {
    (value - target).abs() <= k * se + 1e-12 * target.abs().max(value.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn welford_matches_two_pass() {
        let xs = [1.0, 4.0, -2.0, 7.5, 3.25, 0.0];
        let mut w = Welford::default();
        xs.iter().for_each(|&x| w.push(x));
        let mean = xs.iter().sum::<f64>() / 6.0;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 5.0;
        assert!((w.mean() - mean).abs() < 1e-14);
        assert!((w.variance() - var).abs() < 1e-12);

        let mut a = Welford::default();
        let mut b = Welford::default();
        xs[..2].iter().for_each(|&x| a.push(x));
        xs[2..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert!((a.mean() - mean).abs() < 1e-14);
        assert!((a.variance() - var).abs() < 1e-12);
    }

    #[test]
    fn chunked_runs_are_deterministic() {
        let mc = MCConfig {
            seed: 5,
            samples: 10_001,
            chunk: 1000,
        };
        let draw = |rng: &mut ChaCha8Rng| rng.random::<f64>();
        let a = run_scalar(&mc, draw).unwrap();
        let b = run_scalar(&mc, draw).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.count(), 10_001);
        assert!((a.mean() - 0.5).abs() < 4.0 * a.std_error());
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| run_scalar(&mc, draw).unwrap());
        assert_eq!(a, c);
    }

    #[test]
    fn zero_samples_rejected() {
        let mc = MCConfig::new(0, 0);
        assert!(run_scalar(&mc, |_| 0.0).is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
        assert_eq!(derive_seed(9, 3), derive_seed(9, 3));
    }
}
