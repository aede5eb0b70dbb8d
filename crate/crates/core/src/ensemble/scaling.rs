//! Forcing scale-factor distributions given by their 90% ranges.
//!
//! Descriptors are colon-separated: `gaussian:P5:P95`,
//! `half-gaussian:P5:MODE:P95` and `uniform:LO:HI`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Standard normal 95th percentile.
pub fn z95() -> f64 {
    Normal::standard().inverse_cdf(0.95)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalingDist {
    Gaussian { p5: f64, p95: f64 },
    /// Two one-sided Gaussians joined at the mode; each side carries half
    /// the probability.
    HalfGaussian { p5: f64, mode: f64, p95: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl ScalingDist {
    fn validate(self) -> Result<Self> {
        let ok = match self {
            ScalingDist::Gaussian { p5, p95 } => p5 < p95,
            ScalingDist::HalfGaussian { p5, mode, p95 } => p5 < mode && mode < p95,
            ScalingDist::Uniform { lo, hi } => lo < hi,
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::Descriptor(self.to_string()))
        }
    }

    pub fn sample_one<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            ScalingDist::Gaussian { p5, p95 } => {
                let z: f64 = rng.sample(StandardNormal);
                0.5 * (p5 + p95) + z * (p95 - p5) / (2.0 * z95())
            }
            ScalingDist::HalfGaussian { p5, mode, p95 } => {
                let z: f64 = rng.sample(StandardNormal);
                if rng.random::<bool>() {
                    mode + z.abs() * (p95 - mode) / z95()
                } else {
                    mode - z.abs() * (mode - p5) / z95()
                }
            }
            ScalingDist::Uniform { lo, hi } => rng.random_range(lo..hi),
        }
    }

    /// `n` draws from a fresh generator seeded with `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.sample_one(&mut rng)).collect()
    }

    pub fn median(&self) -> f64 {
        match *self {
            ScalingDist::Gaussian { p5, p95 } => 0.5 * (p5 + p95),
            ScalingDist::HalfGaussian { mode, .. } => mode,
            ScalingDist::Uniform { lo, hi } => 0.5 * (lo + hi),
        }
    }
}

impl FromStr for ScalingDist {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Descriptor(s.to_string());
        let mut parts = s.trim().split(':');
        let kind = parts.next().ok_or_else(bad)?.to_ascii_lowercase();
        let nums: Vec<f64> = parts
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        if nums.iter().any(|v| !v.is_finite()) {
            return Err(bad());
        }
        let dist = match (kind.as_str(), nums.as_slice()) {
            ("gaussian", [p5, p95]) => ScalingDist::Gaussian { p5: *p5, p95: *p95 },
            ("half-gaussian", [p5, mode, p95]) => ScalingDist::HalfGaussian {
                p5: *p5,
                mode: *mode,
                p95: *p95,
            },
            ("uniform", [lo, hi]) => ScalingDist::Uniform { lo: *lo, hi: *hi },
            _ => return Err(bad()),
        };
        dist.validate().map_err(|_| bad())
    }
}

impl fmt::Display for ScalingDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalingDist::Gaussian { p5, p95 } => write!(f, "gaussian:{p5}:{p95}"),
            ScalingDist::HalfGaussian { p5, mode, p95 } => write!(f, "half-gaussian:{p5}:{mode}:{p95}"),
            ScalingDist::Uniform { lo, hi } => write!(f, "uniform:{lo}:{hi}"),
        }
    }
}
