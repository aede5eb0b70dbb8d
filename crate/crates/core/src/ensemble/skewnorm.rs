//! Skew-normal distribution and its fit to three percentiles.

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::numerics::{adaptive_simpson, brent_root};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewNormal {
    /// Location.
    pub xi: f64,
    /// Scale, > 0.
    pub omega: f64,
    /// Shape; zero gives a Gaussian.
    pub alpha: f64,
}

fn std_normal() -> Normal {
    Normal::standard()
}

/// Owen's T function.
pub fn owens_t(h: f64, a: f64) -> f64 {
    if a < 0.0 {
        return -owens_t(h, -a);
    }
    if a == 0.0 {
        return 0.0;
    }
    let h = h.abs();
    if a <= 1.0 {
        let f = |x: f64| (-0.5 * h * h * (1.0 + x * x)).exp() / (1.0 + x * x);
        return adaptive_simpson(&f, 0.0, a, 1e-15) / (2.0 * std::f64::consts::PI);
    }
    let n = std_normal();
    let ah = a * h;
    let (ph, pah) = (n.cdf(h), n.cdf(ah));
    0.5 * ph + 0.5 * pah - ph * pah - owens_t(ah, 1.0 / a)
}

/// Bracket for standardized quantiles.
const Z_BRACKET: f64 = 40.0;
/// Largest shape considered by the fit.
const MAX_SHAPE: f64 = 60.0;

impl SkewNormal {
    pub fn new(xi: f64, omega: f64, alpha: f64) -> Result<Self> {
        if !(omega > 0.0) || !xi.is_finite() || !alpha.is_finite() {
            return Err(Error::SkewNormalFit(format!(
                "invalid parameters xi={xi} omega={omega} alpha={alpha}"
            )));
        }
        Ok(Self { xi, omega, alpha })
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let z = (x - self.xi) / self.omega;
        let n = std_normal();
        2.0 / self.omega * n.pdf(z) * n.cdf(self.alpha * z)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        standard_cdf((x - self.xi) / self.omega, self.alpha)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        self.xi + self.omega * standard_quantile(p, self.alpha)
    }
}

fn standard_cdf(z: f64, alpha: f64) -> f64 {
    (std_normal().cdf(z) - 2.0 * owens_t(z, alpha)).clamp(0.0, 1.0)
}

fn standard_quantile(p: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        return std_normal().inverse_cdf(p);
    }
    brent_root(|z| standard_cdf(z, alpha) - p, -Z_BRACKET, Z_BRACKET, 1e-13, 300)
        .unwrap_or(f64::NAN)
}

/// Position of the median within the 5-95% range for shape `alpha`.
fn median_ratio(alpha: f64) -> f64 {
    let q5 = standard_quantile(0.05, alpha);
    let q50 = standard_quantile(0.5, alpha);
    let q95 = standard_quantile(0.95, alpha);
    (q50 - q5) / (q95 - q5)
}

/// Skew-normal whose 5th, 50th and 95th percentiles equal the inputs.
pub fn fit_skew_normal(p5: f64, p50: f64, p95: f64) -> Result<SkewNormal> {
    if !(p5 < p50 && p50 < p95) {
        return Err(Error::SkewNormalFit(format!(
            "percentiles must be strictly increasing, got {p5}, {p50}, {p95}"
        )));
    }
    let target = (p50 - p5) / (p95 - p5);
    let alpha = if (target - 0.5).abs() < 1e-14 {
        0.0
    } else {
        let lo = median_ratio(MAX_SHAPE);
        let hi = median_ratio(-MAX_SHAPE);
        if target <= lo || target >= hi {
            return Err(Error::SkewNormalFit(format!(
                "median sits at {target:.4} of the 5-95% range; skew-normal reaches only ({lo:.4}, {hi:.4})"
            )));
        }
        brent_root(|a| median_ratio(a) - target, -MAX_SHAPE, MAX_SHAPE, 1e-12, 300)
            .ok_or_else(|| Error::SkewNormalFit("shape root-find did not converge".into()))?
    };
    let (q5, q50, q95) = (
        standard_quantile(0.05, alpha),
        standard_quantile(0.5, alpha),
        standard_quantile(0.95, alpha),
    );
    let omega = (p95 - p5) / (q95 - q5);
    let xi = p50 - omega * q50;
    let sn = SkewNormal::new(xi, omega, alpha)?;
    let residual = [(0.05, p5), (0.5, p50), (0.95, p95)]
        .iter()
        .map(|(q, v)| (sn.quantile(*q) - v).abs())
        .fold(0.0, f64::max);
    if !(residual <= 1e-6 * (p95 - p5).max(1.0)) {
        return Err(Error::SkewNormalFit(format!("quantile residual {residual:e} after fit")));
    }
    Ok(sn)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn owens_t_known_values() {
        assert!((owens_t(0.0, 1.0) - 0.125).abs() < 1e-14);
        assert!((owens_t(0.0, 3.0) - 3f64.atan() / (2.0 * std::f64::consts::PI)).abs() < 1e-14);
        // reference values from an independent implementation
        for (h, a, t) in [
            (0.3, 2.5, 0.1727035640063457),
            (1.7, 4.0, 0.022282731379255138),
            (-0.8, 1.5, 0.09754478019580662),
        ] {
            assert!((owens_t(h, a) - t).abs() < 1e-10, "{h} {a} {}", owens_t(h, a));
        }
    }

    #[test]
    fn gaussian_limit() {
        let sn = fit_skew_normal(-1.6448536269514722, 0.0, 1.6448536269514722).unwrap();
        assert_eq!(sn.alpha, 0.0);
        assert!(sn.xi.abs() < 1e-12 && (sn.omega - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ecs_target_round_trip() {
        let sn = fit_skew_normal(2.0, 3.0, 5.0).unwrap();
        assert!(sn.alpha > 0.0);
        for (q, v) in [(0.05, 2.0), (0.5, 3.0), (0.95, 5.0)] {
            assert!((sn.quantile(q) - v).abs() < 1e-6);
        }
        // the CDF agrees with integrating the density
        let f = |x: f64| sn.pdf(x);
        let mass = adaptive_simpson(&f, sn.xi - 12.0 * sn.omega, 3.0, 1e-12);
        assert!((mass - 0.5).abs() < 1e-7, "{mass}");
    }

    #[test]
    fn degenerate_and_extreme_inputs() {
        assert!(fit_skew_normal(1.0, 1.0, 2.0).is_err());
        assert!(fit_skew_normal(3.0, 2.0, 1.0).is_err());
        assert!(fit_skew_normal(0.0, 0.1, 1.0).is_err());
        assert!(fit_skew_normal(0.0, 0.9, 1.0).is_err());
    }

    #[test]
    fn left_skewed_target() {
        let sn = fit_skew_normal(-2.0, -1.3, -0.6).unwrap();
        assert!((sn.quantile(0.5) + 1.3).abs() < 1e-6);
    }
}
