//! Gaussian kernel density estimates: multivariate sampling from a small
//! calibration table, and a binned 1-D density for reweighting.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Bandwidth {
    #[default]
    Scott,
    Silverman,
    /// Fixed factor multiplying the data covariance's square root.
    Factor(f64),
}

impl Bandwidth {
    /// Factor applied to the data standard deviations for `n` points in `d`
    /// dimensions.
    pub fn factor(self, n: usize, d: usize) -> f64 {
        let n = n as f64;
        let d = d as f64;
        match self {
            Bandwidth::Scott => n.powf(-1.0 / (d + 4.0)),
            Bandwidth::Silverman => (n * (d + 2.0) / 4.0).powf(-1.0 / (d + 4.0)),
            Bandwidth::Factor(f) => f,
        }
    }
}

/// Relative variance floor for degenerate columns.
const DEGENERATE_SCALE: f64 = 1e-6;

/// Draw `n` samples from a Gaussian-kernel KDE of `table` (rows are
/// observations). Deterministic for a given seed.
pub fn sample_kde(table: &[Vec<f64>], n: usize, bandwidth: Bandwidth, seed: u64) -> Result<Vec<Vec<f64>>> {
    if table.len() < 2 {
        return Err(Error::Ensemble("KDE needs at least two rows".into()));
    }
    let d = table[0].len();
    if d == 0 || table.iter().any(|r| r.len() != d) {
        return Err(Error::Ensemble("KDE rows must share a positive width".into()));
    }
    if table.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Ensemble("KDE table contains non-finite values".into()));
    }
    let rows = table.len();
    let mean: Vec<f64> = (0..d)
        .map(|j| table.iter().map(|r| r[j]).sum::<f64>() / rows as f64)
        .collect();
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for r in table {
        let dev = DVector::from_iterator(d, r.iter().zip(&mean).map(|(v, m)| v - m));
        cov += &dev * dev.transpose();
    }
    cov /= (rows - 1) as f64;
    for j in 0..d {
        let floor = (DEGENERATE_SCALE * mean[j].abs().max(1.0)).powi(2);
        if cov[(j, j)] < floor {
            log::warn!("KDE column {j} has (near) zero variance; widening by {floor:e}");
            cov[(j, j)] += floor;
        }
    }
    let factor = bandwidth.factor(rows, d);
    let kernel = cov * (factor * factor);
    let chol = kernel
        .clone()
        .cholesky()
        .or_else(|| {
            // nearly collinear columns: nudge the diagonal
            let mut k = kernel.clone();
            for j in 0..d {
                k[(j, j)] *= 1.0 + 1e-9;
                k[(j, j)] += 1e-12;
            }
            k.cholesky()
        })
        .ok_or_else(|| Error::Ensemble("KDE covariance is not positive definite".into()))?;
    let l = chol.l();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let row = &table[rng.random_range(0..rows)];
        let z = DVector::from_iterator(d, (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let noise = &l * z;
        out.push(row.iter().zip(noise.iter()).map(|(a, b)| a + b).collect());
    }
    Ok(out)
}

/// 1-D Gaussian KDE evaluated on a regular grid by linear binning, then
/// interpolated. Cheap enough to evaluate at every ensemble member.
#[derive(Debug, Clone)]
pub struct BinnedKde {
    lo: f64,
    step: f64,
    density: Vec<f64>,
}

const GRID_POINTS: usize = 2048;
const KERNEL_REACH: f64 = 6.0;

impl BinnedKde {
    pub fn new(data: &[f64], bandwidth: Bandwidth) -> Result<Self> {
        if data.len() < 2 {
            return Err(Error::Ensemble("density estimate needs at least two points".into()));
        }
        let n = data.len() as f64;
        let mean = data.iter().sum::<f64>() / n;
        let var = data.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let sd = var.sqrt().max(DEGENERATE_SCALE * mean.abs().max(1.0));
        let h = bandwidth.factor(data.len(), 1) * sd;
        let min = data.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = min - KERNEL_REACH * h;
        let hi = max + KERNEL_REACH * h;
        let step = (hi - lo) / (GRID_POINTS - 1) as f64;

        let mut counts = vec![0.0; GRID_POINTS];
        for v in data {
            let pos = (v - lo) / step;
            let k = (pos.floor() as usize).min(GRID_POINTS - 2);
            let w = pos - k as f64;
            counts[k] += 1.0 - w;
            counts[k + 1] += w;
        }
        let reach = ((KERNEL_REACH * h) / step).ceil() as usize;
        let kernel: Vec<f64> = (0..=reach)
            .map(|j| {
                let u = j as f64 * step / h;
                (-0.5 * u * u).exp() / (h * (2.0 * std::f64::consts::PI).sqrt())
            })
            .collect();
        let mut density = vec![0.0; GRID_POINTS];
        for (i, c) in counts.iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            let from = i.saturating_sub(reach);
            let to = (i + reach).min(GRID_POINTS - 1);
            for (j, dens) in density.iter_mut().enumerate().take(to + 1).skip(from) {
                *dens += c * kernel[i.abs_diff(j)];
            }
        }
        density.iter_mut().for_each(|v| *v /= n);
        Ok(Self { lo, step, density })
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let pos = (x - self.lo) / self.step;
        if pos < 0.0 || pos > (GRID_POINTS - 1) as f64 {
            return 0.0;
        }
        let k = (pos.floor() as usize).min(GRID_POINTS - 2);
        let w = pos - k as f64;
        self.density[k] * (1.0 - w) + self.density[k + 1] * w
    }
}
