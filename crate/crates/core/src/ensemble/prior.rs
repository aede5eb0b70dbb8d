//! Prior parameter ensemble: energy balance and carbon-cycle parameters from
//! kernel density estimates of calibration tables, forcing scale factors from
//! their descriptors, and the pre-industrial CO2 concentration.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::kde::{sample_kde, Bandwidth};
use super::scaling::ScalingDist;
use crate::carbon::CarbonParams;
use crate::climate::EbmParams;
use crate::error::{Error, Result};
use crate::history::{category_index, Drivers, ForcingScales, MemberParams};
use crate::stats::window_mean;

/// Columns of the energy balance calibration table.
pub const EBM_COLUMNS: [&str; 9] = ["kappa1", "kappa2", "kappa3", "c1", "c2", "c3", "efficacy", "gamma", "f2x"];
/// Columns of the carbon-cycle calibration table.
pub const CARBON_COLUMNS: [&str; 4] = ["r0", "r_u", "r_t", "r_a"];

/// Pre-industrial CO2, ppm: mean and 90% half-range.
pub const C_REF_MEAN: f64 = 278.3;
pub const C_REF_HALF_RANGE: f64 = 2.9;

/// How a sampled value becomes a forcing scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PriorKind {
    /// Multiplies the category's series.
    Factor,
    /// The sampled value is the category's 2005-2014 mean forcing, W m^-2.
    Erf2005To2014,
    /// Additive solar trend reached by 2019, W m^-2.
    Trend1750To2019,
}

impl FromStr for PriorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "factor" => Ok(PriorKind::Factor),
            "erf_2005_2014" => Ok(PriorKind::Erf2005To2014),
            "trend_1750_2019" => Ok(PriorKind::Trend1750To2019),
            other => Err(Error::Descriptor(format!("unknown prior kind {other}"))),
        }
    }
}

impl fmt::Display for PriorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PriorKind::Factor => "factor",
            PriorKind::Erf2005To2014 => "erf_2005_2014",
            PriorKind::Trend1750To2019 => "trend_1750_2019",
        })
    }
}

/// One row of the forcing prior table. `name` is `co2`, `solar_trend` or a
/// non-CO2 category.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingPrior {
    pub name: String,
    pub dist: ScalingDist,
    pub kind: PriorKind,
}

/// Everything needed to draw a prior ensemble.
#[derive(Debug, Clone)]
pub struct PriorTables {
    pub ebm: Vec<Vec<f64>>,
    pub carbon: Vec<Vec<f64>>,
    pub forcing: Vec<ForcingPrior>,
}

/// Draw `n` members with ids `1..=n`. Energy balance parameters are all
/// positive and are sampled in log space; carbon feedbacks in their own units.
pub fn sample_prior(tables: &PriorTables, drivers: &Drivers, n: usize, seed: u64) -> Result<Vec<MemberParams>> {
    if tables.ebm.iter().any(|r| r.len() != EBM_COLUMNS.len()) {
        return Err(Error::Ensemble(format!("EBM table rows need {} columns", EBM_COLUMNS.len())));
    }
    if tables.carbon.iter().any(|r| r.len() != CARBON_COLUMNS.len()) {
        return Err(Error::Ensemble(format!("carbon table rows need {} columns", CARBON_COLUMNS.len())));
    }
    if tables.ebm.iter().flatten().any(|v| !(*v > 0.0)) {
        return Err(Error::Ensemble("EBM calibration values must be positive".into()));
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let log_ebm: Vec<Vec<f64>> = tables.ebm.iter().map(|r| r.iter().map(|v| v.ln()).collect()).collect();
    let ebm = sample_kde(&log_ebm, n, Bandwidth::Scott, master.random())?;
    let carbon = sample_kde(&tables.carbon, n, Bandwidth::Scott, master.random())?;

    let mut scales = vec![ForcingScales::default(); n];
    for prior in &tables.forcing {
        let draws = prior.dist.sample(n, master.random());
        apply_prior(prior, &draws, drivers, &mut scales)?;
    }
    let c_ref_sd = C_REF_HALF_RANGE / super::scaling::z95();
    let mut rng = ChaCha8Rng::seed_from_u64(master.random());

    (0..n)
        .map(|i| {
            let e: Vec<f64> = ebm[i].iter().map(|v| v.exp()).collect();
            let c = &carbon[i];
            let z: f64 = rng.sample(StandardNormal);
            Ok(MemberParams {
                id: i + 1,
                ebm: EbmParams {
                    kappa: [e[0], e[1], e[2]],
                    heat_capacity: [e[3], e[4], e[5]],
                    efficacy: e[6],
                    gamma_autocorr: e[7],
                    f2x: e[8],
                    dt: 1.0,
                },
                carbon: CarbonParams {
                    r0: c[0],
                    r_u: c[1],
                    r_t: c[2],
                    r_a: c[3],
                    c_ref: C_REF_MEAN + c_ref_sd * z,
                    ..CarbonParams::default()
                },
                scales: scales[i],
            })
        })
        .collect()
}

fn apply_prior(prior: &ForcingPrior, draws: &[f64], drivers: &Drivers, scales: &mut [ForcingScales]) -> Result<()> {
    let bad = |why: &str| Error::Descriptor(format!("{}: {why}", prior.name));
    match (prior.name.as_str(), prior.kind) {
        ("co2", PriorKind::Factor) => scales.iter_mut().zip(draws).for_each(|(s, d)| s.co2 = *d),
        ("solar_trend", PriorKind::Trend1750To2019) => {
            scales.iter_mut().zip(draws).for_each(|(s, d)| s.solar_trend = *d)
        }
        (name, kind @ (PriorKind::Factor | PriorKind::Erf2005To2014)) => {
            let k = category_index(name).ok_or_else(|| bad("unknown forcing category"))?;
            let divisor = if kind == PriorKind::Erf2005To2014 {
                let base = window_mean(&drivers.forcing_years(), &drivers.category(k), 2005.0, 2014.0);
                if !(base.abs() > 0.0) {
                    return Err(bad("category has no 2005-2014 forcing to scale"));
                }
                base
            } else {
                1.0
            };
            scales.iter_mut().zip(draws).for_each(|(s, d)| s.nonco2[k] = d / divisor);
        }
        _ => return Err(bad("kind does not apply to this name")),
    }
    Ok(())
}

/// Scales every category at its distribution median.
pub fn median_scales(priors: &[ForcingPrior], drivers: &Drivers) -> Result<ForcingScales> {
    let mut s = [ForcingScales::default()];
    for p in priors {
        apply_prior(p, &[p.dist.median()], drivers, &mut s)?;
    }
    Ok(s[0])
}
