//! Synthetic stand-ins for the input data: emissions, non-CO2 forcing by
//! category and scenario, observed warming, population, calibration tables
//! and the assessed target ranges.
//!
//! Series are stylised (piecewise-linear knots anchored to present-day
//! magnitudes), not reconstructions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::carbon::CarbonParams;
use crate::climate::EbmParams;
use crate::ensemble::prior::{median_scales, ForcingPrior, PriorKind, PriorTables};
use crate::ensemble::{ConstraintTarget, Series};
use crate::error::{Error, Result};
use crate::history::{run_annual, Drivers, ForcingScales, MemberParams, N_CATEGORIES, START_YEAR};
use crate::numerics::{brent_root, interp};
use crate::stats::{median, window_mean};

/// Scenario series shipped with non-CO2 forcing.
pub const SERIES: [&str; 3] = ["ssp119", "ssp126", "ssp245"];
/// Series whose CO2 emissions extend the historical record.
pub const EMISSIONS_SERIES: &str = "ssp245";

pub const EMISSIONS_END: f64 = 2100.0;
pub const FORCING_END: f64 = 2500.0;
pub const OBS_START: f64 = 1850.0;
pub const OBS_END: f64 = 2022.0;

/// CO2 concentration in 2014 the AFOLU scaling is tuned to, ppm.
pub const CO2_2014_TARGET: f64 = 397.55;

/// Annual CO2 emissions by source, GtCO2 yr^-1.
#[derive(Debug, Clone, PartialEq)]
pub struct Emissions {
    pub years: Vec<f64>,
    pub ffi: Vec<f64>,
    pub afolu: Vec<f64>,
}

impl Emissions {
    pub fn total(&self) -> Vec<f64> {
        self.ffi.iter().zip(&self.afolu).map(|(a, b)| a + b).collect()
    }
}

/// Unscaled non-CO2 forcing of one scenario, annual from 1750.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingSeries {
    pub id: String,
    pub rows: Vec<[f64; N_CATEGORIES]>,
}

impl ForcingSeries {
    pub fn years(&self) -> Vec<f64> {
        (0..self.rows.len()).map(Drivers::year).collect()
    }
}

pub fn drivers(emissions: &Emissions, forcing: &ForcingSeries) -> Result<Drivers> {
    if emissions.years.first() != Some(&START_YEAR) {
        return Err(Error::SeriesTooShort(format!("emissions must start in {START_YEAR}")));
    }
    Ok(Drivers {
        co2_emissions: emissions.total(),
        nonco2: forcing.rows.clone(),
    })
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub emissions: Emissions,
    pub forcing: Vec<ForcingSeries>,
    pub observations: Series,
    /// Millions, 2020-2300.
    pub population: Series,
    pub priors: PriorTables,
    pub targets: Vec<ConstraintTarget>,
    /// Column medians of the calibration tables and median forcing scales.
    pub median: MemberParams,
}

impl SyntheticData {
    pub fn series(&self, id: &str) -> Option<&ForcingSeries> {
        self.forcing.iter().find(|f| f.id == id)
    }
}

/// Observational noise: AR(1) coefficient and innovation standard deviation, K.
const OBS_AUTOCORR: f64 = 0.5;
const OBS_INNOVATION_SD: f64 = 0.07;

fn years(from: f64, to: f64) -> Vec<f64> {
    (0..=(to - from) as usize).map(|i| from + i as f64).collect()
}

fn knots(k: &[(f64, f64)], x: f64) -> f64 {
    let (xs, ys): (Vec<f64>, Vec<f64>) = k.iter().cloned().unzip();
    interp(&xs, &ys, x)
}

fn ffi_emissions(year: f64) -> f64 {
    knots(
        &[
            (1750.0, 0.01),
            (1800.0, 0.04),
            (1850.0, 0.2),
            (1900.0, 1.9),
            (1920.0, 3.4),
            (1950.0, 6.0),
            (1960.0, 9.4),
            (1970.0, 15.0),
            (1980.0, 19.4),
            (1990.0, 22.7),
            (2000.0, 25.5),
            (2010.0, 33.4),
            (2019.0, 36.7),
            (2020.0, 34.8),
            (2021.0, 36.4),
            (2022.0, 36.6),
            (2030.0, 39.5),
            (2040.0, 42.0),
            (2050.0, 43.0),
            (2060.0, 40.5),
            (2070.0, 35.0),
            (2080.0, 27.0),
            (2090.0, 18.5),
            (2100.0, 10.0),
        ],
        year,
    )
}

fn afolu_emissions(year: f64) -> f64 {
    knots(
        &[
            (1750.0, 1.0),
            (1850.0, 2.2),
            (1900.0, 3.7),
            (1950.0, 5.5),
            (1990.0, 5.5),
            (2000.0, 5.1),
            (2010.0, 4.8),
            (2022.0, 4.0),
            (2050.0, 2.0),
            (2100.0, -1.0),
        ],
        year,
    )
}

/// Historical profile as a fraction of the 2019 value.
fn profile(category: &str, year: f64) -> f64 {
    let k: &[(f64, f64)] = match category {
        "ch4" | "h2o_strat" | "bc_snow" => &[
            (1750.0, 0.0),
            (1850.0, 0.08),
            (1900.0, 0.17),
            (1950.0, 0.38),
            (1970.0, 0.6),
            (1980.0, 0.74),
            (1990.0, 0.85),
            (2000.0, 0.9),
            (2010.0, 0.94),
            (2019.0, 1.0),
        ],
        "n2o" => &[
            (1750.0, 0.0),
            (1850.0, 0.05),
            (1900.0, 0.15),
            (1950.0, 0.3),
            (1970.0, 0.45),
            (1980.0, 0.55),
            (1990.0, 0.68),
            (2000.0, 0.78),
            (2010.0, 0.88),
            (2019.0, 1.0),
        ],
        "o3" => &[
            (1750.0, 0.0),
            (1850.0, 0.06),
            (1900.0, 0.15),
            (1950.0, 0.35),
            (1970.0, 0.6),
            (1980.0, 0.72),
            (1990.0, 0.82),
            (2000.0, 0.89),
            (2010.0, 0.95),
            (2019.0, 1.0),
        ],
        "halogens" => &[
            (1930.0, 0.0),
            (1960.0, 0.07),
            (1970.0, 0.2),
            (1980.0, 0.49),
            (1990.0, 0.78),
            (2000.0, 0.9),
            (2010.0, 0.95),
            (2019.0, 1.0),
        ],
        "contrails" => &[
            (1940.0, 0.0),
            (1960.0, 0.1),
            (1980.0, 0.35),
            (2000.0, 0.7),
            (2010.0, 0.85),
            (2019.0, 1.0),
        ],
        "land_use" => &[
            (1750.0, 0.0),
            (1850.0, 0.3),
            (1900.0, 0.45),
            (1950.0, 0.65),
            (2000.0, 0.9),
            (2019.0, 1.0),
        ],
        _ => return 0.0,
    };
    knots(k, year)
}

/// Aerosol time profile normalised to a 2005-2014 mean of one.
fn aerosol_shape(year: f64) -> f64 {
    let raw = |y: f64| {
        knots(
            &[
                (1750.0, 0.0),
                (1850.0, 0.05),
                (1900.0, 0.13),
                (1920.0, 0.2),
                (1950.0, 0.4),
                (1960.0, 0.55),
                (1970.0, 0.72),
                (1980.0, 0.88),
                (1990.0, 0.95),
                (2000.0, 0.99),
                (2005.0, 1.03),
                (2010.0, 1.01),
                (2014.0, 0.95),
                (2019.0, 0.74),
            ],
            y,
        )
    };
    let norm = (2005..=2014).map(|y| raw(y as f64)).sum::<f64>() / 10.0;
    raw(year) / norm
}

const ERUPTIONS: [(f64, f64); 15] = [
    (1762.0, -0.6),
    (1783.0, -0.9),
    (1809.0, -2.0),
    (1815.0, -3.2),
    (1822.0, -0.5),
    (1831.0, -0.9),
    (1835.0, -1.6),
    (1883.0, -2.0),
    (1886.0, -0.4),
    (1902.0, -0.9),
    (1912.0, -0.5),
    (1963.0, -1.3),
    (1982.0, -1.5),
    (1991.0, -2.6),
    (2011.0, -0.2),
];

fn volcanic_spikes(year: f64) -> f64 {
    ERUPTIONS
        .iter()
        .filter(|(y, _)| year >= *y)
        .map(|(y, peak)| peak * (-(year - y)).exp())
        .sum()
}

/// Future multipliers of the 2019 value at 2019, 2030, 2050, 2075 and 2100;
/// held after 2100.
fn future_factors(series: &str, category: &str) -> [f64; 5] {
    match (series, category) {
        ("ssp245", "ch4" | "h2o_strat") => [1.0, 1.08, 1.12, 1.05, 0.9],
        ("ssp245", "n2o") => [1.0, 1.12, 1.3, 1.48, 1.6],
        ("ssp245", "halogens") => [1.0, 0.95, 0.85, 0.7, 0.6],
        ("ssp245", "o3") => [1.0, 1.03, 1.05, 0.95, 0.85],
        ("ssp245", "contrails") => [1.0, 1.3, 1.6, 1.75, 1.85],
        ("ssp245", "bc_snow") => [1.0, 0.95, 0.8, 0.65, 0.5],
        ("ssp245", "land_use") => [1.0, 1.05, 1.15, 1.25, 1.3],
        ("ssp245", _) => [1.0, 0.85, 0.6, 0.45, 0.35],
        ("ssp126", "ch4" | "h2o_strat") => [1.0, 0.85, 0.6, 0.45, 0.38],
        ("ssp126", "n2o") => [1.0, 1.03, 1.05, 1.0, 0.95],
        ("ssp126", "halogens") => [1.0, 0.9, 0.65, 0.45, 0.3],
        ("ssp126", "o3") => [1.0, 0.9, 0.7, 0.5, 0.4],
        ("ssp126", "contrails") => [1.0, 1.2, 1.25, 1.15, 1.0],
        ("ssp126", "bc_snow") => [1.0, 0.8, 0.5, 0.35, 0.25],
        ("ssp126", "land_use") => [1.0, 1.0, 0.95, 0.9, 0.85],
        ("ssp126", _) => [1.0, 0.7, 0.4, 0.25, 0.18],
        (_, "ch4" | "h2o_strat") => [1.0, 0.7, 0.45, 0.35, 0.3],
        (_, "n2o") => [1.0, 0.98, 0.95, 0.9, 0.85],
        (_, "halogens") => [1.0, 0.88, 0.6, 0.4, 0.25],
        (_, "o3") => [1.0, 0.8, 0.55, 0.4, 0.33],
        (_, "contrails") => [1.0, 1.1, 1.0, 0.9, 0.8],
        (_, "bc_snow") => [1.0, 0.7, 0.4, 0.3, 0.2],
        (_, "land_use") => [1.0, 0.95, 0.85, 0.8, 0.75],
        (_, _) => [1.0, 0.55, 0.3, 0.18, 0.12],
    }
}

/// Non-CO2 forcing of one category, W m^-2 relative to 1750.
fn category_forcing(series: &str, category: &str, year: f64) -> f64 {
    let hist = |y: f64| match category {
        "ch4" => 0.54 * profile(category, y),
        "n2o" => 0.21 * profile(category, y),
        "halogens" => 0.41 * profile(category, y),
        "o3" => 0.47 * profile(category, y),
        "h2o_strat" => 0.05 * profile(category, y),
        "contrails" => 0.06 * profile(category, y),
        "bc_snow" => 0.08 * profile(category, y),
        "land_use" => -0.20 * profile(category, y),
        "ari" => -0.3 * aerosol_shape(y),
        "aci" => -1.0 * aerosol_shape(y),
        _ => 0.0,
    };
    match category {
        "solar" => {
            let cycle = 0.05 * (2.0 * std::f64::consts::PI * (year - 1755.0) / 11.0).sin();
            cycle * knots(&[(2023.0, 1.0), (2050.0, 0.0)], year)
        }
        "volcanic" => {
            let background = -(START_YEAR as i64..=2019).map(|y| volcanic_spikes(y as f64)).sum::<f64>() / 270.0;
            if year <= 2019.0 {
                volcanic_spikes(year) + background
            } else {
                background * knots(&[(2019.0, 1.0), (2029.0, 0.0)], year)
            }
        }
        _ if year <= 2019.0 => hist(year),
        _ => {
            let f = future_factors(series, category);
            let xs = [2019.0, 2030.0, 2050.0, 2075.0, 2100.0];
            hist(2019.0) * interp(&xs, &f, year)
        }
    }
}

pub fn forcing_series(id: &str) -> ForcingSeries {
    let rows = years(START_YEAR, FORCING_END)
        .iter()
        .map(|y| {
            let mut row = [0.0; N_CATEGORIES];
            for (k, name) in crate::history::CATEGORIES.iter().enumerate() {
                row[k] = category_forcing(id, name, *y);
            }
            row
        })
        .collect();
    ForcingSeries { id: id.to_string(), rows }
}

/// Population, millions, from growth knots: about 8bn in 2023, a peak near
/// 11.2bn around 2116, 7.3bn in 2300 and -0.4%/yr over 2250-2300.
pub fn population() -> Series {
    let k = [
        (2020.0, 7800.0f64),
        (2023.0, 7980.0),
        (2030.0, 8500.0),
        (2050.0, 9550.0),
        (2070.0, 10_300.0),
        (2100.0, 11_050.0),
        (2116.0, 11_200.0),
        (2150.0, 10_850.0),
        (2200.0, 9_950.0),
        (2250.0, 7300.0 * (0.004f64 * 50.0).exp()),
        (2300.0, 7300.0),
    ];
    let (xs, ls): (Vec<f64>, Vec<f64>) = k.iter().map(|(y, v)| (*y, v.ln())).unzip();
    let ys = years(2020.0, 2300.0);
    let values = ys.iter().map(|y| interp(&xs, &ls, *y).exp()).collect();
    Series::new(ys, values)
}

pub fn targets() -> Vec<ConstraintTarget> {
    let t = |name: &str, p5, p50, p95| ConstraintTarget {
        name: name.into(),
        p5,
        p50,
        p95,
    };
    vec![
        t("ecs", 2.0, 3.0, 5.0),
        t("tcr", 1.2, 1.8, 2.4),
        t("historical_warming", 0.67, 0.85, 0.98),
        t("erf_ari", -0.6, -0.3, 0.0),
        t("erf_aci", -1.7, -1.0, -0.3),
        t("erf_aerosol", -2.0, -1.3, -0.6),
        t("co2_2014", 396.95, 397.55, 398.15),
        t("ohc_change", 286.0, 396.0, 506.0),
        t("ssp245_warming", 1.24, 1.81, 2.59),
    ]
}

pub fn forcing_priors() -> Vec<ForcingPrior> {
    let p = |name: &str, d: &str, kind| ForcingPrior {
        name: name.into(),
        dist: d.parse().expect("static descriptor"),
        kind,
    };
    use PriorKind::*;
    vec![
        p("co2", "gaussian:0.88:1.12", Factor),
        p("ch4", "gaussian:0.8:1.2", Factor),
        p("n2o", "gaussian:0.86:1.14", Factor),
        p("halogens", "gaussian:0.81:1.19", Factor),
        p("h2o_strat", "gaussian:0:2", Factor),
        p("o3", "gaussian:0.5:1.5", Factor),
        p("ari", "uniform:0:2", Factor),
        p("aci", "uniform:-2:0", Erf2005To2014),
        p("contrails", "half-gaussian:0.34:1:1.70", Factor),
        p("bc_snow", "half-gaussian:0:1:2.25", Factor),
        p("land_use", "gaussian:0.5:1.5", Factor),
        p("solar", "gaussian:0.5:1.5", Factor),
        p("solar_trend", "gaussian:-0.06:0.08", Trend1750To2019),
        p("volcanic", "gaussian:0.75:1.25", Factor),
    ]
}

/// Reference energy balance parameters the calibration table is centred on.
pub fn reference_ebm() -> EbmParams {
    EbmParams {
        kappa: [1.31, 2.0, 0.7],
        heat_capacity: [6.0, 15.0, 80.0],
        efficacy: 1.2,
        gamma_autocorr: 3.0,
        f2x: 3.93,
        dt: 1.0,
    }
}

/// Log-space spreads of the nine energy balance parameters.
const EBM_LOG_SD: [f64; 9] = [0.28, 0.25, 0.3, 0.2, 0.35, 0.45, 0.15, 0.3, 0.1];

fn ebm_table(rng: &mut ChaCha8Rng, rows: usize) -> Vec<Vec<f64>> {
    let r = reference_ebm();
    let centre = [
        r.kappa[0],
        r.kappa[1],
        r.kappa[2],
        r.heat_capacity[0],
        r.heat_capacity[1],
        r.heat_capacity[2],
        r.efficacy,
        r.gamma_autocorr,
        r.f2x,
    ];
    let mut table: Vec<Vec<f64>> = (0..rows)
        .map(|_| {
            let z: Vec<f64> = (0..9).map(|_| rng.sample(StandardNormal)).collect();
            (0..9)
                .map(|j| {
                    // forcing per doubling and feedback strength covary
                    let zj = if j == 8 { 0.4 * z[0] + 0.917 * z[8] } else { z[j] };
                    EBM_LOG_SD[j] * zj
                })
                .collect()
        })
        .collect();
    recentre(&mut table, &centre.map(f64::ln));
    table.iter().map(|r| r.iter().map(|v| v.exp()).collect()).collect()
}

const CARBON_CENTRE: [f64; 4] = [33.0, 0.005, 3.5, 0.003];
const CARBON_SD: [f64; 4] = [3.0, 0.0015, 1.2, 0.002];

fn carbon_table(rng: &mut ChaCha8Rng, rows: usize) -> Vec<Vec<f64>> {
    let mut table: Vec<Vec<f64>> = (0..rows)
        .map(|_| (0..4).map(|j| CARBON_SD[j] * rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    recentre(&mut table, &CARBON_CENTRE);
    table
}

/// Shift each column so its median equals `centre`.
fn recentre(table: &mut [Vec<f64>], centre: &[f64]) {
    for (j, c) in centre.iter().enumerate() {
        let col: Vec<f64> = table.iter().map(|r| r[j]).collect();
        let shift = c - median(&col);
        table.iter_mut().for_each(|r| r[j] += shift);
    }
}

pub const EBM_CALIBRATION_ROWS: usize = 49;
pub const CARBON_CALIBRATION_ROWS: usize = 11;

/// Build the full synthetic dataset from one seed.
pub fn generate(seed: u64) -> Result<SyntheticData> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ebm = ebm_table(&mut rng, EBM_CALIBRATION_ROWS);
    let carbon = carbon_table(&mut rng, CARBON_CALIBRATION_ROWS);
    let forcing: Vec<ForcingSeries> = SERIES.iter().map(|s| forcing_series(s)).collect();
    let priors = PriorTables {
        ebm,
        carbon,
        forcing: forcing_priors(),
    };
    let reference = forcing.iter().find(|f| f.id == EMISSIONS_SERIES).unwrap();

    let hist_years = years(START_YEAR, EMISSIONS_END);
    let ffi: Vec<f64> = hist_years.iter().map(|y| ffi_emissions(*y)).collect();
    let afolu_base: Vec<f64> = hist_years.iter().map(|y| afolu_emissions(*y)).collect();
    let mut median = MemberParams {
        id: 0,
        ebm: reference_ebm(),
        carbon: CarbonParams {
            r0: CARBON_CENTRE[0],
            r_u: CARBON_CENTRE[1],
            r_t: CARBON_CENTRE[2],
            r_a: CARBON_CENTRE[3],
            ..CarbonParams::default()
        },
        scales: ForcingScales::default(),
    };
    let scratch = Drivers {
        co2_emissions: vec![0.0; hist_years.len()],
        nonco2: reference.rows.clone(),
    };
    median.scales = median_scales(&priors.forcing, &scratch)?;

    // scale land-use emissions so the median member matches present-day CO2
    let with_scale = |s: f64| Emissions {
        years: hist_years.clone(),
        ffi: ffi.clone(),
        afolu: afolu_base.iter().map(|a| a * s).collect(),
    };
    let co2_2014 = |s: f64| -> f64 {
        let d = drivers(&with_scale(s), reference).expect("synthetic drivers");
        match run_annual(&median, &d, 2014.0) {
            Ok(run) => run.concentration[Drivers::index(2014.0)] - CO2_2014_TARGET,
            Err(_) => f64::NAN,
        }
    };
    let scale = brent_root(co2_2014, 0.0, 3.0, 1e-10, 200)
        .ok_or_else(|| Error::Ensemble("could not tune land-use emissions to present-day CO2".into()))?;
    let emissions = with_scale(scale);

    let d = drivers(&emissions, reference)?;
    let run = run_annual(&median, &d, OBS_END)?;
    let mut noise = 0.0;
    let (mut oy, mut ov) = (Vec::new(), Vec::new());
    for (y, t) in run.years.iter().zip(&run.t1) {
        noise = OBS_AUTOCORR * noise + OBS_INNOVATION_SD * rng.sample::<f64, _>(StandardNormal);
        if *y >= OBS_START {
            oy.push(*y);
            ov.push(t + noise);
        }
    }
    let base = window_mean(&oy, &ov, 1850.0, 1900.0);
    let observations = Series::new(oy, ov.iter().map(|v| v - base).collect());

    Ok(SyntheticData {
        emissions,
        forcing,
        observations,
        population: population(),
        priors,
        targets: targets(),
        median,
    })
}
