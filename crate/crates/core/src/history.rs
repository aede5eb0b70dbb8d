//! Annual emissions-driven runs of one ensemble member over the historical
//! period and an extension scenario: constraint metrics, the 2023 handover
//! state and the exogenous forcing exported to the coupled model.

use serde::{Deserialize, Serialize};

use crate::carbon::{CarbonCycle, CarbonParams, CarbonState};
use crate::climate::{
    co2_forcing, diagnose_tcr, discretize, effective_f2x, rebaseline_temperatures, step_temperature, EbmParams,
    TemperatureState,
};
use crate::ensemble::Series;
use crate::error::{Error, Result};
use crate::sim::InitialConditions;
use crate::stats::window_mean;

/// Non-CO2 forcing categories, in column order.
pub const CATEGORIES: [&str; 12] = [
    "ch4",
    "n2o",
    "halogens",
    "o3",
    "h2o_strat",
    "contrails",
    "bc_snow",
    "land_use",
    "solar",
    "volcanic",
    "ari",
    "aci",
];
pub const N_CATEGORIES: usize = CATEGORIES.len();
pub const ARI: usize = 10;
pub const ACI: usize = 11;

pub fn category_index(name: &str) -> Option<usize> {
    CATEGORIES.iter().position(|c| *c == name)
}

/// First year of every driver series.
pub const START_YEAR: f64 = 1750.0;
/// The solar trend ramps linearly from zero in 1750 to its full value here.
pub const SOLAR_TREND_END: f64 = 2019.0;
/// First year of the coupled model.
pub const HANDOVER_YEAR: f64 = 2023.0;

/// Annual drivers from [`START_YEAR`]: total CO2 emissions and the unscaled
/// non-CO2 forcing by category. Emissions may stop before the forcing does.
#[derive(Debug, Clone, PartialEq)]
pub struct Drivers {
    /// GtCO2 yr^-1
    pub co2_emissions: Vec<f64>,
    /// W m^-2, relative to 1750.
    pub nonco2: Vec<[f64; N_CATEGORIES]>,
}

impl Drivers {
    pub fn year(i: usize) -> f64 {
        START_YEAR + i as f64
    }

    pub fn index(year: f64) -> usize {
        (year - START_YEAR).round().max(0.0) as usize
    }

    pub fn last_emissions_year(&self) -> f64 {
        Self::year(self.co2_emissions.len().saturating_sub(1))
    }

    pub fn last_forcing_year(&self) -> f64 {
        Self::year(self.nonco2.len().saturating_sub(1))
    }

    /// Unscaled category series over all forcing years.
    pub fn category(&self, k: usize) -> Vec<f64> {
        self.nonco2.iter().map(|row| row[k]).collect()
    }

    pub fn forcing_years(&self) -> Vec<f64> {
        (0..self.nonco2.len()).map(Self::year).collect()
    }
}

/// Per-member forcing uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForcingScales {
    pub co2: f64,
    pub nonco2: [f64; N_CATEGORIES],
    /// Solar trend over 1750-2019, W m^-2.
    pub solar_trend: f64,
}

impl Default for ForcingScales {
    fn default() -> Self {
        Self {
            co2: 1.0,
            nonco2: [1.0; N_CATEGORIES],
            solar_trend: 0.0,
        }
    }
}

/// One ensemble member's physical parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberParams {
    pub id: usize,
    /// Annual-timestep energy balance model.
    pub ebm: EbmParams,
    pub carbon: CarbonParams,
    pub scales: ForcingScales,
}

impl MemberParams {
    /// Forcing per CO2 doubling after the CO2 scale factor.
    pub fn f2x_eff(&self) -> f64 {
        self.scales.co2 * self.ebm.f2x
    }

    pub fn ecs(&self) -> f64 {
        self.f2x_eff() / self.ebm.kappa[0]
    }

    pub fn tcr(&self) -> Result<f64> {
        diagnose_tcr(&EbmParams {
            f2x: self.f2x_eff(),
            ..self.ebm.clone()
        })
    }

    /// Scaled non-CO2 forcing of category `k` at driver index `i`.
    pub fn category_forcing(&self, drivers: &Drivers, k: usize, i: usize) -> f64 {
        let row = &drivers.nonco2[i.min(drivers.nonco2.len() - 1)];
        let mut f = self.scales.nonco2[k] * row[k];
        if k == category_index("solar").unwrap() {
            let ramp = ((Drivers::year(i) - START_YEAR) / (SOLAR_TREND_END - START_YEAR)).clamp(0.0, 1.0);
            f += self.scales.solar_trend * ramp;
        }
        f
    }

    pub fn nonco2_forcing(&self, drivers: &Drivers, i: usize) -> f64 {
        (0..N_CATEGORIES).map(|k| self.category_forcing(drivers, k, i)).sum()
    }
}

/// Annual output of [`run_annual`]. Entry `i` describes year
/// `START_YEAR + i`: forcing is evaluated from the start-of-year state and
/// temperatures are end-of-year values.
#[derive(Debug, Clone, Default)]
pub struct AnnualRun {
    pub years: Vec<f64>,
    pub t1: Vec<f64>,
    /// Mean of start- and end-of-year concentration, ppm.
    pub concentration: Vec<f64>,
    pub f_co2: Vec<f64>,
    pub f_nonco2: Vec<f64>,
    /// Top-of-atmosphere imbalance over the year, W m^-2.
    pub imbalance: Vec<f64>,
    /// State at the start of the year after the last one simulated.
    pub carbon: CarbonState,
    pub temperature: TemperatureState,
}

impl AnnualRun {
    pub fn surface_series(&self) -> Series {
        Series::new(self.years.clone(), self.t1.clone())
    }

    pub fn window(&self, values: &[f64], from: f64, to: f64) -> f64 {
        window_mean(&self.years, values, from, to)
    }
}

/// Simulate a member from 1750 through `last_year` inclusive.
pub fn run_annual(member: &MemberParams, drivers: &Drivers, last_year: f64) -> Result<AnnualRun> {
    if last_year > drivers.last_emissions_year() || last_year > drivers.last_forcing_year() {
        return Err(Error::SeriesTooShort(format!(
            "drivers end before {last_year} (emissions to {}, forcing to {})",
            drivers.last_emissions_year(),
            drivers.last_forcing_year()
        )));
    }
    let ebm_params = member.ebm.with_dt(1.0);
    let ebm = discretize(&ebm_params)?;
    let cycle = CarbonCycle::new(member.carbon.clone())?;
    let f2x = member.f2x_eff();
    let [k1, _, k3] = ebm_params.kappa;
    let eps = ebm_params.efficacy;
    let n = Drivers::index(last_year) + 1;

    let mut run = AnnualRun {
        years: Vec::with_capacity(n),
        t1: Vec::with_capacity(n),
        concentration: Vec::with_capacity(n),
        f_co2: Vec::with_capacity(n),
        f_nonco2: Vec::with_capacity(n),
        imbalance: Vec::with_capacity(n),
        ..Default::default()
    };
    let mut carbon = CarbonState::default();
    let mut temp = TemperatureState::default();
    for i in 0..n {
        let c0 = cycle.concentration(&carbon);
        let f_co2 = co2_forcing(c0, member.carbon.c_ref, f2x)?;
        let f_ext = member.nonco2_forcing(drivers, i);
        let forcing = f_co2 + f_ext;
        let step = cycle.step(&carbon, temp.surface(), drivers.co2_emissions[i], 1.0);
        let next = step_temperature(&temp, &ebm, forcing);
        let mid = |j: usize| 0.5 * (temp.layers[j] + next.layers[j]);
        let imbalance = forcing - k1 * mid(0) - (eps - 1.0) * k3 * (mid(1) - mid(2));
        if !next.surface().is_finite() || !step.state.atmospheric_anomaly().is_finite() {
            return Err(Error::Domain(format!("member {} diverged in {}", member.id, Drivers::year(i))));
        }
        run.years.push(Drivers::year(i));
        run.concentration.push(0.5 * (c0 + cycle.concentration(&step.state)));
        run.f_co2.push(f_co2);
        run.f_nonco2.push(f_ext);
        run.imbalance.push(imbalance);
        run.t1.push(next.surface());
        carbon = step.state;
        temp = next;
    }
    run.carbon = carbon;
    run.temperature = temp;
    Ok(run)
}

/// Names of the constrained metrics, in [`Metrics::to_array`] order.
pub const METRIC_NAMES: [&str; 9] = [
    "ecs",
    "tcr",
    "historical_warming",
    "erf_ari",
    "erf_aci",
    "erf_aerosol",
    "co2_2014",
    "ohc_change",
    "ssp245_warming",
];

/// J per (W m^-2 yr) over the ocean: Earth area x seconds per year x ocean
/// fraction.
pub const OHC_JOULES_PER_WM2_YR: f64 = 5.1e14 * 365.25 * 86400.0 * 0.91;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// K
    pub ecs: f64,
    /// K
    pub tcr: f64,
    /// 1995-2014 minus 1850-1900, K.
    pub historical_warming: f64,
    /// 2005-2014 mean, W m^-2.
    pub erf_ari: f64,
    pub erf_aci: f64,
    pub erf_aerosol: f64,
    /// ppm
    pub co2_2014: f64,
    /// 1971-2018, ZJ.
    pub ohc_change: f64,
    /// 2081-2100 minus 1995-2014, K.
    pub ssp245_warming: f64,
}

impl Metrics {
    pub fn to_array(&self) -> [f64; 9] {
        [
            self.ecs,
            self.tcr,
            self.historical_warming,
            self.erf_ari,
            self.erf_aci,
            self.erf_aerosol,
            self.co2_2014,
            self.ohc_change,
            self.ssp245_warming,
        ]
    }
}

/// Metrics for one member from a run to 2100 under the given drivers.
pub fn member_metrics(member: &MemberParams, drivers: &Drivers) -> Result<(Metrics, AnnualRun)> {
    let run = run_annual(member, drivers, 2100.0)?;
    let years = drivers.forcing_years();
    let scaled = |k: usize| -> Vec<f64> { (0..years.len()).map(|i| member.category_forcing(drivers, k, i)).collect() };
    let ari = window_mean(&years, &scaled(ARI), 2005.0, 2014.0);
    let aci = window_mean(&years, &scaled(ACI), 2005.0, 2014.0);
    let present = run.window(&run.t1, 1995.0, 2014.0);
    let ohc: f64 = run
        .years
        .iter()
        .zip(&run.imbalance)
        .filter(|(y, _)| (1971.0..=2018.0).contains(*y))
        .map(|(_, n)| n)
        .sum::<f64>()
        * OHC_JOULES_PER_WM2_YR
        / 1e21;
    let metrics = Metrics {
        ecs: member.ecs(),
        tcr: member.tcr()?,
        historical_warming: present - run.window(&run.t1, 1850.0, 1900.0),
        erf_ari: ari,
        erf_aci: aci,
        erf_aerosol: ari + aci,
        co2_2014: run.concentration[Drivers::index(2014.0)],
        ohc_change: ohc,
        ssp245_warming: run.window(&run.t1, 2081.0, 2100.0) - present,
    };
    Ok((metrics, run))
}

/// State at the start of [`HANDOVER_YEAR`], with temperatures re-baselined so
/// the member's 1995-2014 mean surface warming is the observed value.
pub fn spinup(member: &MemberParams, drivers: &Drivers) -> Result<InitialConditions> {
    let run = run_annual(member, drivers, HANDOVER_YEAR - 1.0)?;
    let c = CarbonCycle::new(member.carbon.clone())?.concentration(&run.carbon);
    let f_co2 = co2_forcing(c, member.carbon.c_ref, member.f2x_eff())?;
    Ok(InitialConditions {
        pools: run.carbon.pools,
        temperatures: rebaseline_temperatures(run.temperature.layers, run.window(&run.t1, 1995.0, 2014.0)),
        f2x_eff: effective_f2x(f_co2, c, member.carbon.c_ref)?,
        c_ref: member.carbon.c_ref,
        cumulative_emissions: run.carbon.cumulative_emissions,
    })
}

/// Non-CO2 forcing for each coupled-model period: the mean of the annual
/// values inside the period, holding the last driver year beyond the data.
pub fn period_forcing(member: &MemberParams, drivers: &Drivers, start_year: f64, dt: f64, periods: usize) -> Vec<f64> {
    let steps = dt.round().max(1.0) as usize;
    (0..periods)
        .map(|t| {
            let first = Drivers::index(start_year + dt * t as f64);
            (first..first + steps).map(|i| member.nonco2_forcing(drivers, i)).sum::<f64>() / steps as f64
        })
        .collect()
}

/// One case of the ECS demonstration.
#[derive(Debug, Clone)]
pub struct EcsCase {
    pub ecs: f64,
    pub series: Series,
    /// Against observations, both re-baselined to 1850-1900.
    pub rmse: f64,
}

pub const DEMO_ECS_VALUES: [f64; 3] = [2.0, 3.0, 5.0];

/// Historical surface warming with the climate feedback set so that ECS takes
/// each requested value, everything else held at `median`.
pub fn ecs_variation_demo(
    median: &MemberParams,
    drivers: &Drivers,
    observations: &Series,
    ecs_values: &[f64],
) -> Result<Vec<EcsCase>> {
    let last = observations
        .years
        .last()
        .copied()
        .ok_or(Error::EmptyOverlap)?
        .min(drivers.last_emissions_year());
    ecs_values
        .iter()
        .map(|&ecs| {
            if !(ecs > 0.0) {
                return Err(Error::invalid("ecs", format!("{ecs} must be positive")));
            }
            let mut m = median.clone();
            m.ebm.kappa[0] = m.f2x_eff() / ecs;
            let run = run_annual(&m, drivers, last)?;
            let series = run.surface_series().rebaselined(1850.0, 1900.0);
            let rmse = crate::ensemble::aligned_rmse(&series, observations)?;
            Ok(EcsCase { ecs, series, rmse })
        })
        .collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn reference_member() -> MemberParams {
        MemberParams {
            id: 0,
            ebm: EbmParams {
                kappa: [1.31, 2.5, 0.8],
                heat_capacity: [7.5, 22.0, 90.0],
                efficacy: 1.25,
                gamma_autocorr: 3.0,
                f2x: 3.93,
                dt: 1.0,
            },
            carbon: CarbonParams::default(),
            scales: ForcingScales::default(),
        }
    }

    /// Smooth toy drivers: emissions rising to 40 GtCO2/yr by 2020, then
    /// falling to zero by 2100; a single forcing category ramping to 0.5.
    pub fn toy_drivers() -> Drivers {
        let n = (2500.0 - START_YEAR) as usize + 1;
        let co2 = (0..=350)
            .map(|i| {
                let y = Drivers::year(i);
                if y <= 2020.0 {
                    40.0 * ((y - 2020.0) / 50.0).exp()
                } else {
                    40.0 * (1.0 - (y - 2020.0) / 80.0)
                }
            })
            .collect();
        let nonco2 = (0..n)
            .map(|i| {
                let mut row = [0.0; N_CATEGORIES];
                row[0] = 0.5 * ((Drivers::year(i) - 1750.0) / 270.0).clamp(0.0, 1.0).powi(3);
                row
            })
            .collect();
        Drivers {
            co2_emissions: co2,
            nonco2,
        }
    }

    #[test]
    fn zero_drivers_stay_at_rest() {
        let d = Drivers {
            co2_emissions: vec![0.0; 400],
            nonco2: vec![[0.0; N_CATEGORIES]; 400],
        };
        let run = run_annual(&reference_member(), &d, 2100.0).unwrap();
        assert!(run.t1.iter().all(|t| *t == 0.0));
        assert!(run.concentration.iter().all(|c| *c == 278.3));
    }

    #[test]
    fn constant_forcing_approaches_equilibrium() {
        let mut d = Drivers {
            co2_emissions: vec![0.0; 800],
            nonco2: vec![[0.0; N_CATEGORIES]; 800],
        };
        d.nonco2.iter_mut().for_each(|r| r[0] = 3.93);
        let m = reference_member();
        let run = run_annual(&m, &d, 2540.0).unwrap();
        // the slow deep-ocean mode takes centuries; after 790 years we are close
        assert!((run.t1.last().unwrap() - m.ecs()).abs() < 0.1 * m.ecs());
    }

    #[test]
    fn short_drivers_rejected() {
        let d = toy_drivers();
        assert!(matches!(run_annual(&reference_member(), &d, 2101.0), Err(Error::SeriesTooShort(_))));
    }

    #[test]
    fn ohc_matches_energy_accumulated() {
        // heat content gained by the layers equals the integrated imbalance
        let m = reference_member();
        let d = toy_drivers();
        let run = run_annual(&m, &d, 2100.0).unwrap();
        let stored: f64 = m.ebm.heat_capacity.iter().zip(run.temperature.layers).map(|(c, t)| c * t).sum();
        let integrated: f64 = run.imbalance.iter().sum();
        assert!((stored - integrated).abs() < 1e-2 * stored, "{stored} vs {integrated}");
    }

    #[test]
    fn metrics_are_consistent() {
        let m = reference_member();
        let (metrics, run) = member_metrics(&m, &toy_drivers()).unwrap();
        assert!((metrics.ecs - 3.0).abs() < 1e-12);
        assert!(metrics.tcr > 1.0 && metrics.tcr < metrics.ecs);
        assert!(metrics.historical_warming > 0.0);
        assert_eq!(metrics.erf_aerosol, 0.0);
        assert!(metrics.co2_2014 > 278.3);
        assert!(metrics.ohc_change > 0.0);
        assert_eq!(run.years.len(), 351);
    }

    #[test]
    fn spinup_rebaselines_and_recovers_f2x() {
        let mut m = reference_member();
        m.scales.co2 = 1.1;
        let init = spinup(&m, &toy_drivers()).unwrap();
        assert!((init.f2x_eff - 1.1 * 3.93).abs() < 1e-12);
        let run = run_annual(&m, &toy_drivers(), 2022.0).unwrap();
        let shift = init.temperatures[0] - run.temperature.layers[0];
        for j in 0..3 {
            assert!((init.temperatures[j] - run.temperature.layers[j] - shift).abs() < 1e-12);
        }
        assert!((run.window(&run.t1, 1995.0, 2014.0) + shift - 0.85).abs() < 1e-12);
    }

    #[test]
    fn period_forcing_averages_years() {
        let m = reference_member();
        let d = toy_drivers();
        let f = period_forcing(&m, &d, 2023.0, 3.0, 160);
        assert_eq!(f.len(), 160);
        let i = Drivers::index(2023.0);
        let expect = (0..3).map(|k| m.nonco2_forcing(&d, i + k)).sum::<f64>() / 3.0;
        assert_eq!(f[0], expect);
        // the last period runs past 2500 and holds the final value
        assert!((f[159] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn solar_trend_ramps() {
        let mut m = reference_member();
        m.scales.solar_trend = 0.08;
        let d = toy_drivers();
        let k = category_index("solar").unwrap();
        assert_eq!(m.category_forcing(&d, k, 0), 0.0);
        assert!((m.category_forcing(&d, k, Drivers::index(2019.0)) - 0.08).abs() < 1e-15);
        assert!((m.category_forcing(&d, k, Drivers::index(2200.0)) - 0.08).abs() < 1e-15);
    }

    #[test]
    fn demo_orders_by_sensitivity() {
        let m = reference_member();
        let d = toy_drivers();
        let base = run_annual(&m, &d, 2022.0).unwrap().surface_series().rebaselined(1850.0, 1900.0);
        let cases = ecs_variation_demo(&m, &d, &base, &DEMO_ECS_VALUES).unwrap();
        assert!(cases[1].rmse < 1e-9);
        for i in 0..cases[0].series.years.len() {
            if cases[0].series.years[i] > 1900.0 {
                assert!(cases[0].series.values[i] < cases[1].series.values[i]);
                assert!(cases[1].series.values[i] < cases[2].series.values[i]);
            }
        }
    }
}
