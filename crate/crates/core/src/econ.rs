//! DICE-style global economy on a 3-yr grid starting in 2023.
//!
//! Production is Cobb-Douglas in capital and labour, fossil emissions are
//! proportional to gross output through a declining emissions intensity, and
//! output is reduced by quadratic damages and a power-law abatement cost.
//! Land-use emissions follow a regression on fossil emissions and time that is
//! phased out logistically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AfoluParams {
    /// GtCO2 yr^-1
    pub intercept: f64,
    /// Response to fossil emissions, dimensionless.
    pub ffi_slope: f64,
    /// GtCO2 yr^-1 per period
    pub period_slope: f64,
    /// Period index at the logistic midpoint.
    pub logistic_center: f64,
}

impl Default for AfoluParams {
    fn default() -> Self {
        Self {
            intercept: 1.54,
            ffi_slope: 0.0464,
            period_slope: -0.189,
            logistic_center: 35.0,
        }
    }
}

/// Economic parameters. Rates are per year; money is trillion 2020$,
/// labour is millions of people.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconParams {
    pub capital_elasticity: f64,
    /// yr^-1
    pub depreciation: f64,
    /// Pure rate of time preference, yr^-1.
    pub rho: f64,
    /// Elasticity of marginal utility.
    pub eta: f64,
    /// Damage coefficient, K^-2.
    pub damage_coeff: f64,
    pub abatement_exponent: f64,
    /// Backstop price in the first period, $ per tCO2.
    pub backstop_price0: f64,
    /// Fractional decline of the backstop price, yr^-1.
    pub backstop_decline: f64,
    /// Fossil emissions in the first period, GtCO2 yr^-1.
    pub emissions0: f64,
    /// Initial sigma growth rate, yr^-1.
    pub sigma_growth0: f64,
    /// Compounding change of the sigma growth rate, yr^-1.
    pub sigma_growth_change: f64,
    /// Initial TFP growth rate, yr^-1.
    pub tfp_growth0: f64,
    /// Exponential decline of the TFP growth rate, yr^-1.
    pub tfp_growth_decline: f64,
    pub capital0: f64,
    pub output0: f64,
    /// Abatement fixed in the first period.
    pub mu_first: f64,
    /// Per-period increment of the abatement ceiling during the ramp.
    pub mu_ramp_slope: f64,
    pub mu_ramp_periods: usize,
    pub mu_cap_late: f64,
    pub savings_max: f64,
    /// Number of final periods with savings fixed at the long-run value.
    pub terminal_savings_periods: usize,
    /// Trillion $ per year.
    pub consumption_floor: f64,
    pub capital_floor: f64,
    /// Upper clamp of the damage fraction.
    pub damage_cap: f64,
    pub periods: usize,
    /// yr
    pub dt: f64,
    pub start_year: f64,
    pub afolu: AfoluParams,
}

impl EconParams {
    /// DICE-2016R economic defaults re-expressed as annual rates on the
    /// 3-yr grid, with the 2023 calibration of capital, output and emissions.
    pub fn dice2016r_defaults() -> Self {
        Self {
            capital_elasticity: 0.3,
            depreciation: 0.1,
            rho: 0.015,
            eta: 1.45,
            damage_coeff: 0.00236,
            abatement_exponent: 2.6,
            backstop_price0: 550.0,
            // 2.5% per 5 years
            backstop_decline: 1.0 - 0.975f64.powf(0.2),
            emissions0: 36.6,
            sigma_growth0: -0.0152,
            sigma_growth_change: -0.001,
            // 7.6% per 5 years
            tfp_growth0: -(1.0 - 0.076f64).ln() / 5.0,
            tfp_growth_decline: 0.005,
            capital0: 341.0,
            output0: 133.0,
            mu_first: 0.15,
            mu_ramp_slope: 0.15,
            mu_ramp_periods: 7,
            mu_cap_late: 1.2,
            savings_max: 0.9,
            terminal_savings_periods: 10,
            consumption_floor: 1e-6,
            capital_floor: 1e-3,
            damage_cap: 0.99,
            periods: 160,
            dt: 3.0,
            start_year: 2023.0,
            afolu: AfoluParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.capital_elasticity > 0.0 && self.capital_elasticity < 1.0) {
            return Err(Error::invalid("capital_elasticity", "must lie in (0, 1)"));
        }
        if !(self.eta >= 0.0) {
            return Err(Error::invalid("eta", "must be >= 0"));
        }
        if !(self.rho >= 0.0) {
            return Err(Error::invalid("rho", "must be >= 0"));
        }
        if !(self.dt > 0.0) || self.periods == 0 {
            return Err(Error::invalid("periods", "need at least one period of positive length"));
        }
        if !(self.capital0 > 0.0 && self.output0 > 0.0) {
            return Err(Error::invalid("capital0", "initial capital and output must be positive"));
        }
        if !(self.savings_max > 0.0 && self.savings_max < 1.0) {
            return Err(Error::invalid("savings_max", "must lie in (0, 1)"));
        }
        if self.terminal_savings_periods >= self.periods {
            return Err(Error::invalid("terminal_savings_periods", "exceeds horizon"));
        }
        if self.mu_first < 0.0 || self.mu_first > self.mu_cap_late {
            return Err(Error::invalid("mu_first", "outside abatement bounds"));
        }
        Ok(())
    }

    pub fn year(&self, period: usize) -> f64 {
        self.start_year + self.dt * (period as f64 - 1.0)
    }

    pub fn end_year(&self) -> f64 {
        self.year(self.periods)
    }

    /// Emissions intensity in the first period, kgCO2 per $.
    pub fn sigma0(&self) -> f64 {
        self.emissions0 / (self.output0 * (1.0 - self.mu_first))
    }

    /// Long-run optimal savings rate used for the terminal periods.
    pub fn terminal_savings(&self) -> f64 {
        let long_run_growth = 0.004;
        let s = self.capital_elasticity * (self.depreciation + long_run_growth)
            / (self.depreciation + long_run_growth * self.eta + self.rho);
        s.min(self.savings_max)
    }
}

/// Economic state at the start of a period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EconState {
    /// trillion $
    pub capital: f64,
    pub tfp: f64,
    /// millions
    pub labour: f64,
    /// kgCO2 per $
    pub sigma: f64,
}

/// Decision vectors over the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlPath {
    pub mu: Vec<f64>,
    pub savings: Vec<f64>,
}

impl ControlPath {
    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// Flatten as `[mu..., savings...]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.mu.clone();
        v.extend_from_slice(&self.savings);
        v
    }

    pub fn from_slice(x: &[f64]) -> Self {
        let n = x.len() / 2;
        Self {
            mu: x[..n].to_vec(),
            savings: x[n..].to_vec(),
        }
    }
}

pub fn gross_output(tfp: f64, capital: f64, labour: f64, capital_elasticity: f64) -> f64 {
    tfp * capital.powf(capital_elasticity) * labour.powf(1.0 - capital_elasticity)
}

pub fn calibrate_tfp(output: f64, capital: f64, labour: f64, capital_elasticity: f64) -> f64 {
    output / (capital.powf(capital_elasticity) * labour.powf(1.0 - capital_elasticity))
}

/// Fossil and industrial emissions, GtCO2 yr^-1.
pub fn emissions_ffi(sigma: f64, output: f64, mu: f64) -> f64 {
    sigma * output * (1.0 - mu)
}

/// Land-use phase-out factor for period `t`.
pub fn afolu_logistic(t: f64, center: f64) -> f64 {
    1.0 - 1.0 / (1.0 + (-(t - center)).exp())
}

/// Land-use emissions, GtCO2 yr^-1, for fossil emissions `e_ffi` in period `t`.
pub fn afolu_emissions(params: &AfoluParams, e_ffi: f64, t: usize) -> f64 {
    let t = t as f64;
    (params.intercept + params.ffi_slope * e_ffi + params.period_slope * t)
        * afolu_logistic(t, params.logistic_center)
}

/// Abatement bounds `(lo, hi)` for period `t` (1-based).
pub fn mu_bounds(params: &EconParams, t: usize) -> Result<(f64, f64)> {
    if t == 0 || t > params.periods {
        return Err(Error::PeriodOutOfRange(t, params.periods));
    }
    if t == 1 {
        return Ok((params.mu_first, params.mu_first));
    }
    let hi = if t <= params.mu_ramp_periods {
        params.mu_ramp_slope * t as f64
    } else {
        params.mu_cap_late
    };
    Ok((0.0, hi))
}

/// Savings bounds for period `t`; the final periods are pinned.
pub fn savings_bounds(params: &EconParams, t: usize) -> Result<(f64, f64)> {
    if t == 0 || t > params.periods {
        return Err(Error::PeriodOutOfRange(t, params.periods));
    }
    if t > params.periods - params.terminal_savings_periods {
        let s = params.terminal_savings();
        return Ok((s, s));
    }
    Ok((0.0, params.savings_max))
}

/// Abatement cost coefficient for backstop price `backstop` ($/tCO2) and
/// intensity `sigma`.
pub fn abatement_cost_coeff(backstop: f64, sigma: f64, exponent: f64) -> f64 {
    backstop * sigma / exponent / 1000.0
}

/// Abatement cost as a fraction of gross output.
pub fn abatement_cost_fraction(mu: f64, theta1: f64, exponent: f64) -> f64 {
    theta1 * mu.max(0.0).powf(exponent)
}

/// Quadratic damages as a fraction of gross output, clamped below `cap`.
pub fn damage_fraction(t1: f64, coeff: f64, cap: f64) -> f64 {
    (coeff * t1 * t1).min(cap)
}

/// Capital after one step of `dt` years with investment `savings * net_output`
/// per year. Returns the floored value and whether the floor bound.
pub fn capital_step(
    capital: f64,
    net_output: f64,
    savings: f64,
    dt: f64,
    depreciation: f64,
    floor: f64,
) -> (f64, bool) {
    let k = capital * (1.0 - depreciation).powf(dt) + dt * savings * net_output;
    if k < floor {
        (floor, true)
    } else {
        (k, false)
    }
}

/// Isoelastic utility of per-capita consumption (thousand $ per person).
pub fn period_utility(consumption_per_capita: f64, eta: f64) -> Result<f64> {
    if !(consumption_per_capita > 0.0) {
        return Err(Error::Domain(format!(
            "per-capita consumption must be positive, got {consumption_per_capita}"
        )));
    }
    if eta == 1.0 {
        Ok(consumption_per_capita.ln())
    } else {
        Ok((consumption_per_capita.powf(1.0 - eta) - 1.0) / (1.0 - eta))
    }
}

/// Discount factor for period `t` (1-based).
pub fn discount_factor(rho: f64, dt: f64, t: usize) -> f64 {
    (1.0 + rho).powf(-dt * (t as f64 - 1.0))
}

/// Discounted population-weighted utility of a consumption path.
pub fn welfare(
    consumption_per_capita: &[f64],
    labour: &[f64],
    rho: f64,
    eta: f64,
    dt: f64,
) -> Result<f64> {
    consumption_per_capita
        .iter()
        .zip(labour)
        .enumerate()
        .try_fold(0.0, |acc, (i, (c, l))| {
            let u = period_utility(*c, eta).map_err(|e| e.at_period(i + 1))?;
            Ok(acc + l * u * discount_factor(rho, dt, i + 1))
        })
}

/// Ramsey discount rate `rho + eta * g`, in the units of `rho` and `g`.
pub fn ramsey_rate(rho: f64, eta: f64, g: f64) -> f64 {
    rho + eta * g
}

/// First year of the averaging window for the population extension.
pub const POP_GROWTH_WINDOW_START: f64 = 2250.0;
pub const POP_SERIES_END: f64 = 2300.0;
pub const POP_EXTENDED_END: f64 = 2500.0;

/// Extend a population series ending in 2300 to 2500.
///
/// The mean per-step growth over 2250-2300 declines linearly to zero at 2500.
/// Input years must be evenly spaced.
pub fn extend_population(years: &[f64], values: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if years.len() != values.len() || years.len() < 2 {
        return Err(Error::SeriesTooShort("need at least two population points".into()));
    }
    let step = years[1] - years[0];
    if !(step > 0.0) || years.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > 1e-9) {
        return Err(Error::SeriesTooShort("population years must be evenly spaced".into()));
    }
    let last = *years.last().unwrap();
    if last > POP_SERIES_END {
        return Err(Error::SeriesTooShort(format!(
            "population already extends to {last}; expected a series ending in {POP_SERIES_END}"
        )));
    }
    if last < POP_SERIES_END || years[0] > POP_GROWTH_WINDOW_START {
        return Err(Error::SeriesTooShort(format!(
            "population must cover {POP_GROWTH_WINDOW_START}-{POP_SERIES_END}, got {}-{last}",
            years[0]
        )));
    }
    if values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Domain("population values must be positive".into()));
    }
    let rates: Vec<f64> = years
        .windows(2)
        .zip(values.windows(2))
        .filter(|(y, _)| y[0] >= POP_GROWTH_WINDOW_START - 1e-9 && y[1] <= POP_SERIES_END + 1e-9)
        .map(|(_, v)| v[1] / v[0] - 1.0)
        .collect();
    let mean_growth = rates.iter().sum::<f64>() / rates.len() as f64;

    let mut out_years = years.to_vec();
    let mut out_values = values.to_vec();
    let span = POP_EXTENDED_END - POP_SERIES_END;
    let mut year = last;
    let mut pop = *values.last().unwrap();
    while year + step <= POP_EXTENDED_END + 1e-9 {
        year += step;
        let g = mean_growth * (POP_EXTENDED_END - year) / span;
        pop *= 1.0 + g;
        out_years.push(year);
        out_values.push(pop);
    }
    Ok((out_years, out_values))
}

/// Exogenous paths for one parameter set and population, indexed by period.
#[derive(Debug, Clone)]
pub struct EconPaths {
    pub years: Vec<f64>,
    pub labour: Vec<f64>,
    pub tfp: Vec<f64>,
    pub sigma: Vec<f64>,
    pub backstop: Vec<f64>,
    pub theta1: Vec<f64>,
    pub discount: Vec<f64>,
}

impl EconPaths {
    /// Build the exogenous paths; `population(year)` gives millions of people.
    pub fn new(params: &EconParams, population: impl Fn(f64) -> f64) -> Result<Self> {
        params.validate()?;
        let n = params.periods;
        let dt = params.dt;
        let years: Vec<f64> = (1..=n).map(|t| params.year(t)).collect();
        let labour: Vec<f64> = years.iter().map(|y| population(*y)).collect();
        if let Some(i) = labour.iter().position(|l| !(*l > 0.0)) {
            return Err(Error::Domain(format!("population not positive in {}", years[i])));
        }
        let mut tfp = Vec::with_capacity(n);
        let mut sigma = Vec::with_capacity(n);
        let mut a = calibrate_tfp(params.output0, params.capital0, labour[0], params.capital_elasticity);
        let mut s = params.sigma0();
        for t in 1..=n {
            tfp.push(a);
            sigma.push(s);
            let elapsed = dt * (t as f64 - 1.0);
            let ga = params.tfp_growth0 * (-params.tfp_growth_decline * elapsed).exp();
            a *= (ga * dt).exp();
            let gs = params.sigma_growth0 * (1.0 + params.sigma_growth_change).powf(elapsed);
            s *= (gs * dt).exp();
        }
        let backstop: Vec<f64> = (1..=n)
            .map(|t| params.backstop_price0 * (1.0 - params.backstop_decline).powf(dt * (t as f64 - 1.0)))
            .collect();
        let theta1 = backstop
            .iter()
            .zip(&sigma)
            .map(|(b, s)| abatement_cost_coeff(*b, *s, params.abatement_exponent))
            .collect();
        let discount = (1..=n).map(|t| discount_factor(params.rho, dt, t)).collect();
        Ok(Self {
            years,
            labour,
            tfp,
            sigma,
            backstop,
            theta1,
            discount,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn production_identities() {
        assert_eq!(gross_output(1.0, 1.0, 1.0, 0.3), 1.0);
        let y1 = gross_output(0.05, 341.0, 8000.0, 0.3);
        let y2 = gross_output(0.05, 682.0, 8000.0, 0.3);
        assert_relative_eq!(y2 / y1, 2f64.powf(0.3), max_relative = 1e-14);
        let a = calibrate_tfp(133.0, 341.0, 7980.0, 0.3);
        assert_relative_eq!(gross_output(a, 341.0, 7980.0, 0.3), 133.0, max_relative = 1e-12);
        assert_relative_eq!(calibrate_tfp(133.0, 341.0, 7980.0, 0.0), 133.0 / 7980.0, max_relative = 1e-14);
    }

    #[test]
    fn emissions_calibration() {
        let p = EconParams::dice2016r_defaults();
        assert_relative_eq!(emissions_ffi(p.sigma0(), 133.0, 0.15), 36.6, max_relative = 1e-12);
        assert_eq!(emissions_ffi(0.3, 100.0, 1.0), 0.0);
        assert_relative_eq!(emissions_ffi(0.3, 100.0, 1.2), -0.2 * 30.0, max_relative = 1e-12);
    }

    #[test]
    fn afolu_regression_and_phase_out() {
        let a = AfoluParams::default();
        let reg35 = 1.54 + 0.0464 * 20.0 - 0.189 * 35.0;
        assert_relative_eq!(afolu_emissions(&a, 20.0, 35), 0.5 * reg35, max_relative = 1e-12);
        let l1 = afolu_logistic(1.0, 35.0);
        assert!(1.0 - l1 < 1e-14);
        assert_relative_eq!(
            afolu_emissions(&a, 36.6, 1),
            (1.54 + 0.0464 * 36.6 - 0.189) * l1,
            max_relative = 1e-12
        );
        assert!(afolu_emissions(&a, 36.6, 160).abs() < 1e-40);
        assert!(afolu_emissions(&a, 30.0, 10) > afolu_emissions(&a, 20.0, 10));
    }

    #[test]
    fn abatement_bound_schedule() {
        let p = EconParams::dice2016r_defaults();
        assert_eq!(mu_bounds(&p, 1).unwrap(), (0.15, 0.15));
        let (lo, hi) = mu_bounds(&p, 4).unwrap();
        assert_eq!(lo, 0.0);
        assert_relative_eq!(hi, 0.60, epsilon = 1e-15);
        assert_eq!(mu_bounds(&p, 8).unwrap(), (0.0, 1.2));
        assert!(mu_bounds(&p, 0).is_err());
        assert!(mu_bounds(&p, 161).is_err());
        for t in 2..=160 {
            let (_, hi) = mu_bounds(&p, t).unwrap();
            let expect = if t <= 7 { 0.15 * t as f64 } else { 1.2 };
            assert_relative_eq!(hi, expect, epsilon = 1e-15);
        }
    }

    #[test]
    fn abatement_and_damage_shapes() {
        assert_eq!(abatement_cost_fraction(0.0, 0.07, 2.6), 0.0);
        let c1 = abatement_cost_fraction(0.3, 0.07, 2.6);
        let c2 = abatement_cost_fraction(0.6, 0.07, 2.6);
        assert_relative_eq!(c2 / c1, 2f64.powf(2.6), max_relative = 1e-12);
        // at mu = 1 the cost is the backstop price times emissions intensity / theta2
        let theta1 = abatement_cost_coeff(550.0, 0.32, 2.6);
        assert_relative_eq!(abatement_cost_fraction(1.0, theta1, 2.6), 550.0 * 0.32 / 2.6 / 1000.0, max_relative = 1e-14);
        assert_eq!(damage_fraction(0.0, 0.00236, 0.99), 0.0);
        assert_relative_eq!(damage_fraction(3.0, 0.00236, 0.99), 9.0 * 0.00236, max_relative = 1e-14);
        assert_relative_eq!(
            damage_fraction(4.0, 0.00236, 0.99) / damage_fraction(2.0, 0.00236, 0.99),
            4.0,
            max_relative = 1e-14
        );
        assert_eq!(damage_fraction(100.0, 0.00236, 0.99), 0.99);
    }

    #[test]
    fn capital_accumulation_convention() {
        assert_eq!(capital_step(300.0, 100.0, 0.0, 3.0, 0.0, 1e-3).0, 300.0);
        assert_relative_eq!(capital_step(300.0, 100.0, 0.0, 3.0, 0.1, 1e-3).0, 300.0 * 0.729, max_relative = 1e-14);
        // One 3-yr step deposits the whole period's investment undepreciated;
        // three annual substeps depreciate the earlier deposits.
        let (k, s, y, d) = (300.0, 0.25, 120.0, 0.1);
        let one = capital_step(k, y, s, 3.0, d, 1e-3).0;
        let mut sub = k;
        for _ in 0..3 {
            sub = capital_step(sub, y, s, 1.0, d, 1e-3).0;
        }
        let inv = s * y;
        assert_relative_eq!(one - sub, inv * (3.0 - (1.0 + 0.9 + 0.81)), max_relative = 1e-12);
        assert_eq!(capital_step(1.0, -1000.0, 0.5, 3.0, 0.1, 1e-3), (1e-3, true));
    }

    #[test]
    fn utility_branches() {
        for eta in [0.12, 1.0, 1.45] {
            assert!(period_utility(1.0, eta).unwrap().abs() < 1e-15);
        }
        assert_relative_eq!(period_utility(std::f64::consts::E, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        let u = period_utility(2.0, 1.45).unwrap();
        assert_relative_eq!(u, (2f64.powf(-0.45) - 1.0) / -0.45, max_relative = 1e-14);
        let lo = period_utility(2.0, 1.0 - 1e-6).unwrap();
        let hi = period_utility(2.0, 1.0 + 1e-6).unwrap();
        let mid = period_utility(2.0, 1.0).unwrap();
        assert!((lo - mid).abs() < 1e-6 && (hi - mid).abs() < 1e-6);
        assert!(period_utility(0.0, 1.45).is_err());
        assert!(period_utility(-1.0, 1.0).is_err());
    }

    #[test]
    fn welfare_sums() {
        let w = welfare(&[2.0], &[100.0], 0.015, 1.45, 3.0).unwrap();
        assert_relative_eq!(w, 100.0 * period_utility(2.0, 1.45).unwrap(), max_relative = 1e-14);
        let w2 = welfare(&[2.0, 3.0], &[100.0, 110.0], 0.02, 1.45, 3.0).unwrap();
        let expect = 100.0 * period_utility(2.0, 1.45).unwrap()
            + 110.0 * period_utility(3.0, 1.45).unwrap() / 1.02f64.powi(3);
        assert_relative_eq!(w2, expect, max_relative = 1e-14);
        let huge = welfare(&[2.0, 3.0], &[100.0, 110.0], 1e9, 1.45, 3.0).unwrap();
        assert_relative_eq!(huge, w, max_relative = 1e-12);
        assert!(welfare(&[2.0, 0.0], &[1.0, 1.0], 0.01, 1.45, 3.0).is_err());
    }

    #[test]
    fn ramsey_examples() {
        assert_eq!(ramsey_rate(1.5, 0.0, 2.0), 1.5);
        assert!((ramsey_rate(0.2, 1.24, 1.84) - 2.4816).abs() < 1e-12);
        assert!((ramsey_rate(1.5, 1.45, 1.10) - 3.1).abs() < 0.01);
    }

    #[test]
    fn population_extension() {
        let years: Vec<f64> = (2200..=2300).map(f64::from).collect();
        let flat = vec![7000.0; years.len()];
        let (y, v) = extend_population(&years, &flat).unwrap();
        assert_eq!(*y.last().unwrap(), 2500.0);
        assert!(v.iter().all(|p| (*p - 7000.0).abs() < 1e-9));

        // constant growth: closed-form product
        let g: f64 = -0.004;
        let vals: Vec<f64> = years.iter().map(|yr| 7300.0 * (1.0 + g).powf(yr - 2300.0)).collect();
        let (_, ext) = extend_population(&years, &vals).unwrap();
        let expected = (2301..=2500).fold(7300.0, |p, yr| p * (1.0 + g * (2500.0 - yr as f64) / 200.0));
        assert_relative_eq!(*ext.last().unwrap(), expected, max_relative = 1e-10);

        assert!(extend_population(&years[..50], &vals[..50]).is_err());
        let (ey, ev) = extend_population(&years, &vals).unwrap();
        let err = extend_population(&ey, &ev).unwrap_err();
        assert!(err.to_string().contains("already extends"));
    }

    #[test]
    fn exogenous_paths() {
        let p = EconParams::dice2016r_defaults();
        let paths = EconPaths::new(&p, |_| 8000.0).unwrap();
        assert_eq!(paths.years.len(), 160);
        assert_eq!(paths.years[159], 2500.0);
        assert_relative_eq!(
            gross_output(paths.tfp[0], p.capital0, 8000.0, 0.3),
            133.0,
            max_relative = 1e-12
        );
        assert!(paths.sigma.windows(2).all(|w| w[1] < w[0]));
        assert!(paths.tfp.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(paths.discount[0], 1.0);
    }
}
