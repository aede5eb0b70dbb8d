//! Forward simulation of one ensemble member under a control path.
//!
//! Each 3-yr period runs production and emissions, forcing from the
//! start-of-period concentration, damages and abatement, the consumption and
//! investment split, then advances the carbon pools, temperatures and capital.

use serde::{Deserialize, Serialize};

use crate::carbon::{CarbonCycle, CarbonParams, CarbonState};
use crate::climate::{co2_forcing, discretize, DiscreteEbm, EbmParams, TemperatureState};
use crate::econ::{
    abatement_cost_fraction, afolu_emissions, capital_step, damage_fraction, emissions_ffi,
    gross_output, period_utility, ramsey_rate, ControlPath, EconParams, EconPaths,
};
use crate::error::{Error, Result};
use crate::numerics::interp;

/// Model state at the 2023 handover for one member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialConditions {
    /// GtCO2
    pub pools: [f64; 4],
    /// Re-baselined layer temperatures, K.
    pub temperatures: [f64; 3],
    /// W m^-2
    pub f2x_eff: f64,
    /// ppm
    pub c_ref: f64,
    /// GtCO2
    pub cumulative_emissions: f64,
}

/// Everything needed to simulate one member under one scenario.
#[derive(Debug, Clone)]
pub struct Model {
    pub econ: EconParams,
    pub paths: EconPaths,
    pub carbon: CarbonCycle,
    pub ebm: DiscreteEbm,
    pub init: InitialConditions,
    /// Non-CO2 forcing per period, W m^-2.
    pub f_ext: Vec<f64>,
}

/// Perturbations used for marginal-value calculations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Perturbation {
    pub period: usize,
    /// Added to total emissions entering the carbon cycle, GtCO2 yr^-1.
    pub emissions: f64,
    /// Added to consumption, trillion $ yr^-1.
    pub consumption: f64,
}

/// State carried between periods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimState {
    pub carbon: CarbonState,
    pub temperature: TemperatureState,
    pub capital: f64,
    /// Discounted welfare accumulated over completed periods.
    pub welfare: f64,
}

/// Per-period outputs. Flows are annual rates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PeriodRecord {
    pub year: f64,
    pub mu: f64,
    pub savings: f64,
    pub e_ffi: f64,
    pub e_afolu: f64,
    pub e_total: f64,
    pub concentration: f64,
    pub f_co2: f64,
    pub f_ext: f64,
    pub forcing: f64,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub alpha: f64,
    pub labour: f64,
    pub capital: f64,
    pub y_gross: f64,
    pub y_net: f64,
    pub damage_frac: f64,
    pub abatement_frac: f64,
    pub damages: f64,
    pub abatement: f64,
    pub investment: f64,
    pub consumption: f64,
    /// Thousand $ per person per year.
    pub consumption_pc: f64,
    /// Discounted, population-weighted utility of this period.
    pub welfare_term: f64,
}

/// Counters for silent clamps applied along a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClampCounts {
    pub iirf: usize,
    pub consumption: usize,
    pub capital: usize,
    pub damages: usize,
}

impl ClampCounts {
    fn add(&mut self, other: ClampCounts) {
        self.iirf += other.iirf;
        self.consumption += other.consumption;
        self.capital += other.capital;
        self.damages += other.damages;
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub periods: Vec<PeriodRecord>,
    pub welfare: f64,
    pub clamps: ClampCounts,
}

impl Model {
    pub fn new(
        econ: EconParams,
        paths: EconPaths,
        mut carbon: CarbonParams,
        ebm: &EbmParams,
        init: InitialConditions,
        f_ext: Vec<f64>,
    ) -> Result<Self> {
        econ.validate()?;
        if f_ext.len() != econ.periods || paths.years.len() != econ.periods {
            return Err(Error::invalid(
                "f_ext",
                format!("need {} periods, got {}", econ.periods, f_ext.len()),
            ));
        }
        if let Some(i) = f_ext.iter().position(|f| !f.is_finite()) {
            return Err(Error::Domain("non-finite external forcing".into()).at_period(i + 1));
        }
        if !(init.f2x_eff > 0.0) {
            return Err(Error::invalid("f2x_eff", "must be > 0"));
        }
        carbon.c_ref = init.c_ref;
        let carbon = CarbonCycle::new(carbon)?;
        let ebm = discretize(&ebm.with_dt(econ.dt))?;
        Ok(Self {
            econ,
            paths,
            carbon,
            ebm,
            init,
            f_ext,
        })
    }

    pub fn periods(&self) -> usize {
        self.econ.periods
    }

    pub fn initial_state(&self) -> SimState {
        SimState {
            carbon: CarbonState::new(self.init.pools, self.init.cumulative_emissions),
            temperature: TemperatureState::new(self.init.temperatures),
            capital: self.econ.capital0,
            welfare: 0.0,
        }
    }

    /// Advance one period `t` (1-based) with controls `mu`, `s`.
    pub fn advance(
        &self,
        state: &SimState,
        t: usize,
        mu: f64,
        s: f64,
        perturb: Option<&Perturbation>,
    ) -> Result<(SimState, PeriodRecord, ClampCounts)> {
        let p = &self.econ;
        let i = t - 1;
        let mut clamps = ClampCounts::default();
        let (extra_e, extra_c) = match perturb {
            Some(pp) if pp.period == t => (pp.emissions, pp.consumption),
            _ => (0.0, 0.0),
        };

        let labour = self.paths.labour[i];
        let y_gross = gross_output(self.paths.tfp[i], state.capital, labour, p.capital_elasticity);
        let e_ffi = emissions_ffi(self.paths.sigma[i], y_gross, mu);
        let e_afolu = afolu_emissions(&p.afolu, e_ffi, t);
        let e_total = e_ffi + e_afolu + extra_e;

        let conc = self.carbon.concentration(&state.carbon);
        let f_co2 = co2_forcing(conc, self.init.c_ref, self.init.f2x_eff).map_err(|e| e.at_period(t))?;
        let forcing = f_co2 + self.f_ext[i];

        let t1 = state.temperature.surface();
        let raw_damage = p.damage_coeff * t1 * t1;
        let damage_frac = damage_fraction(t1, p.damage_coeff, p.damage_cap);
        if damage_frac < raw_damage {
            clamps.damages += 1;
        }
        let abatement_frac = abatement_cost_fraction(mu, self.paths.theta1[i], p.abatement_exponent);
        let damages = y_gross * damage_frac;
        let abatement = y_gross * abatement_frac;
        let y_net = y_gross - damages - abatement;
        let investment = s * y_net;
        let mut consumption = y_net - investment + extra_c;
        if consumption < p.consumption_floor {
            consumption = p.consumption_floor;
            clamps.consumption += 1;
        }
        let consumption_pc = 1000.0 * consumption / labour;
        let u = period_utility(consumption_pc, p.eta).map_err(|e| e.at_period(t))?;
        let welfare_term = labour * u * self.paths.discount[i];

        let step = self.carbon.step(&state.carbon, t1, e_total, p.dt);
        if step.iirf_clamped {
            clamps.iirf += 1;
        }
        let temperature = crate::climate::step_temperature(&state.temperature, &self.ebm, forcing);
        let (capital, floored) =
            capital_step(state.capital, y_net, s, p.dt, p.depreciation, p.capital_floor);
        if floored {
            clamps.capital += 1;
        }
        if !(welfare_term.is_finite() && temperature.layers.iter().all(|v| v.is_finite())) {
            return Err(Error::Domain("non-finite state".into()).at_period(t));
        }

        let record = PeriodRecord {
            year: self.paths.years[i],
            mu,
            savings: s,
            e_ffi,
            e_afolu,
            e_total,
            concentration: conc,
            f_co2,
            f_ext: self.f_ext[i],
            forcing,
            t1,
            t2: state.temperature.layers[1],
            t3: state.temperature.layers[2],
            alpha: step.alpha,
            labour,
            capital: state.capital,
            y_gross,
            y_net,
            damage_frac,
            abatement_frac,
            damages,
            abatement,
            investment,
            consumption,
            consumption_pc,
            welfare_term,
        };
        let next = SimState {
            carbon: step.state,
            temperature,
            capital,
            welfare: state.welfare + welfare_term,
        };
        Ok((next, record, clamps))
    }

    fn check_controls(&self, controls: &ControlPath) -> Result<()> {
        let n = self.periods();
        if controls.mu.len() != n || controls.savings.len() != n {
            return Err(Error::invalid(
                "controls",
                format!(
                    "need {n} periods, got mu {} / savings {}",
                    controls.mu.len(),
                    controls.savings.len()
                ),
            ));
        }
        Ok(())
    }

    /// Full trajectory for the given controls.
    pub fn simulate(&self, controls: &ControlPath) -> Result<Trajectory> {
        self.simulate_perturbed(controls, None)
    }

    pub fn simulate_perturbed(
        &self,
        controls: &ControlPath,
        perturb: Option<&Perturbation>,
    ) -> Result<Trajectory> {
        self.check_controls(controls)?;
        let mut state = self.initial_state();
        let mut periods = Vec::with_capacity(self.periods());
        let mut clamps = ClampCounts::default();
        for t in 1..=self.periods() {
            let (next, rec, c) =
                self.advance(&state, t, controls.mu[t - 1], controls.savings[t - 1], perturb)?;
            clamps.add(c);
            periods.push(rec);
            state = next;
        }
        Ok(Trajectory {
            periods,
            welfare: state.welfare,
            clamps,
        })
    }

    /// Welfare only, without storing records.
    pub fn welfare(&self, controls: &ControlPath, perturb: Option<&Perturbation>) -> Result<f64> {
        self.check_controls(controls)?;
        let mut state = self.initial_state();
        for t in 1..=self.periods() {
            state = self
                .advance(&state, t, controls.mu[t - 1], controls.savings[t - 1], perturb)?
                .0;
        }
        Ok(state.welfare)
    }

    /// Start-of-period states for every period plus the terminal state,
    /// so that a change at period `t` only needs the suffix re-simulated.
    pub fn checkpoints(&self, controls: &ControlPath) -> Result<Vec<SimState>> {
        self.check_controls(controls)?;
        let mut states = Vec::with_capacity(self.periods() + 1);
        let mut state = self.initial_state();
        states.push(state);
        for t in 1..=self.periods() {
            state = self
                .advance(&state, t, controls.mu[t - 1], controls.savings[t - 1], None)?
                .0;
            states.push(state);
        }
        Ok(states)
    }

    /// Welfare when period `t` uses `(mu_t, s_t)` and every other period
    /// uses `controls`, restarting from the stored checkpoint.
    pub fn welfare_from(
        &self,
        checkpoints: &[SimState],
        controls: &ControlPath,
        t: usize,
        mu_t: f64,
        s_t: f64,
    ) -> Result<f64> {
        let mut state = self.advance(&checkpoints[t - 1], t, mu_t, s_t, None)?.0;
        for k in t + 1..=self.periods() {
            state = self
                .advance(&state, k, controls.mu[k - 1], controls.savings[k - 1], None)?
                .0;
        }
        Ok(state.welfare)
    }
}

/// Finite-difference step sizes for the SCC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SccConfig {
    /// Total pulse over the first period, GtCO2.
    pub pulse_gtco2: f64,
    /// Added to first-period consumption, trillion $ yr^-1.
    pub consumption_delta: f64,
}

impl Default for SccConfig {
    fn default() -> Self {
        Self {
            pulse_gtco2: 1.0,
            consumption_delta: 0.01,
        }
    }
}

/// Social cost of carbon in the first period, $ per tCO2, at fixed controls.
pub fn social_cost_of_carbon(model: &Model, controls: &ControlPath, cfg: &SccConfig) -> Result<f64> {
    let base = model.welfare(controls, None)?;
    let rate = cfg.pulse_gtco2 / model.econ.dt;
    let w_e = model.welfare(
        controls,
        Some(&Perturbation {
            period: 1,
            emissions: rate,
            consumption: 0.0,
        }),
    )?;
    let w_c = model.welfare(
        controls,
        Some(&Perturbation {
            period: 1,
            emissions: 0.0,
            consumption: cfg.consumption_delta,
        }),
    )?;
    let dw_de = (w_e - base) / rate;
    let dw_dc = (w_c - base) / cfg.consumption_delta;
    if !(dw_dc > 0.0) {
        return Err(Error::Domain(format!("marginal utility of consumption not positive: {dw_dc}")));
    }
    // GtCO2 and trillion $: the ratio is in thousand $ per tCO2
    Ok(-1000.0 * dw_de / dw_dc)
}

/// Headline numbers for one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    /// `None` when total emissions stay positive over the horizon.
    pub net_zero_year: Option<f64>,
    pub emissions_2050: f64,
    pub emissions_2100: f64,
    pub peak_warming: f64,
    pub warming_2100: f64,
    pub forcing_2100: f64,
    /// % per year
    pub consumption_growth: f64,
    /// % per year
    pub near_term_discount_rate: f64,
}

fn series(traj: &Trajectory, f: impl Fn(&PeriodRecord) -> f64) -> Vec<f64> {
    traj.periods.iter().map(f).collect()
}

/// Year at which `values` first crosses to `<= 0`, interpolated linearly.
pub fn zero_crossing_year(years: &[f64], values: &[f64]) -> Option<f64> {
    let k = values.iter().position(|v| *v <= 0.0)?;
    if k == 0 {
        return Some(years[0]);
    }
    let (y0, y1) = (years[k - 1], years[k]);
    let (v0, v1) = (values[k - 1], values[k]);
    Some(y0 + (y1 - y0) * v0 / (v0 - v1))
}

pub fn diagnostics(traj: &Trajectory, econ: &EconParams) -> Diagnostics {
    let years = series(traj, |r| r.year);
    let e = series(traj, |r| r.e_total);
    let t1 = series(traj, |r| r.t1);
    let f = series(traj, |r| r.forcing);
    let c0 = traj.periods[0].consumption_pc;
    let c1 = traj.periods.get(1).map_or(c0, |r| r.consumption_pc);
    let g = 100.0 * ((c1 / c0).powf(1.0 / econ.dt) - 1.0);
    Diagnostics {
        net_zero_year: zero_crossing_year(&years, &e),
        emissions_2050: interp(&years, &e, 2050.0),
        emissions_2100: interp(&years, &e, 2100.0),
        peak_warming: t1.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        warming_2100: interp(&years, &t1, 2100.0),
        forcing_2100: interp(&years, &f, 2100.0),
        consumption_growth: g,
        near_term_discount_rate: ramsey_rate(100.0 * econ.rho, econ.eta, g),
    }
}

/// Largest relative residual of `gross = consumption + investment +
/// abatement + damages` over the trajectory.
pub fn accounting_residual(traj: &Trajectory) -> f64 {
    traj.periods
        .iter()
        .map(|r| {
            let total = r.consumption + r.investment + r.abatement + r.damages;
            ((r.y_gross - total) / r.y_gross).abs()
        })
        .fold(0.0, f64::max)
}

/// Variable names and accessors for tidy export.
pub const TRAJECTORY_VARIABLES: &[(&str, fn(&PeriodRecord) -> f64)] = &[
    ("mu", |r| r.mu),
    ("savings", |r| r.savings),
    ("e_ffi", |r| r.e_ffi),
    ("e_afolu", |r| r.e_afolu),
    ("e_total", |r| r.e_total),
    ("concentration", |r| r.concentration),
    ("f_co2", |r| r.f_co2),
    ("f_ext", |r| r.f_ext),
    ("forcing", |r| r.forcing),
    ("t1", |r| r.t1),
    ("t2", |r| r.t2),
    ("t3", |r| r.t3),
    ("alpha", |r| r.alpha),
    ("labour", |r| r.labour),
    ("capital", |r| r.capital),
    ("y_gross", |r| r.y_gross),
    ("y_net", |r| r.y_net),
    ("damage_frac", |r| r.damage_frac),
    ("abatement_frac", |r| r.abatement_frac),
    ("consumption", |r| r.consumption),
    ("consumption_pc", |r| r.consumption_pc),
    ("welfare_term", |r| r.welfare_term),
];
