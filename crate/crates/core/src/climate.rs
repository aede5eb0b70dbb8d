//! Three-layer energy balance model in impulse-response form, CO2 forcing and
//! the ECS/TCR diagnostics.
//!
//! The continuous system has state `[F, T1, T2, T3]`, where the leading row
//! carries the forcing autocorrelation used for stochastic variability. The
//! deterministic model drops that row and column and drives the surface layer
//! with a zero-order-hold forcing term, so a constant forcing reproduces the
//! continuous response exactly.

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::expm;

/// Timestep (yr) implied by the per-year units of the heat capacities.
const CALIBRATION_DT: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EbmParams {
    /// Heat transfer coefficients, W m^-2 K^-1. `kappa[0]` is the climate
    /// feedback magnitude.
    pub kappa: [f64; 3],
    /// W m^-2 yr K^-1
    pub heat_capacity: [f64; 3],
    /// Deep ocean efficacy.
    pub efficacy: f64,
    /// Forcing autocorrelation; carried for completeness, never used in the
    /// deterministic model.
    pub gamma_autocorr: f64,
    /// Forcing from a doubling of CO2, W m^-2.
    pub f2x: f64,
    /// Model timestep, yr.
    pub dt: f64,
}

impl EbmParams {
    pub fn validate(&self) -> Result<()> {
        for (i, k) in self.kappa.iter().enumerate() {
            if !(*k > 0.0) || !k.is_finite() {
                return Err(Error::invalid("kappa", format!("kappa{} = {k} must be > 0", i + 1)));
            }
        }
        for (i, c) in self.heat_capacity.iter().enumerate() {
            if !(*c > 0.0) || !c.is_finite() {
                return Err(Error::invalid(
                    "heat_capacity",
                    format!("C{} = {c} must be > 0", i + 1),
                ));
            }
        }
        if !(self.efficacy > 0.0) {
            return Err(Error::invalid("efficacy", "must be > 0"));
        }
        if !(self.f2x > 0.0) {
            return Err(Error::invalid("f2x", "must be > 0"));
        }
        if !(self.dt > 0.0) {
            return Err(Error::invalid("dt", "must be > 0"));
        }
        Ok(())
    }

    /// Same physics at a different timestep.
    pub fn with_dt(&self, dt: f64) -> Self {
        Self { dt, ..self.clone() }
    }

    /// 3x3 generator of the temperature layers, yr^-1.
    pub fn temperature_generator(&self) -> Matrix3<f64> {
        let [k1, k2, k3] = self.kappa;
        let [c1, c2, c3] = self.heat_capacity;
        let eps = self.efficacy;
        Matrix3::new(
            -(k1 + k2) / c1,
            k2 / c1,
            0.0,
            k2 / c2,
            -(k2 + eps * k3) / c2,
            eps * k3 / c2,
            0.0,
            k3 / c3,
            -k3 / c3,
        ) / CALIBRATION_DT
    }
}

/// Continuous-time matrix and input vector of the four-state system,
/// `dx/dt = A x + b F` with `x = [F_ar, T1, T2, T3]`.
///
/// The leading `1/dt` prefactor is the per-year unit of the heat capacities;
/// the model timestep enters only through the exponential in [`discretize`].
pub fn build_continuous_matrix(params: &EbmParams) -> (Matrix4<f64>, Vector4<f64>) {
    let dt = CALIBRATION_DT;
    let gamma = params.gamma_autocorr;
    let m = params.temperature_generator() * dt;
    let mut a = Matrix4::zeros();
    a[(0, 0)] = -gamma * dt;
    a[(1, 0)] = 1.0 / params.heat_capacity[0];
    a.fixed_view_mut::<3, 3>(1, 1).copy_from(&m);
    (a / dt, Vector4::new(gamma, 0.0, 0.0, 0.0))
}

/// Discrete state-transition matrix and forcing response of the
/// three-layer model at the timestep in the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteEbm {
    pub a_d: Matrix3<f64>,
    /// K per W m^-2
    pub b_d: Vector3<f64>,
}

impl DiscreteEbm {
    pub fn spectral_radius(&self) -> f64 {
        self.a_d
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Exact discretization of the forced three-layer system.
///
/// Builds the augmented generator with the forcing held constant over the
/// step (first row zeroed), exponentiates it, and keeps the temperature block
/// as `a_d` and the forcing column as `b_d`.
pub fn discretize(params: &EbmParams) -> Result<DiscreteEbm> {
    params.validate()?;
    // Singularity is judged on the heat-exchange coefficients (generator rows
    // scaled by their heat capacities) so very large capacities are not flagged.
    let coupling = Matrix3::from_diagonal(&Vector3::from(params.heat_capacity))
        * params.temperature_generator();
    let det = coupling.determinant();
    let scale = coupling.abs().max().powi(3);
    if !(det.abs() > 1e-12 * scale) {
        return Err(Error::SingularMatrix);
    }
    let (mut aug, _) = build_continuous_matrix(params);
    aug.row_mut(0).fill(0.0);
    let e = expm(&(aug * params.dt));
    Ok(DiscreteEbm {
        a_d: e.fixed_view::<3, 3>(1, 1).into_owned(),
        b_d: e.fixed_view::<3, 1>(1, 0).into_owned(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TemperatureState {
    /// K: surface/upper ocean, mid ocean, deep ocean.
    pub layers: [f64; 3],
}

impl TemperatureState {
    pub fn new(layers: [f64; 3]) -> Self {
        Self { layers }
    }

    pub fn surface(&self) -> f64 {
        self.layers[0]
    }
}

pub fn step_temperature(state: &TemperatureState, ebm: &DiscreteEbm, forcing: f64) -> TemperatureState {
    let t = Vector3::from(state.layers);
    let next = ebm.a_d * t + ebm.b_d * forcing;
    TemperatureState {
        layers: [next[0], next[1], next[2]],
    }
}

/// Logarithmic CO2 forcing, W m^-2.
pub fn co2_forcing(concentration: f64, c_ref: f64, f2x: f64) -> Result<f64> {
    if !(concentration > 0.0) {
        return Err(Error::Domain(format!(
            "CO2 concentration must be positive, got {concentration}"
        )));
    }
    if !(c_ref > 0.0) {
        return Err(Error::Domain(format!("reference concentration must be positive, got {c_ref}")));
    }
    Ok(f2x * (concentration / c_ref).ln() / std::f64::consts::LN_2)
}

/// Forcing per doubling that reproduces `f_co2` at concentration `c` under the
/// logarithmic formula.
pub fn effective_f2x(f_co2: f64, c: f64, c_ref: f64) -> Result<f64> {
    if !(c > 0.0 && c_ref > 0.0) {
        return Err(Error::Domain("concentrations must be positive".into()));
    }
    let log_ratio = (c / c_ref).ln();
    if log_ratio == 0.0 {
        return Err(Error::Domain(
            "effective F2x undefined when concentration equals its reference".into(),
        ));
    }
    Ok(f_co2 * std::f64::consts::LN_2 / log_ratio)
}

pub fn total_forcing(f_co2: f64, f_ext: f64) -> f64 {
    f_co2 + f_ext
}

/// Warming of the surface layer over 1995-2014 relative to pre-industrial.
pub const PRESENT_DAY_WARMING: f64 = 0.85;

/// Shift all layers so that the surface layer's 1995-2014 mean becomes
/// [`PRESENT_DAY_WARMING`].
pub fn rebaseline_temperatures(layers: [f64; 3], hist_mean_t1_1995_2014: f64) -> [f64; 3] {
    let shift = PRESENT_DAY_WARMING - hist_mean_t1_1995_2014;
    layers.map(|t| t + shift)
}

/// Equilibrium climate sensitivity, K.
pub fn diagnose_ecs(params: &EbmParams) -> f64 {
    params.f2x / params.kappa[0]
}

/// Length of the 1%/yr ramp used for TCR, yr.
pub const TCR_YEARS: usize = 70;

/// Transient climate response: surface warming after 70 years of a 1%/yr
/// compounding CO2 concentration ramp, simulated with 1-yr steps.
///
/// The forcing in each year is its value at mid-year, which equals the annual
/// mean because log forcing is linear along the ramp.
pub fn diagnose_tcr(params: &EbmParams) -> Result<f64> {
    let ebm = discretize(&params.with_dt(1.0))?;
    let mut state = TemperatureState::default();
    let c_ref = 1.0;
    for year in 0..TCR_YEARS {
        let c = c_ref * 1.01f64.powf(year as f64 + 0.5);
        let f = co2_forcing(c, c_ref, params.f2x)?;
        state = step_temperature(&state, &ebm, f);
    }
    Ok(state.surface())
}
