//! Four-pool impulse-response carbon cycle with state-dependent lifetime
//! scaling.
//!
//! Pool contents are anomalies above pre-industrial in GtCO2. The lifetime
//! scaling factor `alpha` is derived from the 100-year integrated impulse
//! response (iIRF100), which grows with cumulative uptake, airborne carbon and
//! surface warming.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::adaptive_simpson;

/// GtCO2 per GtC.
pub const GTCO2_PER_GTC: f64 = 3.664;
/// Atmospheric mass of CO2 per ppm, GtCO2 (2.134 GtC ppm^-1).
pub const GTCO2_PER_PPM: f64 = 2.134 * GTCO2_PER_GTC;

/// Default partition fractions of fresh emissions between the four pools.
pub const DEFAULT_PARTITION: [f64; 4] = [0.2173, 0.2240, 0.2824, 0.2763];
/// Default e-folding lifetimes of the four pools, yr.
pub const DEFAULT_LIFETIMES: [f64; 4] = [1.0e9, 394.4, 36.54, 4.304];

/// Mass unit in which cumulative emissions enter the feedback coefficients
/// `r_u` and `r_a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FeedbackUnit {
    /// Coefficients are per GtC (the usual calibration convention).
    #[default]
    GtC,
    /// Coefficients are per GtCO2.
    GtCO2,
}

impl FeedbackUnit {
    /// Divisor converting GtCO2 into the coefficient unit.
    pub fn gtco2_per_unit(self) -> f64 {
        match self {
            FeedbackUnit::GtC => GTCO2_PER_GTC,
            FeedbackUnit::GtCO2 => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarbonParams {
    pub partition: [f64; 4],
    /// yr
    pub lifetimes: [f64; 4],
    /// Pre-industrial iIRF100, yr.
    pub r0: f64,
    /// Sensitivity to carbon taken up by sinks, yr per unit mass.
    pub r_u: f64,
    /// Sensitivity to surface warming, yr K^-1.
    pub r_t: f64,
    /// Sensitivity to airborne carbon, yr per unit mass.
    pub r_a: f64,
    /// Pre-industrial concentration, ppm.
    pub c_ref: f64,
    /// GtCO2 ppm^-1
    pub mass_per_ppm: f64,
    /// Integration horizon of the impulse response, yr.
    pub horizon: f64,
    /// Cap on the lifetime scaling factor.
    pub alpha_max: f64,
    pub feedback_unit: FeedbackUnit,
}

impl Default for CarbonParams {
    fn default() -> Self {
        Self {
            partition: DEFAULT_PARTITION,
            lifetimes: DEFAULT_LIFETIMES,
            r0: 33.0,
            r_u: 0.005,
            r_t: 3.5,
            r_a: 0.003,
            c_ref: 278.3,
            mass_per_ppm: GTCO2_PER_PPM,
            horizon: 100.0,
            alpha_max: 100.0,
            feedback_unit: FeedbackUnit::GtC,
        }
    }
}

impl CarbonParams {
    pub fn validate(&self) -> Result<()> {
        let sum: f64 = self.partition.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(
                "partition",
                format!("fractions sum to {sum}, expected 1"),
            ));
        }
        if self.partition.iter().any(|a| *a < 0.0 || !a.is_finite()) {
            return Err(Error::invalid("partition", "fractions must be >= 0"));
        }
        if self.lifetimes.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::invalid("lifetimes", "must be positive"));
        }
        if self.lifetimes.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::invalid("lifetimes", "must be strictly decreasing"));
        }
        if !(self.c_ref > 0.0) {
            return Err(Error::invalid("c_ref", "must be positive"));
        }
        if !(self.mass_per_ppm > 0.0) {
            return Err(Error::invalid("mass_per_ppm", "must be positive"));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::invalid("horizon", "must be positive"));
        }
        if !(self.alpha_max > 1.0) {
            return Err(Error::invalid("alpha_max", "must exceed 1"));
        }
        for (name, v) in [
            ("r0", self.r0),
            ("r_u", self.r_u),
            ("r_t", self.r_t),
            ("r_a", self.r_a),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        Ok(())
    }

    /// Integrated impulse response at unit lifetime scaling,
    /// `sum_i a_i tau_i (1 - exp(-H / tau_i))`.
    pub fn iirf_unscaled(&self) -> f64 {
        analytic_iirf(self, 1.0)
    }
}

/// Normalisation constants of the alpha(iIRF100) relationship.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GConstants {
    pub g0: f64,
    /// yr
    pub g1: f64,
}

pub fn compute_g_constants(params: &CarbonParams) -> GConstants {
    let h = params.horizon;
    let g1: f64 = params
        .partition
        .iter()
        .zip(&params.lifetimes)
        .map(|(a, tau)| a * tau * (1.0 - (1.0 + h / tau) * (-h / tau).exp()))
        .sum();
    let g0 = (-params.iirf_unscaled() / g1).exp();
    GConstants { g0, g1 }
}

/// A value that may have been clamped into its admissible range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clamped {
    pub value: f64,
    pub clamped: bool,
}

/// Upper bound on iIRF100 so that alpha never exceeds `alpha_max`.
pub fn iirf100_max(params: &CarbonParams, g: GConstants) -> f64 {
    g.g1 * (params.alpha_max / g.g0).ln()
}

/// 100-year integrated impulse response for cumulative emissions `cumulative`
/// (GtCO2), airborne fraction `airborne_fraction` and surface warming `t1` (K).
///
/// The airborne fraction is clamped to `[0, 1.5]` before use and the result is
/// clamped to `[0, iirf100_max]`.
pub fn compute_iirf100(
    params: &CarbonParams,
    g: GConstants,
    cumulative: f64,
    airborne_fraction: f64,
    t1: f64,
) -> Clamped {
    let fa = airborne_fraction.clamp(0.0, 1.5);
    let mass = cumulative / params.feedback_unit.gtco2_per_unit();
    let raw = params.r0
        + params.r_u * (1.0 - fa) * mass
        + params.r_t * t1
        + params.r_a * fa * mass;
    let hi = iirf100_max(params, g);
    let value = raw.clamp(0.0, hi);
    Clamped {
        value,
        clamped: value != raw,
    }
}

/// Lifetime scaling factor `g0 * exp(iirf100 / g1)`.
pub fn compute_alpha(g: GConstants, iirf100: f64) -> f64 {
    g.g0 * (iirf100 / g.g1).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CarbonState {
    /// GtCO2 above pre-industrial.
    pub pools: [f64; 4],
    /// GtCO2 since pre-industrial.
    pub cumulative_emissions: f64,
}

impl CarbonState {
    pub fn new(pools: [f64; 4], cumulative_emissions: f64) -> Self {
        Self {
            pools,
            cumulative_emissions,
        }
    }

    pub fn atmospheric_anomaly(&self) -> f64 {
        self.pools.iter().sum()
    }

    /// Raw airborne fraction (0 when nothing has been emitted).
    pub fn airborne_fraction(&self) -> f64 {
        if self.cumulative_emissions == 0.0 {
            0.0
        } else {
            self.atmospheric_anomaly() / self.cumulative_emissions
        }
    }
}

/// Advance the pools by `dt` years under total emissions `emissions`
/// (GtCO2 yr^-1) and lifetime scaling `alpha`.
pub fn step_carbon(
    state: &CarbonState,
    params: &CarbonParams,
    emissions: f64,
    alpha: f64,
    dt: f64,
) -> CarbonState {
    let mut pools = [0.0; 4];
    for (i, pool) in pools.iter_mut().enumerate() {
        let scaled = alpha * params.lifetimes[i];
        let uptake = -(-dt / scaled).exp_m1();
        *pool = params.partition[i] * emissions * scaled * uptake + state.pools[i] * (1.0 - uptake);
    }
    CarbonState {
        pools,
        cumulative_emissions: state.cumulative_emissions + emissions * dt,
    }
}

/// Atmospheric CO2 concentration, ppm.
pub fn concentration(state: &CarbonState, params: &CarbonParams) -> f64 {
    params.c_ref + state.atmospheric_anomaly() / params.mass_per_ppm
}

/// Closed form of `int_0^H sum_i a_i exp(-t / (alpha tau_i)) dt`.
pub fn analytic_iirf(params: &CarbonParams, alpha: f64) -> f64 {
    let h = params.horizon;
    params
        .partition
        .iter()
        .zip(&params.lifetimes)
        .map(|(a, tau)| {
            let s = alpha * tau;
            a * s * -(-h / s).exp_m1()
        })
        .sum()
}

/// Numerical integral of the scaled impulse response over the horizon.
pub fn iirf_quadrature_oracle(params: &CarbonParams, alpha: f64) -> f64 {
    let f = |t: f64| -> f64 {
        params
            .partition
            .iter()
            .zip(&params.lifetimes)
            .map(|(a, tau)| a * (-t / (alpha * tau)).exp())
            .sum()
    };
    adaptive_simpson(&f, 0.0, params.horizon, 1e-12)
}

/// Carbon cycle with its normalisation constants precomputed.
#[derive(Debug, Clone)]
pub struct CarbonCycle {
    pub params: CarbonParams,
    pub g: GConstants,
}

/// Outcome of one carbon step.
#[derive(Debug, Clone, Copy)]
pub struct CarbonStep {
    pub state: CarbonState,
    pub alpha: f64,
    pub iirf_clamped: bool,
}

impl CarbonCycle {
    pub fn new(params: CarbonParams) -> Result<Self> {
        params.validate()?;
        let g = compute_g_constants(&params);
        Ok(Self { params, g })
    }

    /// Lifetime scaling for the start-of-step state and surface warming `t1`.
    pub fn alpha(&self, state: &CarbonState, t1: f64) -> Clamped {
        let iirf = compute_iirf100(
            &self.params,
            self.g,
            state.cumulative_emissions,
            state.airborne_fraction(),
            t1,
        );
        Clamped {
            value: compute_alpha(self.g, iirf.value),
            clamped: iirf.clamped,
        }
    }

    /// One step with alpha evaluated once from the start-of-step state.
    pub fn step(&self, state: &CarbonState, t1: f64, emissions: f64, dt: f64) -> CarbonStep {
        let alpha = self.alpha(state, t1);
        CarbonStep {
            state: step_carbon(state, &self.params, emissions, alpha.value, dt),
            alpha: alpha.value,
            iirf_clamped: alpha.clamped,
        }
    }

    pub fn concentration(&self, state: &CarbonState) -> f64 {
        concentration(state, &self.params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> CarbonParams {
        CarbonParams::default()
    }

    #[test]
    fn g_constants_for_default_pools() {
        let g = compute_g_constants(&params());
        assert!(g.g1 > 0.0);
        assert!(g.g0 > 0.0 && g.g0 < 1.0);
    }

    #[test]
    fn g1_short_lifetime_limit() {
        // a single pool with tau << H: g1 -> tau
        let mut p = params();
        p.partition = [1.0, 0.0, 0.0, 0.0];
        p.lifetimes = [0.5, 3.0, 2.0, 1.0];
        let g = compute_g_constants(&p);
        assert_relative_eq!(g.g1, 0.5, max_relative = 1e-6);
    }

    #[test]
    fn g_constants_match_quadrature() {
        // g1 = int_0^H t * sum_i a_i/tau_i exp(-t/tau_i) dt (integration by parts).
        let p = params();
        let f = |t: f64| -> f64 {
            p.partition
                .iter()
                .zip(&p.lifetimes)
                .map(|(a, tau)| a * t / tau * (-t / tau).exp())
                .sum()
        };
        let g1 = adaptive_simpson(&f, 0.0, p.horizon, 1e-12);
        let g = compute_g_constants(&p);
        assert_relative_eq!(g.g1, g1, max_relative = 1e-8);
        let istar = iirf_quadrature_oracle(&p, 1.0);
        assert_relative_eq!(g.g0, (-istar / g1).exp(), max_relative = 1e-7);
    }

    #[test]
    fn unscaled_iirf_is_about_52_years() {
        let istar = iirf_quadrature_oracle(&params(), 1.0);
        assert_relative_eq!(istar, params().iirf_unscaled(), max_relative = 1e-10);
        assert!((istar - 52.4).abs() < 0.1, "I* = {istar}");
    }

    #[test]
    fn alpha_is_one_at_unscaled_iirf() {
        let p = params();
        let g = compute_g_constants(&p);
        assert_relative_eq!(compute_alpha(g, p.iirf_unscaled()), 1.0, epsilon = 1e-12);
        assert_relative_eq!(
            compute_alpha(g, p.iirf_unscaled() + g.g1),
            std::f64::consts::E,
            max_relative = 1e-12
        );
    }

    #[test]
    fn iirf_feedback_terms() {
        let p = params();
        let g = compute_g_constants(&p);
        assert_eq!(compute_iirf100(&p, g, 0.0, 0.0, 0.0).value, p.r0);
        // f_a = 1 removes the sink term
        let cum = 2000.0;
        let v = compute_iirf100(&p, g, cum, 1.0, 1.2).value;
        assert_relative_eq!(v, p.r0 + p.r_a * cum / GTCO2_PER_GTC + p.r_t * 1.2, epsilon = 1e-12);
        // hand-expanded four-term sum
        let (fa, t1) = (0.45, 1.1);
        let m = cum / 3.664;
        let expect = 33.0 + 0.005 * 0.55 * m + 3.5 * 1.1 + 0.003 * 0.45 * m;
        assert_relative_eq!(compute_iirf100(&p, g, cum, fa, t1).value, expect, epsilon = 1e-12);
    }

    #[test]
    fn iirf_in_gtco2_units_skips_conversion() {
        let mut p = params();
        p.feedback_unit = FeedbackUnit::GtCO2;
        let g = compute_g_constants(&p);
        let v = compute_iirf100(&p, g, 100.0, 1.0, 0.0).value;
        assert_relative_eq!(v, p.r0 + p.r_a * 100.0, epsilon = 1e-12);
    }

    #[test]
    fn iirf_clamps_at_alpha_max() {
        let p = params();
        let g = compute_g_constants(&p);
        let v = compute_iirf100(&p, g, 1.0e7, 0.5, 40.0);
        assert!(v.clamped);
        assert_relative_eq!(compute_alpha(g, v.value), p.alpha_max, max_relative = 1e-12);
        let neg = compute_iirf100(&p, g, 0.0, 0.0, -100.0);
        assert!(neg.clamped);
        assert_eq!(neg.value, 0.0);
    }

    #[test]
    fn pure_decay_without_emissions() {
        let p = params();
        let s = CarbonState::new([10.0, 20.0, 30.0, 40.0], 100.0);
        let n = step_carbon(&s, &p, 0.0, 1.0, 3.0);
        for i in 0..4 {
            assert_relative_eq!(n.pools[i], s.pools[i] * (-3.0 / p.lifetimes[i]).exp(), max_relative = 1e-14);
        }
        assert_eq!(n.cumulative_emissions, 100.0);
    }

    #[test]
    fn fast_pool_matches_substep_integration() {
        // dR4/dt = a4 E - R4/tau4 integrated explicitly with 1000 substeps
        let p = params();
        let s = step_carbon(&CarbonState::default(), &p, 10.0, 1.0, 3.0);
        let expected = 0.2763 * 10.0 * 4.304 * (1.0 - (-3.0f64 / 4.304).exp());
        assert_relative_eq!(s.pools[3], expected, max_relative = 1e-14);
        let h = 3.0 / 1000.0;
        let mut r = 0.0;
        for _ in 0..1000 {
            // midpoint (RK2) substeps
            let k1 = 0.2763 * 10.0 - r / 4.304;
            let mid = r + 0.5 * h * k1;
            r += h * (0.2763 * 10.0 - mid / 4.304);
        }
        assert!((s.pools[3] - r).abs() < 1e-6);
        // effectively infinite lifetime: R1 ~ a1 E dt
        assert_relative_eq!(s.pools[0], 0.2173 * 30.0, max_relative = 1e-8);
        assert_eq!(s.cumulative_emissions, 30.0);
    }

    #[test]
    fn concentration_from_pools() {
        let p = params();
        assert_eq!(concentration(&CarbonState::default(), &p), p.c_ref);
        let s = CarbonState::new([p.mass_per_ppm, 0.0, 0.0, 0.0], 0.0);
        assert_relative_eq!(concentration(&s, &p), p.c_ref + 1.0, epsilon = 1e-12);
    }

    #[test]
    fn quadrature_limits() {
        let p = params();
        // the longest pool still contributes a * alpha * tau
        assert!(iirf_quadrature_oracle(&p, 1e-12) < 1e-3);
        assert_relative_eq!(
            iirf_quadrature_oracle(&p, 2.0),
            analytic_iirf(&p, 2.0),
            epsilon = 1e-8
        );
    }

    #[test]
    fn validation_rejects_bad_params() {
        let mut p = params();
        p.partition[0] = 0.3;
        assert!(p.validate().is_err());
        let mut p = params();
        p.lifetimes = [1.0, 2.0, 3.0, 4.0];
        assert!(p.validate().is_err());
        let mut p = params();
        p.alpha_max = 1.0;
        assert!(p.validate().is_err());
    }
}
