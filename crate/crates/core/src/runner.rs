//! Per-member scenario runs: build the coupled model from exported member
//! data, optimize the controls, and summarise an ensemble.

use rayon::prelude::*;
use serde::Serialize;

use crate::econ::{ControlPath, EconParams, EconPaths};
use crate::ensemble::Series;
use crate::error::{Error, Result};
use crate::history::MemberParams;
use crate::numerics::interp;
use crate::optimize::{optimize_controls, IterationLog, OptimizerConfig};
use crate::sim::{
    accounting_residual, diagnostics, social_cost_of_carbon, Diagnostics, InitialConditions, Model, SccConfig,
    Trajectory,
};
use crate::stats::{p5_50_95, pearson};

/// Everything one member contributes to a scenario run.
#[derive(Debug, Clone)]
pub struct MemberInput {
    pub member: MemberParams,
    pub init: InitialConditions,
    /// Exogenous forcing by period start year, W m^-2.
    pub f_ext: Series,
    /// Aerosol forcing in 2014, when known.
    pub aerosol_2014: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct RunSettings {
    pub optimizer: OptimizerConfig,
    pub scc: SccConfig,
}

#[derive(Debug, Clone)]
pub struct MemberOutcome {
    pub id: usize,
    pub controls: ControlPath,
    pub trajectory: Trajectory,
    pub scc: f64,
    pub diagnostics: Diagnostics,
    pub accounting_residual: f64,
    pub converged: bool,
    pub iterations: usize,
    pub projected_gradient_norm: f64,
    pub history: Vec<IterationLog>,
    pub ecs: f64,
    pub aerosol_2014: Option<f64>,
}

/// Values at each period year, exact where the series has the year and
/// interpolated inside its range otherwise.
fn per_period(series: &Series, years: &[f64], what: &str) -> Result<Vec<f64>> {
    let (Some(first), Some(last)) = (series.years.first(), series.years.last()) else {
        return Err(Error::SeriesTooShort(format!("{what} is empty")));
    };
    if years.first().is_some_and(|y| y < first) || years.last().is_some_and(|y| y > last) {
        return Err(Error::SeriesTooShort(format!(
            "{what} covers {first}-{last}, model needs {}-{}",
            years[0],
            years[years.len() - 1]
        )));
    }
    Ok(years.iter().map(|y| interp(&series.years, &series.values, *y)).collect())
}

pub fn build_model(econ: &EconParams, population: &Series, input: &MemberInput) -> Result<Model> {
    let years: Vec<f64> = (1..=econ.periods).map(|t| econ.year(t)).collect();
    per_period(population, &years, "population")?;
    let paths = EconPaths::new(econ, |y| interp(&population.years, &population.values, y))?;
    let f_ext = per_period(&input.f_ext, &years, &format!("forcing of member {}", input.member.id))?;
    Model::new(
        econ.clone(),
        paths,
        input.member.carbon.clone(),
        &input.member.ebm,
        input.init.clone(),
        f_ext,
    )
}

/// Optimize one member and evaluate the SCC at the optimal controls.
pub fn run_member(
    econ: &EconParams,
    population: &Series,
    input: &MemberInput,
    settings: &RunSettings,
) -> Result<MemberOutcome> {
    let model = build_model(econ, population, input)?;
    let (controls, result) = optimize_controls(&model, &settings.optimizer)?;
    let trajectory = model.simulate(&controls)?;
    let scc = social_cost_of_carbon(&model, &controls, &settings.scc)?;
    Ok(MemberOutcome {
        id: input.member.id,
        diagnostics: diagnostics(&trajectory, econ),
        accounting_residual: accounting_residual(&trajectory),
        controls,
        trajectory,
        scc,
        converged: result.converged,
        iterations: result.iterations,
        projected_gradient_norm: result.projected_gradient_norm,
        history: result.history,
        ecs: input.member.ecs(),
        aerosol_2014: input.aerosol_2014,
    })
}

/// Run members in parallel on the current rayon pool; results keep the
/// order of `inputs`.
pub fn run_members(
    econ: &EconParams,
    population: &Series,
    inputs: &[MemberInput],
    settings: &RunSettings,
) -> Vec<(usize, Result<MemberOutcome>)> {
    inputs
        .par_iter()
        .map(|input| (input.member.id, run_member(econ, population, input, settings)))
        .collect()
}

/// One row of the scenario summary. Correlations carry only `median`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub variable: &'static str,
    pub median: f64,
    pub p5: Option<f64>,
    pub p95: Option<f64>,
    pub n: usize,
}

/// Medians and 5-95% ranges of the headline diagnostics, plus correlations
/// with ECS and present-day aerosol forcing. Members that never reach net
/// zero count as infinitely late.
pub fn summarize(outcomes: &[MemberOutcome]) -> Vec<SummaryRow> {
    let n = outcomes.len();
    let col = |f: &dyn Fn(&MemberOutcome) -> f64| -> Vec<f64> { outcomes.iter().map(f).collect() };
    let range = |variable: &'static str, v: Vec<f64>| {
        let [p5, p50, p95] = p5_50_95(&v);
        SummaryRow {
            variable,
            median: p50,
            p5: Some(p5),
            p95: Some(p95),
            n,
        }
    };
    let corr = |variable: &'static str, x: &[f64], y: &[f64]| SummaryRow {
        variable,
        median: pearson(x, y),
        p5: None,
        p95: None,
        n,
    };
    let scc = col(&|o| o.scc);
    let e2050 = col(&|o| o.diagnostics.emissions_2050);
    let ecs = col(&|o| o.ecs);
    let mut rows = vec![
        range("emissions_2050", e2050.clone()),
        range("emissions_2100", col(&|o| o.diagnostics.emissions_2100)),
        range(
            "net_zero_year",
            col(&|o| o.diagnostics.net_zero_year.unwrap_or(f64::INFINITY)),
        ),
        range("scc", scc.clone()),
        range("peak_warming", col(&|o| o.diagnostics.peak_warming)),
        range("warming_2100", col(&|o| o.diagnostics.warming_2100)),
        range("erf_2100", col(&|o| o.diagnostics.forcing_2100)),
        corr("corr_ecs_scc", &ecs, &scc),
        corr("corr_ecs_emissions_2050", &ecs, &e2050),
    ];
    if let Some(aer) = outcomes.iter().map(|o| o.aerosol_2014).collect::<Option<Vec<f64>>>() {
        rows.push(corr("corr_aerosol_scc", &aer, &scc));
        rows.push(corr("corr_aerosol_emissions_2050", &aer, &e2050));
    }
    rows.push(range(
        "near_term_discount_rate",
        col(&|o| o.diagnostics.near_term_discount_rate),
    ));
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::tests::reference_member;
    use crate::scenario::Preset;
    use crate::sim::tests::test_init;

    fn population() -> Series {
        let years: Vec<f64> = (0..=48).map(|k| 2020.0 + 10.0 * k as f64).collect();
        let values = years
            .iter()
            .map(|y| 8000.0 + 3000.0 * (1.0 - (-(y - 2020.0) / 60.0).exp()))
            .collect();
        Series::new(years, values)
    }

    fn input(id: usize, ecs: f64) -> MemberInput {
        let mut member = reference_member();
        member.id = id;
        member.ebm.kappa[0] = member.f2x_eff() / ecs;
        let years: Vec<f64> = (0..160).map(|t| 2023.0 + 3.0 * t as f64).collect();
        let values = years.iter().map(|y| 0.4 - 0.1 * ((y - 2023.0) / 100.0).min(1.0)).collect();
        MemberInput {
            member,
            init: test_init(),
            f_ext: Series::new(years, values),
            aerosol_2014: Some(-1.0 - 0.1 * id as f64),
        }
    }

    #[test]
    fn forcing_must_cover_horizon() {
        let econ = Preset::Optimal.econ_params();
        let mut inp = input(1, 3.0);
        inp.f_ext.years.truncate(100);
        inp.f_ext.values.truncate(100);
        assert!(matches!(build_model(&econ, &population(), &inp), Err(Error::SeriesTooShort(_))));
        let short = Series::new(vec![2020.0, 2300.0], vec![8000.0, 9000.0]);
        assert!(build_model(&econ, &short, &input(1, 3.0)).is_err());
    }

    #[test]
    fn forcing_taken_at_period_years() {
        let econ = Preset::Optimal.econ_params();
        let inp = input(1, 3.0);
        let m = build_model(&econ, &population(), &inp).unwrap();
        assert_eq!(m.f_ext, inp.f_ext.values);
    }

    #[test]
    fn ensemble_run_and_summary() {
        let econ = Preset::Optimal.econ_params();
        let inputs: Vec<MemberInput> = [(3, 2.5), (1, 3.0), (2, 4.0)].iter().map(|&(i, e)| input(i, e)).collect();
        let out = run_members(&econ, &population(), &inputs, &RunSettings::default());
        assert_eq!(out.iter().map(|(id, _)| *id).collect::<Vec<_>>(), vec![3, 1, 2]);
        let outcomes: Vec<MemberOutcome> = out.into_iter().map(|(_, r)| r.unwrap()).collect();
        for o in &outcomes {
            assert!(o.converged);
            assert!(o.accounting_residual < 1e-9);
            assert!(o.scc > 0.0);
        }
        // a more sensitive climate raises the SCC
        assert!(outcomes[0].scc < outcomes[1].scc && outcomes[1].scc < outcomes[2].scc);
        let rows = summarize(&outcomes);
        let get = |name: &str| rows.iter().find(|r| r.variable == name).unwrap();
        assert_eq!(get("scc").median, outcomes[1].scc);
        assert!(get("corr_ecs_scc").median > 0.9);
        assert!(get("corr_aerosol_scc").p5.is_none());
        assert_eq!(rows.len(), 12);
        assert!(rows.iter().all(|r| r.median.is_finite() && r.n == 3));
    }
}
