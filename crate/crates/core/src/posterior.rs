//! Prior draw, historical simulation and constraint of a parameter ensemble.

use crate::ensemble::{
    run_constraining_pipeline, sample_prior, ConstraintTarget, PipelineConfig, PipelineOutcome, PriorTables, Series,
};
use crate::error::{Error, Result};
use crate::history::{member_metrics, Drivers, MemberParams, ACI, ARI, METRIC_NAMES};
use crate::io::MemberMetrics;

pub const DEFAULT_PRIOR_SIZE: usize = 20_000;

#[derive(Debug, Clone)]
pub struct ConstrainConfig {
    pub n_prior: usize,
    pub seed: u64,
    pub pipeline: PipelineConfig,
}

impl Default for ConstrainConfig {
    fn default() -> Self {
        Self {
            n_prior: DEFAULT_PRIOR_SIZE,
            seed: 0,
            pipeline: PipelineConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Posterior {
    pub members: Vec<MemberParams>,
    pub metrics: Vec<MemberMetrics>,
    pub outcome: PipelineOutcome,
    pub n_prior: usize,
}

impl Posterior {
    pub fn survival_rate(&self) -> f64 {
        self.outcome.survivors.len() as f64 / self.n_prior as f64
    }
}

/// Aerosol (ari + aci) forcing of a member in 2014.
pub fn aerosol_2014(member: &MemberParams, drivers: &Drivers) -> f64 {
    let i = Drivers::index(2014.0);
    member.category_forcing(drivers, ARI, i) + member.category_forcing(drivers, ACI, i)
}

/// Position of each target's metric in [`METRIC_NAMES`].
pub fn target_columns(targets: &[ConstraintTarget]) -> Result<Vec<usize>> {
    targets
        .iter()
        .map(|t| {
            METRIC_NAMES
                .iter()
                .position(|m| *m == t.name)
                .ok_or_else(|| Error::Ensemble(format!("no metric named `{}`", t.name)))
        })
        .collect()
}

/// Draw the prior, simulate every member through 2100, and keep a
/// constrained subset. `drivers` must run to at least 2100.
pub fn constrain(
    tables: &PriorTables,
    drivers: &Drivers,
    observations: &Series,
    targets: &[ConstraintTarget],
    cfg: &ConstrainConfig,
) -> Result<Posterior> {
    let columns = target_columns(targets)?;
    let prior = sample_prior(tables, drivers, cfg.n_prior, cfg.seed)?;
    let outcome = run_constraining_pipeline(
        prior.len(),
        |i| {
            let (m, run) = member_metrics(&prior[i], drivers)?;
            let all = m.to_array();
            Ok((run.surface_series(), columns.iter().map(|c| all[*c]).collect()))
        },
        observations,
        targets,
        &cfg.pipeline,
    )?;
    let members: Vec<MemberParams> = outcome.selected.iter().map(|i| prior[*i].clone()).collect();
    let metrics = members
        .iter()
        .map(|m| {
            Ok(MemberMetrics {
                id: m.id,
                metrics: member_metrics(m, drivers)?.0,
                aerosol_2014: aerosol_2014(m, drivers),
            })
        })
        .collect::<Result<_>>()?;
    Ok(Posterior {
        members,
        metrics,
        outcome,
        n_prior: prior.len(),
    })
}
