use anyhow::Result;
use fairdice::ensemble::{PipelineConfig, RMSE_THRESHOLD};
use fairdice::io::{self, fmt, write_rows};
use fairdice::posterior::{constrain, ConstrainConfig, DEFAULT_PRIOR_SIZE};

use crate::data::*;
use crate::output::Outputs;
use crate::Settings;

pub fn run(s: &Settings) -> Result<()> {
    let data = DataDir::new(&s.data);
    let tables = data.priors()?;
    let drivers = data.drivers(HISTORY_SERIES)?;
    let obs = data.observations()?;
    let targets = data.targets()?;
    let defaults = PipelineConfig::default();
    let cfg = ConstrainConfig {
        n_prior: s.config.n_prior.unwrap_or(DEFAULT_PRIOR_SIZE),
        seed: s.seed,
        pipeline: PipelineConfig {
            threshold: s.config.threshold.unwrap_or(RMSE_THRESHOLD),
            n_out: s.config.n_posterior.unwrap_or(defaults.n_out),
            seed: s.seed,
            with_replacement: s.config.with_replacement.unwrap_or(false),
        },
    };
    let mut post = constrain(&tables, &drivers, &obs, &targets, &cfg)?;
    if cfg.pipeline.with_replacement {
        // repeated draws share an id; the parameter table keeps one row each
        post.members.dedup_by_key(|m| m.id);
        post.metrics.dedup_by_key(|m| m.id);
    }
    let o = &post.outcome;
    log::info!(
        "{} of {} prior members within {} K RMSE ({:.1}%), {} failed; kept {}",
        o.survivors.len(),
        post.n_prior,
        cfg.pipeline.threshold,
        100.0 * post.survival_rate(),
        o.failed.len(),
        post.members.len()
    );

    let mut out = Outputs::new(&s.config.hash(), s.seed);
    out.csv(CLIMATE_PARAMS, |w| io::write_members(w, &post.members))?;
    out.csv(POSTERIOR_METRICS, |w| io::write_member_metrics(w, &post.metrics))?;
    out.csv("constrain_report.csv", |w| {
        write_rows(
            w,
            &["name", "target_p5", "target_p50", "target_p95", "ensemble_p5", "ensemble_p50", "ensemble_p95"],
            o.report.iter().map(|r| {
                std::iter::once(r.name.clone())
                    .chain(r.target.iter().chain(&r.ensemble).map(|v| fmt(*v)))
                    .collect()
            }),
        )
    })?;
    out.csv("constrain_summary.csv", |w| {
        write_rows(
            w,
            &["n_prior", "n_failed", "n_survivors", "survival_rate", "threshold", "n_posterior"],
            [vec![
                post.n_prior.to_string(),
                o.failed.len().to_string(),
                o.survivors.len().to_string(),
                fmt(post.survival_rate()),
                fmt(cfg.pipeline.threshold),
                post.members.len().to_string(),
            ]],
        )
    })?;
    out.commit(&s.out)
}
