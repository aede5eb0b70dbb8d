use std::collections::BTreeMap;

use anyhow::{bail, Context, Result};
use fairdice::io::{fmt, write_rows};
use fairdice::posterior::aerosol_2014;
use fairdice::runner::{run_members, summarize, MemberInput, MemberOutcome, RunSettings};
use fairdice::scenario::Preset;
use fairdice::sim::TRAJECTORY_VARIABLES;
use fairdice::stats::p5_50_95;
use serde_json::json;

use crate::config::MemberSpec;
use crate::data::*;
use crate::output::Outputs;
use crate::Settings;

/// Variables exported as ensemble percentiles per year.
const FAN_VARIABLES: [&str; 5] = ["e_total", "mu", "concentration", "forcing", "t1"];

pub fn run(s: &Settings) -> Result<()> {
    let preset: Preset = s
        .config
        .scenario
        .as_deref()
        .context("--scenario is required")?
        .parse()?;
    let spec: MemberSpec = s.config.members.as_deref().unwrap_or("all").parse()?;
    let data = DataDir::new(&s.data);

    let members = match &spec {
        MemberSpec::Median => vec![data.median()?],
        MemberSpec::All => data.posterior()?,
        MemberSpec::List(ids) => {
            let all: BTreeMap<usize, _> = data.posterior()?.into_iter().map(|m| (m.id, m)).collect();
            ids.iter()
                .map(|id| {
                    all.get(id)
                        .cloned()
                        .with_context(|| format!("member {id} is not in {CLIMATE_PARAMS}"))
                })
                .collect::<Result<_>>()?
        }
    };
    if members.is_empty() {
        bail!("no members selected");
    }
    let mut init = data.init_conditions()?;
    let mut fext = data.fext(preset)?;
    let drivers = data.drivers(HISTORY_SERIES)?;
    let population = data.population()?;
    let mut inputs: Vec<MemberInput> = members
        .into_iter()
        .map(|member| {
            let id = member.id;
            let aerosol = aerosol_2014(&member, &drivers);
            let init = init
                .remove(&id)
                .with_context(|| format!("member {id} missing from {INIT_CONDITIONS}"))?;
            let (years, values) = fext
                .remove(&id)
                .with_context(|| format!("member {id} missing from {}", fext_file(preset)))?;
            Ok(MemberInput {
                member,
                init,
                f_ext: fairdice::ensemble::Series::new(years, values),
                aerosol_2014: Some(aerosol),
            })
        })
        .collect::<Result<_>>()?;
    inputs.sort_by_key(|i| i.member.id);

    let econ = preset.econ_params();
    let mut optimizer = s.config.optimizer.clone();
    optimizer.seed = s.seed;
    let settings = RunSettings {
        optimizer,
        scc: s.config.scc.unwrap_or_default(),
    };
    log::info!("optimizing {} members under {preset}", inputs.len());
    let mut outcomes = Vec::with_capacity(inputs.len());
    for (id, r) in run_members(&econ, &population, &inputs, &settings) {
        let o = r.with_context(|| format!("member {id}"))?;
        if !o.converged {
            log::warn!(
                "member {id} did not converge after {} iterations (KKT residual {:.2e})",
                o.iterations,
                o.projected_gradient_norm
            );
        }
        outcomes.push(o);
    }
    let worst = outcomes.iter().map(|o| o.accounting_residual).fold(0.0, f64::max);
    log::debug!("largest accounting residual {worst:.2e}");

    let mut out = Outputs::new(&s.config.hash(), s.seed);
    write_outputs(&mut out, preset, &outcomes)?;
    out.commit(&s.out)
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

fn write_outputs(out: &mut Outputs, preset: Preset, outcomes: &[MemberOutcome]) -> Result<()> {
    let scenario = preset.name().to_string();
    out.csv("trajectories.csv", |w| {
        write_rows(
            w,
            &["member_id", "scenario", "period", "year", "variable", "value"],
            outcomes.iter().flat_map(|o| {
                let scenario = scenario.clone();
                o.trajectory.periods.iter().enumerate().flat_map(move |(t, r)| {
                    let scenario = scenario.clone();
                    TRAJECTORY_VARIABLES.iter().map(move |(name, get)| {
                        vec![
                            o.id.to_string(),
                            scenario.clone(),
                            (t + 1).to_string(),
                            fmt(r.year),
                            name.to_string(),
                            fmt(get(r)),
                        ]
                    })
                })
            }),
        )
    })?;
    out.csv("members.csv", |w| {
        write_rows(
            w,
            &[
                "member_id",
                "scenario",
                "converged",
                "iterations",
                "kkt_residual",
                "welfare",
                "scc",
                "net_zero_year",
                "emissions_2050",
                "emissions_2100",
                "peak_warming",
                "warming_2100",
                "erf_2100",
                "consumption_growth",
                "near_term_discount_rate",
                "accounting_residual",
                "ecs",
                "aerosol_2014",
            ],
            outcomes.iter().map(|o| {
                let d = &o.diagnostics;
                vec![
                    o.id.to_string(),
                    scenario.clone(),
                    o.converged.to_string(),
                    o.iterations.to_string(),
                    fmt(o.projected_gradient_norm),
                    fmt(o.trajectory.welfare),
                    fmt(o.scc),
                    opt(d.net_zero_year),
                    fmt(d.emissions_2050),
                    fmt(d.emissions_2100),
                    fmt(d.peak_warming),
                    fmt(d.warming_2100),
                    fmt(d.forcing_2100),
                    fmt(d.consumption_growth),
                    fmt(d.near_term_discount_rate),
                    fmt(o.accounting_residual),
                    fmt(o.ecs),
                    opt(o.aerosol_2014),
                ]
            }),
        )
    })?;
    let rows = summarize(outcomes);
    out.csv("summary.csv", |w| {
        write_rows(
            w,
            &["scenario", "variable", "median", "p5", "p95", "n"],
            rows.iter().map(|r| {
                vec![
                    scenario.clone(),
                    r.variable.to_string(),
                    fmt(r.median),
                    opt(r.p5),
                    opt(r.p95),
                    r.n.to_string(),
                ]
            }),
        )
    })?;
    out.csv("plot_fan.csv", |w| {
        let first = &outcomes[0].trajectory.periods;
        let mut lines = Vec::new();
        for name in FAN_VARIABLES {
            let get = TRAJECTORY_VARIABLES.iter().find(|(n, _)| *n == name).unwrap().1;
            for (t, r) in first.iter().enumerate() {
                let v: Vec<f64> = outcomes.iter().map(|o| get(&o.trajectory.periods[t])).collect();
                let [p5, p50, p95] = p5_50_95(&v);
                lines.push(vec![scenario.clone(), name.to_string(), fmt(r.year), fmt(p5), fmt(p50), fmt(p95)]);
            }
        }
        write_rows(w, &["scenario", "variable", "year", "p5", "p50", "p95"], lines)
    })?;
    out.jsonl(
        "optimizer_log.jsonl",
        outcomes.iter().flat_map(|o| {
            o.history.iter().map(move |h| {
                json!({
                    "member_id": o.id,
                    "iteration": h.iteration,
                    "objective": h.objective,
                    "kkt_residual": h.projected_gradient_norm,
                    "step": h.step,
                })
            })
        }),
    )?;
    Ok(())
}
