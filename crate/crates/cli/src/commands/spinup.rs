use anyhow::{Context, Result};
use fairdice::econ::EconParams;
use fairdice::history::{period_forcing, spinup, MemberParams, HANDOVER_YEAR};
use fairdice::io;
use fairdice::scenario::Preset;
use rayon::prelude::*;

use crate::data::*;
use crate::output::Outputs;
use crate::Settings;

pub fn run(s: &Settings) -> Result<()> {
    let data = DataDir::new(&s.data);
    let mut members: Vec<MemberParams> = vec![data.median()?];
    members.extend(data.posterior()?);
    members.sort_by_key(|m| m.id);
    if members.windows(2).any(|w| w[0].id == w[1].id) {
        anyhow::bail!("member ids in {MEDIAN_PARAMS} and {CLIMATE_PARAMS} overlap");
    }
    let history = data.drivers(HISTORY_SERIES)?;
    let init: Vec<_> = members
        .par_iter()
        .map(|m| spinup(m, &history).with_context(|| format!("spinning up member {}", m.id)).map(|c| (m.id, c)))
        .collect::<Result<_>>()?;

    let econ = EconParams::dice2016r_defaults();
    let mut out = Outputs::new(&s.config.hash(), s.seed);
    out.csv(INIT_CONDITIONS, |w| io::write_init_conditions(w, &init))?;
    for preset in Preset::ALL {
        let drivers = data.drivers(preset.series())?;
        let years: Vec<f64> = (1..=econ.periods).map(|t| econ.year(t)).collect();
        let rows: Vec<_> = members
            .par_iter()
            .map(|m| (m.id, years.clone(), period_forcing(m, &drivers, HANDOVER_YEAR, econ.dt, econ.periods)))
            .collect();
        out.csv(&fext_file(preset), |w| io::write_fext(w, &rows))?;
    }
    log::info!("spun up {} members", members.len());
    out.commit(&s.out)
}
