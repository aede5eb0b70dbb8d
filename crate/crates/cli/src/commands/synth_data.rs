use anyhow::Result;
use fairdice::ensemble::prior::{CARBON_COLUMNS, EBM_COLUMNS};
use fairdice::io;
use fairdice::synthetic;

use crate::data::*;
use crate::output::Outputs;
use crate::Settings;

pub fn run(s: &Settings) -> Result<()> {
    let d = synthetic::generate(s.seed)?;
    let mut out = Outputs::new(&s.config.hash(), s.seed);
    out.csv(EMISSIONS, |w| io::write_emissions(w, &d.emissions))?;
    for f in &d.forcing {
        out.csv(&nonco2_file(&f.id), |w| io::write_forcing(w, f))?;
    }
    out.csv(OBSERVATIONS, |w| io::write_series(w, "K", &d.observations))?;
    out.csv(POPULATION, |w| io::write_series(w, "millions", &d.population))?;
    out.csv(TARGETS, |w| io::write_targets(w, &d.targets))?;
    out.csv(CALIBRATION_EBM, |w| io::write_calibration(w, &EBM_COLUMNS, &d.priors.ebm))?;
    out.csv(CALIBRATION_CARBON, |w| io::write_calibration(w, &CARBON_COLUMNS, &d.priors.carbon))?;
    out.csv(FORCING_PRIORS, |w| io::write_forcing_priors(w, &d.priors.forcing))?;
    out.csv(MEDIAN_PARAMS, |w| io::write_members(w, std::slice::from_ref(&d.median)))?;
    out.commit(&s.out)
}
