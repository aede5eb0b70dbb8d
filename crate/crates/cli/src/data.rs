//! The data directory: file names and loaders.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fairdice::econ::{extend_population, POP_EXTENDED_END};
use fairdice::ensemble::{ConstraintTarget, PriorTables, Series};
use fairdice::ensemble::prior::{CARBON_COLUMNS, EBM_COLUMNS};
use fairdice::history::{Drivers, MemberParams};
use fairdice::io::{self, FextTable};
use fairdice::scenario::Preset;
use fairdice::sim::InitialConditions;
use fairdice::synthetic;

pub const EMISSIONS: &str = "emissions.csv";
pub const OBSERVATIONS: &str = "observations.csv";
pub const POPULATION: &str = "population.csv";
pub const TARGETS: &str = "targets.csv";
pub const CALIBRATION_EBM: &str = "calibration_ebm.csv";
pub const CALIBRATION_CARBON: &str = "calibration_carbon.csv";
pub const FORCING_PRIORS: &str = "forcing_priors.csv";
pub const CLIMATE_PARAMS: &str = "climate_params.csv";
pub const MEDIAN_PARAMS: &str = "median_params.csv";
pub const POSTERIOR_METRICS: &str = "posterior_metrics.csv";
pub const INIT_CONDITIONS: &str = "init_conditions.csv";

pub fn nonco2_file(series: &str) -> String {
    format!("nonco2_{series}.csv")
}

pub fn fext_file(preset: Preset) -> String {
    format!("fext_{preset}.csv")
}

/// Series whose history drives the spin-up and the constraint metrics.
pub const HISTORY_SERIES: &str = synthetic::EMISSIONS_SERIES;

pub struct DataDir {
    root: PathBuf,
}

impl DataDir {
    pub fn new(root: &Path) -> Self {
        Self { root: root.to_path_buf() }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn drivers(&self, series: &str) -> Result<Drivers> {
        let emissions = io::read_emissions(&self.path(EMISSIONS))?;
        let forcing = io::read_forcing(&self.path(&nonco2_file(series)), series)?;
        Ok(synthetic::drivers(&emissions, &forcing)?)
    }

    pub fn observations(&self) -> Result<Series> {
        Ok(io::read_series(&self.path(OBSERVATIONS), "K")?)
    }

    pub fn targets(&self) -> Result<Vec<ConstraintTarget>> {
        Ok(io::read_targets(&self.path(TARGETS))?)
    }

    /// Population in millions through 2500, extending a series that stops
    /// in 2300.
    pub fn population(&self) -> Result<Series> {
        let s = io::read_series(&self.path(POPULATION), "millions")?;
        if s.years.last().is_some_and(|y| *y >= POP_EXTENDED_END) {
            return Ok(s);
        }
        let (years, values) =
            extend_population(&s.years, &s.values).with_context(|| format!("extending {}", self.path(POPULATION).display()))?;
        Ok(Series::new(years, values))
    }

    pub fn priors(&self) -> Result<PriorTables> {
        Ok(PriorTables {
            ebm: io::read_calibration(&self.path(CALIBRATION_EBM), &EBM_COLUMNS)?,
            carbon: io::read_calibration(&self.path(CALIBRATION_CARBON), &CARBON_COLUMNS)?,
            forcing: io::read_forcing_priors(&self.path(FORCING_PRIORS))?,
        })
    }

    pub fn posterior(&self) -> Result<Vec<MemberParams>> {
        Ok(io::read_members(&self.path(CLIMATE_PARAMS))?)
    }

    pub fn median(&self) -> Result<MemberParams> {
        let path = self.path(MEDIAN_PARAMS);
        let mut rows = io::read_members(&path)?;
        if rows.len() != 1 {
            bail!("{} must hold exactly one member, found {}", path.display(), rows.len());
        }
        Ok(rows.remove(0))
    }

    pub fn init_conditions(&self) -> Result<BTreeMap<usize, InitialConditions>> {
        Ok(io::read_init_conditions(&self.path(INIT_CONDITIONS))?)
    }

    pub fn fext(&self, preset: Preset) -> Result<FextTable> {
        Ok(io::read_fext(&self.path(&fext_file(preset)))?)
    }
}
