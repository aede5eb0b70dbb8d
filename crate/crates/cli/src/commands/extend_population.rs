use std::path::Path;

use anyhow::{Context, Result};
use fairdice::econ::extend_population;
use fairdice::ensemble::Series;
use fairdice::io;

use crate::output::Outputs;
use crate::Settings;

pub fn run(s: &Settings, input: &Path, output: &Path) -> Result<()> {
    let pop = io::read_series(input, "millions")?;
    let (years, values) =
        extend_population(&pop.years, &pop.values).with_context(|| format!("extending {}", input.display()))?;
    log::info!("population in {}: {:.0} million", years[years.len() - 1], values[values.len() - 1]);
    let name = output
        .file_name()
        .and_then(|n| n.to_str())
        .context("output must name a file")?;
    let dir = match output.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut out = Outputs::new(&s.config.hash(), s.seed);
    out.csv(name, |w| io::write_series(w, "millions", &Series::new(years, values)))?;
    out.commit(dir)
}
