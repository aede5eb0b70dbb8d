//! Scenario presets: pure rate of time preference, elasticity of marginal
//! utility and the non-CO2 forcing series.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::econ::EconParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Optimal,
    Wb2c,
    P15c,
    Rennert,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Optimal, Preset::Wb2c, Preset::P15c, Preset::Rennert];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Optimal => "optimal",
            Preset::Wb2c => "wb2c",
            Preset::P15c => "p15c",
            Preset::Rennert => "rennert",
        }
    }

    /// Pure rate of time preference, per year.
    pub fn rho(self) -> f64 {
        match self {
            Preset::Optimal => 0.015,
            Preset::Wb2c => 0.0035,
            Preset::P15c => 0.0012,
            Preset::Rennert => 0.002,
        }
    }

    pub fn eta(self) -> f64 {
        match self {
            Preset::Optimal => 1.45,
            Preset::Wb2c => 0.35,
            Preset::P15c => 0.12,
            Preset::Rennert => 1.24,
        }
    }

    /// Non-CO2 forcing series id.
    pub fn series(self) -> &'static str {
        match self {
            Preset::Optimal | Preset::Rennert => "ssp245",
            Preset::Wb2c => "ssp126",
            Preset::P15c => "ssp119",
        }
    }

    /// `base` with this preset's discounting.
    pub fn apply(self, base: &EconParams) -> EconParams {
        EconParams {
            rho: self.rho(),
            eta: self.eta(),
            ..base.clone()
        }
    }

    pub fn econ_params(self) -> EconParams {
        self.apply(&EconParams::dice2016r_defaults())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| Error::invalid("scenario", format!("unknown preset `{s}` (optimal, wb2c, p15c, rennert)")))
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
