use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use fairdice::optimize::OptimizerConfig;
use fairdice::sim::SccConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// JSON run configuration. Every field is optional; command-line flags win.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub scenario: Option<String>,
    pub members: Option<String>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub optimizer: OptimizerConfig,
    pub scc: Option<SccConfig>,
    /// RMSE filter threshold, K.
    pub threshold: Option<f64>,
    pub n_prior: Option<usize>,
    pub n_posterior: Option<usize>,
    pub with_replacement: Option<bool>,
}

impl Config {
    pub fn load(path: &std::path::Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Hash of the settings that influence results. Paths and the worker
    /// count are excluded so identical runs hash identically.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.data = None;
        c.out = None;
        c.workers = None;
        let json = serde_json::to_string(&c).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect::<String>()[..16]
            .to_string()
    }
}

/// Which members a scenario run covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MemberSpec {
    All,
    Median,
    List(Vec<usize>),
}

impl FromStr for MemberSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "all" => return Ok(MemberSpec::All),
            "median" => return Ok(MemberSpec::Median),
            _ => {}
        }
        let mut ids = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if let Some((a, b)) = part.split_once('-') {
                let (a, b): (usize, usize) = (
                    a.trim().parse().with_context(|| format!("bad member range `{part}`"))?,
                    b.trim().parse().with_context(|| format!("bad member range `{part}`"))?,
                );
                if a > b {
                    bail!("empty member range `{part}`");
                }
                ids.extend(a..=b);
            } else {
                ids.push(part.parse().with_context(|| format!("bad member id `{part}`"))?);
            }
        }
        if ids.is_empty() {
            bail!("member list is empty");
        }
        ids.sort_unstable();
        ids.dedup();
        Ok(MemberSpec::List(ids))
    }
}

impl fmt::Display for MemberSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MemberSpec::All => f.write_str("all"),
            MemberSpec::Median => f.write_str("median"),
            MemberSpec::List(ids) => {
                let s: Vec<String> = ids.iter().map(usize::to_string).collect();
                f.write_str(&s.join(","))
            }
        }
    }
}
