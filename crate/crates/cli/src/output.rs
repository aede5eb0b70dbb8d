use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

/// Output files buffered in memory and written only once the command has
/// succeeded, each through a temp file renamed into place.
pub struct Outputs {
    header: String,
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn new(config_hash: &str, seed: u64) -> Self {
        Self {
            header: format!(
                "fairdice {} config_hash={config_hash} seed={seed}",
                env!("CARGO_PKG_VERSION")
            ),
            files: Vec::new(),
        }
    }

    /// A CSV file with the header comment on its first line.
    pub fn csv(&mut self, name: &str, body: impl FnOnce(&mut Vec<u8>) -> fairdice::Result<()>) -> Result<()> {
        let mut buf = format!("# {}\n", self.header).into_bytes();
        body(&mut buf).with_context(|| format!("formatting {name}"))?;
        self.files.push((name.to_string(), buf));
        Ok(())
    }

    /// A JSON-lines file whose first record carries the header.
    pub fn jsonl(&mut self, name: &str, records: impl IntoIterator<Item = serde_json::Value>) -> Result<()> {
        let mut buf = Vec::new();
        writeln!(buf, "{}", serde_json::json!({ "header": self.header }))?;
        for r in records {
            writeln!(buf, "{r}")?;
        }
        self.files.push((name.to_string(), buf));
        Ok(())
    }

    pub fn commit(self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (name, bytes) in self.files {
            let target = dir.join(&name);
            let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("staging {name}"))?;
            tmp.write_all(&bytes)?;
            #[cfg(unix)]
            {
                use std::os::unix::fs::PermissionsExt;
                tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644))?;
            }
            tmp.as_file().sync_all()?;
            tmp.persist(&target)
                .with_context(|| format!("writing {}", target.display()))?;
            log::info!("wrote {}", target.display());
        }
        Ok(())
    }
}
