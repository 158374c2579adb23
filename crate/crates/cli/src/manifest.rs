use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Written once per output directory. Two runs whose manifests agree on
/// everything but `timestamp` write identical data files.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub seed: u64,
    pub config: RunConfig,
    /// Subcommand flags as resolved.
    pub args: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub tool_version: String,
    pub timestamp: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects inputs and outputs of one run.
pub struct Run {
    pub out_dir: PathBuf,
    inputs: Vec<InputDigest>,
    outputs: Vec<String>,
}

impl Run {
    pub fn new(out_dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(out_dir)
            .map_err(|e| CliError::Internal(format!("cannot create {}: {e}", out_dir.display())))?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    /// Records the digest of an input file, failing with a data error when
    /// it cannot be read.
    pub fn input(&mut self, path: &Path) -> CliResult<()> {
        let bytes = std::fs::read(path).map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    /// Opens `name` in the output directory and hands a buffered writer to
    /// `fill`.
    pub fn write<F>(&mut self, name: &str, fill: F) -> CliResult<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> CliResult<()>,
    {
        let path = self.out_dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::Internal(format!("cannot create {}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        fill(&mut w)?;
        w.flush()
            .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> CliResult<()> {
        self.write(name, |w| {
            w.write_all(text.as_bytes())
                .map_err(|e| CliError::Internal(e.to_string()))
        })
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
        text.push('\n');
        self.write_text(name, &text)
    }

    pub fn finish(self, subcommand: &str, cfg: &RunConfig, args: serde_json::Value) -> CliResult<()> {
        let manifest = RunManifest {
            subcommand: subcommand.to_string(),
            seed: cfg.seed,
            config: cfg.clone(),
            args,
            inputs: self.inputs,
            outputs: self.outputs,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: time::OffsetDateTime::now_utc()
                .format(&time::format_description::well_known::Rfc3339)
                .map_err(|e| CliError::Internal(e.to_string()))?,
        };
        let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Internal(e.to_string()))?;
        text.push('\n');
        let path = self.out_dir.join(MANIFEST_FILE);
        std::fs::write(&path, text).map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_known_input() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
