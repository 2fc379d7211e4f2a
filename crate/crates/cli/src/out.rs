//! Output plumbing: the content-addressed run directory and the
//! provenance header every artifact carries.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::CliError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// A run directory named after the config hash. Identical config + seed
/// lands in the same directory with byte-identical contents.
pub struct RunDir {
    pub path: PathBuf,
    header: String,
    json_header: String,
}

impl RunDir {
    pub fn create(base: &Path, cfg: &RunConfig) -> Result<RunDir, CliError> {
        let path = base.join(format!("run-{}", cfg.short_hash()));
        std::fs::create_dir_all(&path)
            .map_err(|e| CliError::Input(format!("cannot create {}: {e}", path.display())))?;
        let header = format!(
            "# uciwatch {TOOL_VERSION}\n# config_sha256: {}\n",
            cfg.hash()
        );
        let json_header = format!(
            "{{\"tool\":\"uciwatch\",\"version\":\"{TOOL_VERSION}\",\"config_sha256\":\"{}\"}}",
            cfg.hash()
        );
        // drop the resolved config next to the outputs
        std::fs::write(path.join("config.toml"), cfg.canonical_toml())
            .map_err(|e| CliError::Input(format!("cannot write config copy: {e}")))?;
        Ok(RunDir {
            path,
            header,
            json_header,
        })
    }

    /// Opens `name` for writing with the `#`-comment provenance header
    /// already emitted (CSV-style artifacts).
    pub fn csv_file(&self, name: &str) -> Result<BufWriter<File>, CliError> {
        let p = self.path.join(name);
        let mut w = BufWriter::new(
            File::create(&p)
                .map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display())))?,
        );
        w.write_all(self.header.as_bytes())
            .map_err(|e| CliError::Input(e.to_string()))?;
        Ok(w)
    }

    /// Opens `name` for writing with a one-line JSON provenance header
    /// (JSON-lines artifacts).
    pub fn jsonl_file(&self, name: &str) -> Result<BufWriter<File>, CliError> {
        let p = self.path.join(name);
        let mut w = BufWriter::new(
            File::create(&p)
                .map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display())))?,
        );
        writeln!(w, "{}", self.json_header).map_err(|e| CliError::Input(e.to_string()))?;
        Ok(w)
    }

    /// Plain file, caller controls every byte.
    pub fn raw_file(&self, name: &str) -> Result<BufWriter<File>, CliError> {
        let p = self.path.join(name);
        Ok(BufWriter::new(File::create(&p).map_err(|e| {
            CliError::Input(format!("cannot write {}: {e}", p.display()))
        })?))
    }
}

/// Reads a JSON-lines file produced by this tool, skipping the
/// provenance header line when present.
pub fn read_jsonl_body(path: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    Ok(text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with("{\"tool\":\"uciwatch\""))
        .map(|l| l.to_string())
        .collect())
}
