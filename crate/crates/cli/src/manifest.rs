//! Run manifests and the writers that embed them.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to reproduce a run. No clocks, hostnames or thread
/// counts: the same manifest must give the same bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub inputs: Vec<InputFile>,
    pub params: serde_json::Value,
    pub seed: u64,
    pub outputs: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn new(subcommand: &str, params: serde_json::Value, seed: u64) -> Self {
        RunManifest {
            tool: "gslab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            inputs: Vec::new(),
            params,
            seed,
            outputs: Vec::new(),
        }
    }

    /// Reads an input file and records its content hash.
    pub fn read_input(&mut self, path: &Path) -> Result<String> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        self.inputs.push(InputFile { path: path.display().to_string(), sha256: sha256_hex(text.as_bytes()) });
        Ok(text)
    }

    pub fn hash(&self) -> String {
        // through a Value, whose maps sort their keys: the digest of the
        // embedded manifest can be recomputed from any parsed report
        let canonical = serde_json::to_value(self).expect("manifest serializes").to_string();
        sha256_hex(canonical.as_bytes())
    }
}

/// A CSV body: header cells (with units) and formatted rows.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    /// RFC 4180 output; the last column carries the manifest hash.
    pub fn render(&self, manifest_hash: &str) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(self.header.iter().map(String::as_str).chain(["manifest_sha256"]))?;
        for row in &self.rows {
            w.write_record(row.iter().map(String::as_str).chain([manifest_hash]))?;
        }
        w.into_inner().map_err(|e| CliError::Usage(format!("csv buffer: {e}")))
    }
}

/// Shortest round-trip decimal form, stable across platforms.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:e}")
    }
}

pub fn write_bytes(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|source| CliError::Io { path: p.to_path_buf(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).and_then(|_| out.flush()).map_err(|source| CliError::Io { path: PathBuf::from("-"), source })
        }
    }
}

/// Where the JSON summary of a CSV run goes.
pub fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}
