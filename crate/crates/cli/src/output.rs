use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

/// Version of the JSON files written by `ph`.
pub const SCHEMA_VERSION: u32 = 1;

/// Collects the files of one output directory and writes the manifest last.
pub struct OutDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root.display(), e))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(name);
        fs::write(&path, contents).map_err(|e| CliError::io(path.display(), e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_vec_pretty(value).map_err(|e| CliError::io(name, e))?;
        text.push(b'\n');
        self.write(name, &text)
    }

    pub fn finish(mut self, manifest: Manifest) -> Result<(), CliError> {
        let manifest = ManifestFile {
            schema_version: SCHEMA_VERSION,
            version: env!("CARGO_PKG_VERSION"),
            outputs: std::mem::take(&mut self.files),
            manifest,
        };
        self.write_json("manifest.json", &manifest)
    }
}

/// Provenance of one run. Worker counts and timings are left out on purpose
/// so that reruns produce identical files.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: &'static str,
    pub config_sha256: Option<String>,
    pub master_seed: Option<u64>,
    pub process: Option<String>,
}

#[derive(Serialize)]
struct ManifestFile {
    schema_version: u32,
    version: &'static str,
    #[serde(flatten)]
    manifest: Manifest,
    outputs: Vec<String>,
}

/// Comma-separated table with a header row.
pub struct Table {
    buf: Vec<u8>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = Vec::new();
        writeln!(buf, "{}", header.join(",")).expect("write to memory");
        Self { buf }
    }

    pub fn row(&mut self, cells: &[&dyn std::fmt::Display]) {
        let line: Vec<String> = cells.iter().map(|c| c.to_string()).collect();
        writeln!(self.buf, "{}", line.join(",")).expect("write to memory");
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }
}
