// SPDX-License-Identifier: Apache-2.0

//! Output directory bookkeeping: tables in the selected format, JSON
//! documents, and the run manifest with per-file checksums.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// Named columns of equal length.
#[derive(Debug, Clone, Default)]
pub struct Table {
    names: Vec<String>,
    columns: Vec<Vec<Value>>,
}

impl Table {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn column<T: Into<Value>>(mut self, name: &str, values: impl IntoIterator<Item = T>) -> Self {
        self.names.push(name.to_string());
        self.columns.push(values.into_iter().map(Into::into).collect());
        self
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    fn check(&self) -> Result<(), CliError> {
        let n = self.n_rows();
        match self.columns.iter().zip(&self.names).find(|(c, _)| c.len() != n) {
            Some((c, name)) => Err(CliError::Output(format!("column {name} has {} rows, expected {n}", c.len()))),
            None => Ok(()),
        }
    }

    fn to_json(&self) -> Value {
        let columns: serde_json::Map<String, Value> =
            self.names.iter().cloned().zip(self.columns.iter().map(|c| Value::Array(c.clone()))).collect();
        serde_json::json!({ "columns": self.names, "data": columns })
    }

    fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.names)?;
        for i in 0..self.n_rows() {
            w.write_record(self.columns.iter().map(|c| cell(&c[i])))?;
        }
        w.into_inner().map_err(|e| CliError::Output(e.to_string()))
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub artifact: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub format: Format,
    pub workers: usize,
    pub files: Vec<FileEntry>,
    pub started_at: String,
    pub finished_at: String,
    pub wall_clock_s: f64,
}

/// Files written during one command, relative to the output directory.
pub struct OutputDir {
    root: PathBuf,
    format: Format,
    files: Vec<FileEntry>,
}

impl OutputDir {
    pub fn create(root: &Path, format: Format) -> Result<Self, CliError> {
        fs::create_dir_all(root)
            .map_err(|e| CliError::Output(format!("cannot create output directory {}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf(), format, files: Vec::new() })
    }

    pub fn format(&self) -> Format {
        self.format
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    /// Writes `bytes` at `relative` and records its checksum.
    pub fn write_bytes(&mut self, relative: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(relative);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes).map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))?;
        self.files.retain(|f| f.path != relative);
        self.files.push(FileEntry {
            path: relative.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, relative: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_bytes(relative, text.as_bytes())
    }

    /// Single-line JSON for bulky data.
    pub fn write_json_compact<T: Serialize>(&mut self, relative: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string(value)?;
        text.push('\n');
        self.write_bytes(relative, text.as_bytes())
    }

    /// Writes `stem.json` or `stem.csv`; returns the relative path.
    pub fn write_table(&mut self, stem: &str, table: &Table) -> Result<String, CliError> {
        table.check()?;
        let relative = format!("{stem}.{}", self.format.extension());
        match self.format {
            Format::Json => self.write_json_compact(&relative, &table.to_json())?,
            Format::Csv => {
                let bytes = table.to_csv()?;
                self.write_bytes(&relative, &bytes)?
            }
        }
        Ok(relative)
    }

    /// Writes the manifest listing every file written so far.
    pub fn write_manifest(&mut self, mut manifest: RunManifest) -> Result<RunManifest, CliError> {
        let mut files = self.files.clone();
        files.sort_by(|a, b| a.path.cmp(&b.path));
        manifest.files = files;
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(self.root.join(MANIFEST_FILE), text)?;
        Ok(manifest)
    }
}

/// Re-hashes every listed file and returns the paths whose contents differ.
pub fn verify_manifest(root: &Path) -> Result<Vec<String>, CliError> {
    let text = fs::read_to_string(root.join(MANIFEST_FILE))?;
    let manifest: RunManifest = serde_json::from_str(&text)?;
    let mut bad = Vec::new();
    for f in &manifest.files {
        match fs::read(root.join(&f.path)) {
            Ok(bytes) if hex::encode(Sha256::digest(&bytes)) == f.sha256 => {}
            _ => bad.push(f.path.clone()),
        }
    }
    Ok(bad)
}
