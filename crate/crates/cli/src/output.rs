//! CSV tables, artifact bundles and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::Result;
use vnoise_core::format::sig6;

/// One CSV cell.
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(i64::from(v))
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => sig6(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => {
        vec![$($crate::output::Cell::from($x)),*]
    };
}

/// A CSV table whose first line records the experiment, seed and config hash.
pub struct CsvTable {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self, config: &ExperimentConfig) -> String {
        let mut out = format!(
            "# experiment={} seed={} config_sha256={}\n",
            config.experiment.name(),
            config.seed,
            config.hash()
        );
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(Cell::render).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

pub struct Artifact {
    pub name: String,
    pub contents: Vec<u8>,
}

/// Files produced by one experiment plus any reproduction failures.
#[derive(Default)]
pub struct ExperimentOutput {
    pub artifacts: Vec<Artifact>,
    pub failures: Vec<String>,
}

impl ExperimentOutput {
    pub fn csv(&mut self, name: &str, table: &CsvTable, config: &ExperimentConfig) {
        self.artifacts.push(Artifact {
            name: name.to_owned(),
            contents: table.render(config).into_bytes(),
        });
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.artifacts.push(Artifact {
            name: name.to_owned(),
            contents: text.into_bytes(),
        });
        Ok(())
    }

    pub fn text(&mut self, name: &str, text: String) {
        self.artifacts.push(Artifact {
            name: name.to_owned(),
            contents: text.into_bytes(),
        });
    }

    pub fn artifact(&self, name: &str) -> Option<&[u8]> {
        self.artifacts
            .iter()
            .find(|a| a.name == name)
            .map(|a| a.contents.as_slice())
    }
}

#[derive(Serialize)]
struct ManifestEntry<'a> {
    path: &'a str,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: &'static str,
    seed: u64,
    config_sha256: String,
    config: &'a ExperimentConfig,
    artifacts: Vec<ManifestEntry<'a>>,
    failures: &'a [String],
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Writes every artifact and `manifest.json` into `dir`.
pub fn write_outputs(
    dir: &Path,
    config: &ExperimentConfig,
    output: &ExperimentOutput,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    for a in &output.artifacts {
        fs::write(dir.join(&a.name), &a.contents)?;
    }
    let manifest = Manifest {
        experiment: config.experiment.name(),
        seed: config.seed,
        config_sha256: config.hash(),
        config,
        artifacts: output
            .artifacts
            .iter()
            .map(|a| ManifestEntry {
                path: &a.name,
                bytes: a.contents.len(),
                sha256: sha256_hex(&a.contents),
            })
            .collect(),
        failures: &output.failures,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(dir.join("manifest.json"), text)?;
    Ok(())
}
