use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 7] = [
    "method",
    "axis",
    "axis_value",
    "metric",
    "value",
    "n",
    "seed",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub method: String,
    pub axis: String,
    pub axis_value: f64,
    pub metric: String,
    pub value: f64,
    pub n: u64,
    pub seed: u64,
}

/// Append-only list of metric rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsTable {
    rows: Vec<MetricRow>,
}

impl MetricsTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: MetricRow) -> Result<()> {
        if !row.value.is_finite() || !row.axis_value.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "non-finite metric {}/{} = {}",
                row.method, row.metric, row.value
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    pub fn add(
        &mut self,
        method: &str,
        axis: &str,
        axis_value: f64,
        metric: &str,
        value: f64,
        n: usize,
        seed: u64,
    ) -> Result<()> {
        self.push(MetricRow {
            method: method.to_string(),
            axis: axis.to_string(),
            axis_value,
            metric: metric.to_string(),
            value,
            n: n as u64,
            seed,
        })
    }

    pub fn append(&mut self, other: MetricsTable) {
        self.rows.extend(other.rows);
    }

    pub fn rows(&self) -> &[MetricRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, method: &str, axis_value: f64, metric: &str) -> Option<&MetricRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.axis_value == axis_value && r.metric == metric)
    }
}

/// Provenance written next to every result file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    /// The experiment or configuration that produced the rows.
    pub spec: serde_json::Value,
}

impl RunManifest {
    pub fn new<T: Serialize>(command: &str, seed: u64, spec: &T) -> Result<Self> {
        Ok(Self {
            command: command.to_string(),
            version: concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")).to_string(),
            seed,
            spec: serde_json::to_value(spec)?,
        })
    }
}

/// `results.csv` → `results.manifest.json`.
pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.json")
}

/// Writes the CSV (header always present) and its manifest.
pub fn write_results(table: &MetricsTable, path: &Path, manifest: &RunManifest) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for row in &table.rows {
        w.serialize(row)?;
    }
    w.flush()?;
    std::fs::write(manifest_path(path), serde_json::to_string_pretty(manifest)?)?;
    Ok(())
}

pub fn read_results(path: &Path) -> Result<MetricsTable> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::InvalidArgument(format!(
            "{} does not have the expected header",
            path.display()
        )));
    }
    let mut table = MetricsTable::new();
    for row in r.deserialize() {
        table.push(row?)?;
    }
    Ok(table)
}

pub fn read_manifest(csv: &Path) -> Result<RunManifest> {
    Ok(serde_json::from_str(&std::fs::read_to_string(
        manifest_path(csv),
    )?)?)
}
