use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::CliError;

/// Version string recorded in every sidecar.
pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "+", env!("DWZ_GIT_DESCRIBE"));

/// Formats `x` with nine significant digits.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    if (-4..15).contains(&magnitude) {
        let decimals = (8 - magnitude).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.8e}")
    }
}

/// CSV text with a fixed header.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn header(&self) -> &[&'static str] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FailedTrial {
    pub trial_index: usize,
    pub error: String,
}

/// Per-trial results. Wall time is kept out of the serialized form so that
/// output files only depend on the configuration and seed.
#[derive(Clone, Debug, Serialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub seed: u64,
    /// Rates in bits per channel use, laid out as described by `columns` in
    /// the sidecar.
    pub rates: Vec<f64>,
    pub converged: Vec<bool>,
    #[serde(skip)]
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Sidecar {
    pub version: &'static str,
    pub experiment: &'static str,
    pub config: ExperimentConfig,
    /// Meaning of each entry of `records[].rates`.
    pub columns: Vec<String>,
    pub trials_completed: usize,
    pub failed_trials: Vec<FailedTrial>,
    pub records: Vec<TrialRecord>,
    /// Experiment-specific checks computed from the results.
    pub checks: serde_json::Value,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub table: Table,
    pub sidecar: Sidecar,
}

impl ExperimentOutput {
    pub fn failures(&self) -> usize {
        self.sidecar.failed_trials.len()
    }

    /// Writes the CSV to `path` and the sidecar next to it with a `.json` extension.
    pub fn write(&self, path: &Path) -> Result<PathBuf, CliError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, self.table.to_csv())?;
        let sidecar = sidecar_path(path);
        let json = serde_json::to_string_pretty(&self.sidecar).expect("sidecar always serializes");
        fs::write(&sidecar, json + "\n")?;
        Ok(sidecar)
    }
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    if csv.extension().is_some_and(|e| e == "json") {
        let mut name = csv.as_os_str().to_owned();
        name.push(".meta.json");
        PathBuf::from(name)
    } else {
        csv.with_extension("json")
    }
}
