//! CSV curve tables and JSON run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use crate::params::{Job, Params};

/// One point of one curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub x: f64,
    pub y: f64,
    /// Present for Monte-Carlo estimates only.
    pub stderr: Option<f64>,
    pub curve: String,
}

impl Row {
    pub fn exact(curve: &str, x: f64, y: f64) -> Self {
        Self {
            x,
            y,
            stderr: None,
            curve: curve.to_owned(),
        }
    }

    pub fn estimate(curve: &str, x: f64, y: f64, stderr: f64) -> Self {
        Self {
            x,
            y,
            stderr: Some(stderr),
            curve: curve.to_owned(),
        }
    }
}

/// Writes rows with header `x,y,stderr,curve`.
pub fn write_csv(path: &Path, rows: &[Row]) -> anyhow::Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> anyhow::Result<Vec<Row>> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    r.deserialize().map(|row| row.map_err(Into::into)).collect()
}

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub job: Job,
    pub params: Params,
    pub seed: u64,
    pub version: String,
    pub wall_time_s: f64,
    /// Data file written next to the manifest, if any.
    pub output: Option<String>,
    /// Result of a `bound` job.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<serde_json::Value>,
}

impl Manifest {
    pub fn new(job: Job, params: Params) -> Self {
        Self {
            command: job.command_line(),
            seed: params.seed,
            job,
            params,
            version: env!("CARGO_PKG_VERSION").to_owned(),
            wall_time_s: 0.0,
            output: None,
            value: None,
        }
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// `<dir>/<stem>.csv` and `<dir>/<stem>.manifest.json`.
pub fn output_paths(dir: &Path, stem: &str) -> (PathBuf, PathBuf) {
    (
        dir.join(format!("{stem}.csv")),
        dir.join(format!("{stem}.manifest.json")),
    )
}
