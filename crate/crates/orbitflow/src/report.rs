//! Report documents and trajectory CSV emission, with atomic file writes.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hamiltonian::Trajectory;

/// CSV with header `t,x_1,...,x_n`, shortest round-trip formatting.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let dim = traj.states.first().map_or(0, |s| s.len());
    let mut out = String::from("t");
    for i in 1..=dim {
        out.push_str(&format!(",x_{i}"));
    }
    out.push('\n');
    for (t, s) in traj.times.iter().zip(&traj.states) {
        out.push_str(&format!("{t}"));
        for v in s.iter() {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

/// Write via a temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let base = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = dir.join(format!(".{base}.tmp.{}", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidateReport {
    pub config: String,
    pub passed: bool,
    pub items: Vec<CheckItem>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DriftEntry {
    pub name: String,
    pub drift: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimulateReport {
    pub config: String,
    pub t: f64,
    pub dt: f64,
    pub sign: f64,
    pub steps: usize,
    pub final_state: Vec<f64>,
    pub conservation: Vec<DriftEntry>,
    pub max_tangency_residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InvarianceEntry {
    pub name: String,
    pub max_residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelSetSummary {
    pub verdict: String,
    pub witness_count: usize,
    pub max_witness_norm: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub config: String,
    pub seed: u64,
    pub invariance: Vec<InvarianceEntry>,
    /// Field names indexing the involution matrix.
    pub involution_fields: Vec<String>,
    /// Row-major max |{f_i, f_j}| over the sampled points.
    pub involution_matrix: Vec<Vec<f64>>,
    pub orbit_dimension: usize,
    pub level_set: Option<LevelSetSummary>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AggregateReport {
    pub entries: Vec<ValidateReport>,
    pub failures: usize,
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s.into_bytes()
}
