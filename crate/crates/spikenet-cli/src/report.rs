//! Report structures and deterministic writers.
//!
//! Everything in the report except the `timing` block is a pure function of
//! the configuration, so re-running an experiment writes byte-identical
//! `report.json` and `points.csv` files modulo that block.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use spikenet::{ApproxCertificate, ApproxStrategy, QuadratureEstimate};

use crate::config::ExperimentConfig;

/// Wall-clock facts, isolated so determinism checks can strip them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix_ms: u128,
    pub elapsed_ms: u128,
}

/// One observed point with everything measured at it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRow {
    pub trial: u64,
    pub index: usize,
    pub point: Vec<f64>,
    /// Hidden ground-truth label (the field, exceptions included).
    pub truth: f64,
    /// The oracle representative's label at the point.
    pub representative: f64,
    /// The fitted network's output.
    pub predicted: f64,
    /// |predicted - representative|, the construction's exactness claim.
    pub abs_error: f64,
    /// Residual the spike stage corrected (representative minus base net).
    pub residual: f64,
}

/// Everything recorded about one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    /// Seed of the approximation loop's quadrature certificates.
    pub approx_seed: u64,
    /// Seed of the final L1 budget measurement.
    pub l1_seed: u64,
    /// The observed set, in sampled (deduplicated) order.
    pub x: Vec<Vec<f64>>,
    /// Accepted interpolation grid resolution (None for the zero strategy).
    pub grid_resolution: Option<u64>,
    pub strategy: ApproxStrategy,
    /// Certificate of the base approximation stage.
    pub certificate: ApproxCertificate<f64>,
    /// Common spike resolution (None when no corrections were needed).
    pub n_star: Option<u64>,
    pub spike_count: usize,
    /// max over X of |predicted - representative| / max(1, |representative|).
    pub exactness_max_error: f64,
    pub exactness_pass: bool,
    /// Points where the prediction disagrees with the hidden truth.
    pub mismatches: Vec<Vec<f64>>,
    /// Points where the representative itself disagrees with the truth.
    pub expected_mismatches: Vec<Vec<f64>>,
    /// The two logs above must coincide: failures happen exactly where the
    /// oracle's choice differs from the truth on X, never elsewhere.
    pub logs_equal: bool,
    /// Measured L1 distance between the network and the base reference.
    pub l1_estimate: QuadratureEstimate<f64>,
    pub l1_pass: bool,
    /// Network wire file, relative to the report's directory.
    pub network_file: String,
}

/// Batch verdicts over all trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: u64,
    pub total_points: u64,
    pub total_spikes: u64,
    pub total_mismatches: u64,
    pub exactness_all_pass: bool,
    pub l1_all_pass: bool,
    pub logs_all_equal: bool,
    /// The run's verdict: every per-trial assertion held.
    pub pass: bool,
}

/// The full experiment report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub report_version: u32,
    /// Echo of the configuration the run executed.
    pub config: ExperimentConfig,
    pub trials: Vec<TrialRecord>,
    pub summary: Summary,
    /// Volatile wall-clock block; everything else is deterministic.
    #[serde(default)]
    pub timing: Timing,
}

impl ExperimentReport {
    /// Serializes the report as pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    /// Reads a report back from disk.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read report {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("cannot parse report {}", path.display()))
    }

    /// Writes `report.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join("report.json");
        std::fs::write(&path, self.to_json())
            .with_context(|| format!("cannot write {}", path.display()))
    }
}

/// Writes the per-point table as `points.csv` in `dir`.
///
/// Columns: trial, index, one column per coordinate, then truth,
/// representative, predicted, abs_error, residual. Floats print in
/// shortest-roundtrip form, so the file is deterministic.
pub fn write_points_csv(rows: &[PointRow], d: usize, dir: &Path) -> Result<()> {
    let path = dir.join("points.csv");
    let mut writer = csv::Writer::from_path(&path)
        .with_context(|| format!("cannot create {}", path.display()))?;

    let mut header: Vec<String> = vec!["trial".into(), "index".into()];
    header.extend((0..d).map(|l| format!("x{l}")));
    header.extend(
        ["truth", "representative", "predicted", "abs_error", "residual"]
            .map(String::from),
    );
    writer.write_record(&header)?;

    for row in rows {
        let mut record: Vec<String> = vec![row.trial.to_string(), row.index.to_string()];
        record.extend(row.point.iter().map(|v| v.to_string()));
        record.push(row.truth.to_string());
        record.push(row.representative.to_string());
        record.push(row.predicted.to_string());
        record.push(row.abs_error.to_string());
        record.push(row.residual.to_string());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}
