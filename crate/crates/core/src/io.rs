//! Run artifacts: step log, monitor norms, state dumps and the JSON summary.

use crate::config::Scenario;
use crate::device::{DeviceMesh, SystemState};
use crate::diagnostics::{Breach, InequalityMode, MonitorNorms};
use crate::run::RunOutput;
use crate::solver::StepRecord;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

pub const STEP_LOG: &str = "steps.csv";
pub const NORM_LOG: &str = "norms.csv";
pub const SUMMARY: &str = "summary.json";

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Fs { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

fn fs_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Fs {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> IoError + '_ {
    move |source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Outcome of a run as written to `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub seed: u64,
    pub status: String,
    pub error: Option<String>,
    pub cells: usize,
    pub steps: usize,
    pub rejected_steps: usize,
    pub final_time: f64,
    pub lambda: f64,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub total_dissipation: f64,
    /// `pass` or `fail` when `Λ = 0`; `reported` when the Gronwall bound
    /// applies, which is not asserted.
    pub energy_decay: String,
    pub energy_mode: InequalityMode,
    pub verdicts_passed: usize,
    pub verdicts_failed: usize,
    pub min_slack: Option<f64>,
    pub mass_d_drift: f64,
    pub bounds: String,
    pub breach: Option<Breach>,
    pub min_n: f64,
    pub max_n: f64,
    pub min_p: f64,
    pub max_p: f64,
    pub min_d: f64,
    pub max_d: f64,
}

impl Summary {
    pub fn new(scenario: &Scenario, out: &RunOutput, error: Option<String>) -> Self {
        let r = &out.records;
        let fold = |f: fn(&StepRecord) -> f64, min: bool| {
            r.iter().map(f).fold(if min { f64::INFINITY } else { f64::NEG_INFINITY }, |a, b| {
                if min {
                    a.min(b)
                } else {
                    a.max(b)
                }
            })
        };
        let ineq = &out.inequality;
        let energy_decay = match (ineq.mode, ineq.all_pass()) {
            (InequalityMode::Gronwall, _) => "reported",
            (InequalityMode::Decay, true) => "pass",
            (InequalityMode::Decay, false) => "fail",
        };
        Self {
            name: scenario.name.clone(),
            seed: scenario.seed,
            status: if error.is_some() { "failed" } else { "completed" }.into(),
            error,
            cells: scenario.mesh.num_cells(),
            steps: r.len().saturating_sub(1),
            rejected_steps: out.rejected_steps,
            final_time: r.last().map_or(0.0, |r| r.t),
            lambda: out.lambda,
            initial_energy: r.first().map_or(0.0, |r| r.energy),
            final_energy: r.last().map_or(0.0, |r| r.energy),
            total_dissipation: out.total_dissipation(),
            energy_decay: energy_decay.into(),
            energy_mode: ineq.mode,
            verdicts_passed: ineq.passed,
            verdicts_failed: ineq.failed,
            min_slack: ineq.min_slack.is_finite().then_some(ineq.min_slack),
            mass_d_drift: out.mass_drift(),
            bounds: if out.bounds_pass() { "pass" } else { "fail" }.into(),
            breach: out.bounds.iter().find_map(|b| b.breach),
            min_n: fold(|r| r.min_n, true),
            max_n: fold(|r| r.max_n, false),
            min_p: fold(|r| r.min_p, true),
            max_p: fold(|r| r.max_p, false),
            min_d: fold(|r| r.min_d, true),
            max_d: fold(|r| r.max_d, false),
        }
    }
}

pub fn write_records(path: &Path, records: &[StepRecord]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for r in records {
        w.serialize(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(fs_err(path))
}

pub fn read_records(path: &Path) -> Result<Vec<StepRecord>, IoError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().collect::<Result<_, _>>().map_err(csv_err(path))
}

pub fn write_norms(path: &Path, norms: &[MonitorNorms]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for n in norms {
        w.serialize(n).map_err(csv_err(path))?;
    }
    w.flush().map_err(fs_err(path))
}

/// Header of a state dump for a mesh of the given dimension.
pub fn state_header(dimension: u8) -> Vec<&'static str> {
    let mut h = vec!["cell_id", "x"];
    if dimension == 2 {
        h.push("y");
    }
    h.extend(["n", "p", "D", "V", "phi_n", "phi_p", "phi_D"]);
    h
}

pub fn write_state(path: &Path, state: &SystemState, mesh: &DeviceMesh) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(state_header(mesh.dimension())).map_err(csv_err(path))?;
    for (k, c) in mesh.cells().iter().enumerate() {
        let mut row = vec![k.to_string(), c.centroid[0].to_string()];
        if mesh.dimension() == 2 {
            row.push(c.centroid[1].to_string());
        }
        for f in [&state.n, &state.p, &state.d, &state.v, &state.phi_n, &state.phi_p, &state.phi_d] {
            row.push(f[k].to_string());
        }
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(fs_err(path))
}

/// Cell fields of a state dump, by column name.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl StateTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

pub fn read_state(path: &Path) -> Result<StateTable, IoError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let columns: Vec<String> = r.headers().map_err(csv_err(path))?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| IoError::Format {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
        rows.push(row);
    }
    Ok(StateTable { columns, rows })
}

/// File name of the dump taken at time `t`.
pub fn dump_name(t: f64) -> String {
    format!("state_t{t:.6}.csv")
}

/// Writes the step log, norms, dumps and summary of a (possibly partial)
/// run into `dir`.
pub fn write_run(dir: &Path, scenario: &Scenario, out: &RunOutput, error: Option<String>) -> Result<Summary, IoError> {
    fs::create_dir_all(dir).map_err(fs_err(dir))?;
    write_records(&dir.join(STEP_LOG), &out.records)?;
    write_norms(&dir.join(NORM_LOG), &out.norms)?;
    for d in &out.dumps {
        write_state(&dir.join(dump_name(d.t)), d, &scenario.mesh)?;
    }
    let summary = Summary::new(scenario, out, error);
    let path = dir.join(SUMMARY);
    let text = serde_json::to_string_pretty(&summary).map_err(|source| IoError::Json {
        path: path.clone(),
        source,
    })?;
    fs::write(&path, text + "\n").map_err(fs_err(&path))?;
    Ok(summary)
}
