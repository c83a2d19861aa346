//! CSV and manifest writers.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::runner::{ExperimentOutcome, Rejection};

pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const TRAJECTORY_FILE: &str = "trajectories.csv";
pub const ITERATION_FILE: &str = "iterations.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

pub const AGGREGATE_HEADER: [&str; 6] = [
    "step",
    "tau",
    "energy_mean",
    "energy_std",
    "fidelity_mean",
    "retained_n",
];
pub const TRAJECTORY_HEADER: [&str; 10] = [
    "seed",
    "step",
    "tau",
    "energy",
    "fidelity",
    "cost",
    "inner_iterations",
    "cumulative_iterations",
    "stalled",
    "fd_fallback",
];
pub const ITERATION_HEADER: [&str; 3] = ["iteration", "fidelity_mean", "retained_n"];

/// Everything needed to rerun a batch bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub generator: String,
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub retained_seeds: Vec<u64>,
    pub rejected: Vec<Rejection>,
    pub outlier_threshold: Option<f64>,
    pub ground_energy: f64,
    pub ground_degeneracy: usize,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn from_outcome(outcome: &ExperimentOutcome) -> Self {
        Self {
            generator: concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")).into(),
            config: outcome.config.clone(),
            seeds: outcome.records.iter().map(|r| r.seed).collect(),
            retained_seeds: outcome.outliers.retained_seeds.clone(),
            rejected: outcome.outliers.rejected.clone(),
            outlier_threshold: outcome.outliers.threshold,
            ground_energy: outcome.ground_energy,
            ground_degeneracy: outcome.ground_degeneracy,
            files: [AGGREGATE_FILE, TRAJECTORY_FILE, ITERATION_FILE]
                .map(String::from)
                .to_vec(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

/// Shortest representation that parses back to the same value.
pub fn fmt_float(x: f64) -> String {
    format!("{x}")
}

fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let io = |e: csv::Error| {
        let kind = std::io::Error::other(e.to_string());
        CliError::io(path, kind)
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmittedFiles {
    pub dir: PathBuf,
    pub aggregate: PathBuf,
    pub trajectories: PathBuf,
    pub iterations: PathBuf,
    pub manifest: PathBuf,
}

/// Writes the aggregate, per-seed and per-iteration CSVs plus the manifest into `dir`.
pub fn emit_outputs(outcome: &ExperimentOutcome, dir: &Path) -> Result<EmittedFiles> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let files = EmittedFiles {
        dir: dir.to_path_buf(),
        aggregate: dir.join(AGGREGATE_FILE),
        trajectories: dir.join(TRAJECTORY_FILE),
        iterations: dir.join(ITERATION_FILE),
        manifest: dir.join(MANIFEST_FILE),
    };
    write_csv(
        &files.aggregate,
        &AGGREGATE_HEADER,
        outcome.curve.iter().map(|p| {
            vec![
                p.step.to_string(),
                fmt_float(p.tau),
                fmt_float(p.energy_mean),
                fmt_float(p.energy_std),
                fmt_float(p.fidelity_mean),
                p.retained_n.to_string(),
            ]
        }),
    )?;
    write_csv(
        &files.trajectories,
        &TRAJECTORY_HEADER,
        outcome.records.iter().flat_map(|r| {
            r.steps.iter().map(move |s| {
                vec![
                    r.seed.to_string(),
                    s.step.to_string(),
                    fmt_float(s.tau),
                    fmt_float(s.energy),
                    fmt_float(s.fidelity),
                    s.cost.map(fmt_float).unwrap_or_default(),
                    s.inner_iterations.to_string(),
                    s.cumulative_iterations.to_string(),
                    s.stalled.to_string(),
                    s.fd_fallback.to_string(),
                ]
            })
        }),
    )?;
    write_csv(
        &files.iterations,
        &ITERATION_HEADER,
        outcome.iteration_curve.iter().map(|p| {
            vec![
                p.iteration.to_string(),
                fmt_float(p.fidelity_mean),
                p.retained_n.to_string(),
            ]
        }),
    )?;
    let manifest = Manifest::from_outcome(outcome);
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::Aggregation(format!("manifest serialization: {e}")))?;
    fs::write(&files.manifest, json + "\n").map_err(|e| CliError::io(&files.manifest, e))?;
    Ok(files)
}
