//! Seeded experiment batches over the filtered-evolution simulator:
//! configuration, presets, outlier filtering, aggregation and file output.

pub mod checks;
pub mod config;
pub mod error;
pub mod oracle_report;
pub mod output;
pub mod presets;
pub mod runner;

use std::path::Path;

pub use config::{ExperimentConfig, InitMode, Method, OutlierRule};
pub use error::{CliError, Result};
pub use output::{emit_outputs, EmittedFiles, Manifest};
pub use presets::Preset;
pub use runner::{filter_outliers, run_experiment, AggregatePoint, ExperimentOutcome};

/// Environment variable overriding the output directory.
pub const OUTPUT_DIR_ENV: &str = "QGF_OUTPUT_DIR";

/// Runs a batch and writes its files under `config.batch_dir()`.
pub fn run_and_emit(config: &ExperimentConfig) -> Result<(ExperimentOutcome, EmittedFiles)> {
    let outcome = run_experiment(config)?;
    let files = emit_outputs(&outcome, &config.batch_dir())?;
    Ok((outcome, files))
}

/// Runs every batch of `preset` under `out/<preset>/`, validating all first.
pub fn run_preset(
    preset: Preset,
    out: &Path,
    n_seeds: Option<usize>,
    base_seed: Option<u64>,
) -> Result<Vec<(ExperimentOutcome, EmittedFiles)>> {
    let configs: Vec<ExperimentConfig> = preset
        .configs(out)
        .into_iter()
        .map(|mut c| {
            c.n_seeds = n_seeds.unwrap_or(c.n_seeds);
            c.base_seed = base_seed.unwrap_or(c.base_seed);
            c
        })
        .collect();
    for c in &configs {
        c.validate()?;
    }
    configs.iter().map(run_and_emit).collect()
}
