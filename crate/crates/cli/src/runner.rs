//! Seeded batches, outlier rejection and per-step aggregation.

use std::collections::BTreeSet;

use qgf_core::engine::{run_baseline_vqe_with, run_qgf_evolution_with};
use qgf_core::{GroundTruth, TrajectoryRecord};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Method, OutlierRule};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub seed: u64,
    pub final_energy: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierReport {
    /// `median + iqr_factor * IQR` of the final energies; absent when disabled.
    pub threshold: Option<f64>,
    pub retained_seeds: Vec<u64>,
    pub rejected: Vec<Rejection>,
}

impl OutlierReport {
    pub fn retains(&self, seed: u64) -> bool {
        self.retained_seeds.contains(&seed)
    }
}

/// Linearly interpolated quantile of ascending `sorted`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Rejects seeds whose final energy is non-finite or strictly above
/// `median + iqr_factor * IQR`.
pub fn filter_outliers(records: &[TrajectoryRecord], rule: &OutlierRule) -> Result<OutlierReport> {
    if records.is_empty() {
        return Err(CliError::Aggregation("no records to filter".into()));
    }
    let mut rejected = Vec::new();
    let mut finite: Vec<f64> = records
        .iter()
        .map(|r| r.last().energy)
        .filter(|e| e.is_finite())
        .collect();
    finite.sort_by(f64::total_cmp);
    let threshold = (rule.enabled && !finite.is_empty()).then(|| {
        let iqr = quantile(&finite, 0.75) - quantile(&finite, 0.25);
        quantile(&finite, 0.5) + rule.iqr_factor * iqr
    });
    let mut retained_seeds = Vec::new();
    for r in records {
        let e = r.last().energy;
        let reason = if !e.is_finite() {
            Some("non-finite final energy".to_string())
        } else {
            threshold.filter(|t| e > *t).map(|t| {
                format!(
                    "final energy {e} exceeds median + {} IQR = {t}",
                    rule.iqr_factor
                )
            })
        };
        match reason {
            Some(reason) => rejected.push(Rejection {
                seed: r.seed,
                final_energy: e,
                reason,
            }),
            None => retained_seeds.push(r.seed),
        }
    }
    if retained_seeds.is_empty() {
        let dump: Vec<String> = rejected
            .iter()
            .map(|r| format!("seed {}: {}", r.seed, r.final_energy))
            .collect();
        return Err(CliError::Aggregation(format!(
            "every seed was rejected ({})",
            dump.join(", ")
        )));
    }
    Ok(OutlierReport {
        threshold,
        retained_seeds,
        rejected,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatePoint {
    pub step: usize,
    pub tau: f64,
    pub energy_mean: f64,
    /// Sample standard deviation; zero for a single seed.
    pub energy_std: f64,
    pub fidelity_mean: f64,
    pub retained_n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationPoint {
    pub iteration: usize,
    pub fidelity_mean: f64,
    pub retained_n: usize,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Per-step mean and spread over `records`, which must share a step grid.
pub fn aggregate(records: &[&TrajectoryRecord]) -> Result<Vec<AggregatePoint>> {
    let first = records
        .first()
        .ok_or_else(|| CliError::Aggregation("no retained records".into()))?;
    let len = first.steps.len();
    if let Some(r) = records.iter().find(|r| r.steps.len() != len) {
        return Err(CliError::Aggregation(format!(
            "seed {} has {} steps, expected {len}",
            r.seed,
            r.steps.len()
        )));
    }
    Ok((0..len)
        .map(|k| {
            let energies: Vec<f64> = records.iter().map(|r| r.steps[k].energy).collect();
            let fidelities: Vec<f64> = records.iter().map(|r| r.steps[k].fidelity).collect();
            AggregatePoint {
                step: first.steps[k].step,
                tau: first.steps[k].tau,
                energy_mean: mean(&energies),
                energy_std: sample_std(&energies),
                fidelity_mean: mean(&fidelities),
                retained_n: records.len(),
            }
        })
        .collect())
}

/// Mean fidelity against the cumulative inner-iteration count.
pub fn aggregate_by_iteration(records: &[&TrajectoryRecord]) -> Vec<IterationPoint> {
    let budget = records
        .iter()
        .map(|r| r.last().cumulative_iterations)
        .max()
        .unwrap_or(0);
    (0..=budget)
        .map(|n| IterationPoint {
            iteration: n,
            fidelity_mean: mean(
                &records
                    .iter()
                    .map(|r| r.fidelity_at_iteration(n))
                    .collect::<Vec<_>>(),
            ),
            retained_n: records.len(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub ground_energy: f64,
    pub ground_degeneracy: usize,
    /// Every seed in seed order, rejected ones included.
    pub records: Vec<TrajectoryRecord>,
    pub outliers: OutlierReport,
    pub curve: Vec<AggregatePoint>,
    pub iteration_curve: Vec<IterationPoint>,
}

impl ExperimentOutcome {
    pub fn retained(&self) -> Vec<&TrajectoryRecord> {
        self.records
            .iter()
            .filter(|r| self.outliers.retains(r.seed))
            .collect()
    }

    pub fn final_point(&self) -> &AggregatePoint {
        self.curve.last().expect("curve holds the initial point")
    }
}

/// Runs one evolution per seed on the rayon pool and aggregates the retained ones.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let (spec, h) = config.build()?;
    let ground = GroundTruth::from_hamiltonian(&h)?;
    let init = config.parameter_init();
    let records = config
        .seeds()
        .into_par_iter()
        .map(|seed| {
            let evolution = qgf_core::EvolutionConfig {
                seed,
                ..config.evolution.clone()
            };
            match config.method {
                Method::Qgf => run_qgf_evolution_with(&spec, &h, &ground, &evolution, &init),
                Method::Baseline => run_baseline_vqe_with(&spec, &h, &ground, &evolution, &init),
            }
        })
        .collect::<qgf_core::Result<Vec<_>>>()?;
    let outliers = filter_outliers(&records, &config.outlier_rule)?;
    let kept: BTreeSet<u64> = outliers.retained_seeds.iter().copied().collect();
    let retained: Vec<&TrajectoryRecord> =
        records.iter().filter(|r| kept.contains(&r.seed)).collect();
    let curve = aggregate(&retained)?;
    let iteration_curve = aggregate_by_iteration(&retained);
    Ok(ExperimentOutcome {
        config: config.clone(),
        ground_energy: ground.energy,
        ground_degeneracy: ground.degeneracy(),
        records,
        outliers,
        curve,
        iteration_curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use qgf_core::StepRecord;

    fn record(seed: u64, energies: &[f64]) -> TrajectoryRecord {
        TrajectoryRecord {
            seed,
            steps: energies
                .iter()
                .enumerate()
                .map(|(k, &e)| StepRecord {
                    step: k,
                    tau: k as f64 * 0.1,
                    theta: vec![],
                    energy: e,
                    fidelity: 1.0 / (1.0 + e),
                    cost: None,
                    inner_iterations: 2 * (k > 0) as usize,
                    cumulative_iterations: 2 * k,
                    stalled: false,
                    fd_fallback: false,
                })
                .collect(),
        }
    }

    #[test]
    fn quantiles_interpolate_linearly() {
        let x = [1.0, 2.0, 4.0, 8.0];
        assert_eq!(quantile(&x, 0.0), 1.0);
        assert_eq!(quantile(&x, 1.0), 8.0);
        assert_eq!(quantile(&x, 0.5), 3.0);
        assert_eq!(quantile(&x, 0.25), 1.75);
    }

    #[test]
    fn identical_finals_reject_nothing() {
        let recs: Vec<_> = (0..10).map(|s| record(s, &[3.0, 2.0])).collect();
        let rep = filter_outliers(&recs, &OutlierRule::default()).unwrap();
        assert!(rep.rejected.is_empty());
        assert_eq!(rep.retained_seeds.len(), 10);
    }

    #[test]
    fn single_far_outlier_is_rejected_with_reason() {
        let mut recs: Vec<_> = (0..50)
            .map(|s| record(s, &[3.0, 2.0 + s as f64 * 1e-3]))
            .collect();
        let finals: Vec<f64> = {
            let mut f: Vec<f64> = recs.iter().map(|r| r.last().energy).collect();
            f.sort_by(f64::total_cmp);
            f
        };
        let iqr = quantile(&finals, 0.75) - quantile(&finals, 0.25);
        let outlier = quantile(&finals, 0.5) + 10.0 * iqr;
        recs[17] = record(17, &[3.0, outlier]);
        let rep = filter_outliers(&recs, &OutlierRule::default()).unwrap();
        assert_eq!(rep.rejected.len(), 1);
        assert_eq!(rep.rejected[0].seed, 17);
        assert!(rep.rejected[0].reason.contains("exceeds"));
        assert!(!rep.retains(17));
    }

    #[test]
    fn disabled_rule_keeps_everything_but_non_finite() {
        let recs = vec![record(0, &[1.0]), record(1, &[1e9]), record(2, &[f64::NAN])];
        let rule = OutlierRule {
            enabled: false,
            ..Default::default()
        };
        let rep = filter_outliers(&recs, &rule).unwrap();
        assert_eq!(rep.retained_seeds, vec![0, 1]);
        assert_eq!(rep.threshold, None);
    }

    #[test]
    fn rejecting_every_seed_is_an_aggregation_error() {
        let recs = vec![record(0, &[f64::NAN]), record(1, &[f64::INFINITY])];
        let err = filter_outliers(&recs, &OutlierRule::default()).unwrap_err();
        assert_eq!(err.category(), "aggregation");
        assert!(err.to_string().contains("seed 1"));
    }

    #[test]
    fn aggregate_uses_sample_standard_deviation() {
        let a = record(0, &[1.0, 2.0]);
        let b = record(1, &[3.0, 2.0]);
        let curve = aggregate(&[&a, &b]).unwrap();
        assert_eq!(curve.len(), 2);
        assert_eq!(curve[0].energy_mean, 2.0);
        assert!((curve[0].energy_std - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(curve[1].energy_std, 0.0);
        assert_eq!(curve[1].retained_n, 2);
        assert_eq!(aggregate(&[&a]).unwrap()[0].energy_std, 0.0);
    }

    #[test]
    fn ragged_records_cannot_be_aggregated() {
        let a = record(0, &[1.0, 2.0]);
        let b = record(1, &[3.0]);
        assert!(aggregate(&[&a, &b]).is_err());
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn iteration_curve_spans_the_budget() {
        let a = record(0, &[1.0, 0.5, 0.25]);
        let curve = aggregate_by_iteration(&[&a]);
        assert_eq!(curve.len(), 5);
        assert_eq!(curve[0].fidelity_mean, 0.5);
        assert_eq!(curve[1].fidelity_mean, 1.0 / 1.5);
        assert_eq!(curve[4].fidelity_mean, 1.0 / 1.25);
    }
}
