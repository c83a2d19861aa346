//! Batches reproducing the three published experiment families.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use qgf_core::{EvolutionConfig, InitialStateKind, NoiseMode, OptimizerKind, TfimParameters};

use crate::config::{ExperimentConfig, InitMode, Method, OutlierRule};
use crate::error::CliError;

pub const PHASES: [InitialStateKind; 2] = [
    InitialStateKind::Ferromagnetic,
    InitialStateKind::Paramagnetic,
];

/// Coupling and field of each phase.
pub fn phase_couplings(phase: InitialStateKind) -> (f64, f64) {
    match phase {
        InitialStateKind::Ferromagnetic => (1.0, 0.5),
        InitialStateKind::Paramagnetic => (0.5, 1.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Convergence at N = 4 and 6 in both phases.
    Fig2,
    /// Shift sweep under the McLachlan update.
    Fig3,
    /// Noisy comparison against plain VQE.
    Fig4,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Fig2, Preset::Fig3, Preset::Fig4];

    pub fn name(self) -> &'static str {
        match self {
            Self::Fig2 => "fig2",
            Self::Fig3 => "fig3",
            Self::Fig4 => "fig4",
        }
    }

    /// The batches of this preset, writing under `out/<preset>/`.
    pub fn configs(self, out: &Path) -> Vec<ExperimentConfig> {
        let output_dir = out.join(self.name());
        let mut configs = match self {
            Self::Fig2 => fig2(),
            Self::Fig3 => fig3(),
            Self::Fig4 => fig4(),
        };
        for c in &mut configs {
            c.output_dir = output_dir.clone();
        }
        configs
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                CliError::Config(format!("unknown preset '{s}'; expected fig2, fig3 or fig4"))
            })
    }
}

const UNFILTERED: OutlierRule = OutlierRule {
    enabled: false,
    iqr_factor: 3.0,
};

fn fig2() -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for n in [4, 6] {
        for phase in PHASES {
            let (j, g) = phase_couplings(phase);
            out.push(ExperimentConfig {
                name: format!("fig2_n{n}_{}", phase.name()),
                model: TfimParameters::new(n, j, g, 8.5),
                phase,
                n_seeds: 50,
                outlier_rule: UNFILTERED,
                evolution: EvolutionConfig {
                    dtau: 0.005,
                    n_steps: 30,
                    optimizer: OptimizerKind::Bfgs,
                    max_inner_iterations: 10,
                    ..Default::default()
                },
                ..Default::default()
            });
        }
    }
    out
}

fn fig3() -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for shift in [4.5, 5.5, 6.5] {
        for phase in PHASES {
            let (j, g) = phase_couplings(phase);
            out.push(ExperimentConfig {
                name: format!("fig3_shift{shift}_{}", phase.name()),
                model: TfimParameters::new(4, j, g, shift),
                phase,
                n_seeds: 50,
                outlier_rule: UNFILTERED,
                evolution: EvolutionConfig {
                    dtau: 0.002,
                    n_steps: 75,
                    optimizer: OptimizerKind::Mclachlan,
                    ..Default::default()
                },
                ..Default::default()
            });
        }
    }
    out
}

fn fig4() -> Vec<ExperimentConfig> {
    let phase = InitialStateKind::Paramagnetic;
    let (j, g) = phase_couplings(phase);
    let base = ExperimentConfig {
        model: TfimParameters::new(4, j, g, 11.0),
        phase,
        swap_initial_states: true,
        n_seeds: 100,
        init_mode: InitMode::ZerosPerturbed,
        perturbation_scale: 1e-5,
        ..Default::default()
    };
    let noisy = EvolutionConfig {
        dtau: 0.005,
        n_steps: 500,
        noise_p: 1e-4,
        noise_mode: NoiseMode::PerQubit,
        n_trajectories: 32,
        ..Default::default()
    };
    vec![
        ExperimentConfig {
            name: "fig4_qgf".into(),
            method: Method::Qgf,
            evolution: EvolutionConfig {
                optimizer: OptimizerKind::Bfgs,
                max_inner_iterations: 10,
                total_iteration_cap: Some(500),
                ..noisy.clone()
            },
            ..base.clone()
        },
        ExperimentConfig {
            name: "fig4_baseline".into(),
            method: Method::Baseline,
            evolution: EvolutionConfig {
                optimizer: OptimizerKind::GradientDescent,
                learning_rate: 0.01,
                ..noisy
            },
            ..base
        },
    ]
}
