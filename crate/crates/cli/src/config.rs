//! Experiment configuration as read from TOML or from an emitted manifest.

use std::path::{Path, PathBuf};

use qgf_core::{
    build_tfim, AnsatzSpec, EvolutionConfig, InitialStateKind, ParameterInit, PauliSumHamiltonian,
    TfimParameters,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::output::Manifest;

/// Which optimizer family drives the batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Filtered evolution, one cost minimization per step.
    #[default]
    Qgf,
    /// Plain energy gradient descent, one record per iteration.
    Baseline,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::Qgf => "qgf",
            Self::Baseline => "baseline",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Uniform on `[-pi, pi)` per component.
    #[default]
    RandomUniform,
    /// Zero plus Gaussian noise of standard deviation `perturbation_scale`.
    ZerosPerturbed,
}

/// Seeds whose final energy exceeds `median + iqr_factor * IQR` are dropped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutlierRule {
    pub enabled: bool,
    pub iqr_factor: f64,
}

impl Default for OutlierRule {
    fn default() -> Self {
        Self {
            enabled: true,
            iqr_factor: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Subdirectory of `output_dir` receiving this batch.
    pub name: String,
    pub model: TfimParameters,
    /// Selects the initial state; the coupling and field come from `model`.
    pub phase: InitialStateKind,
    pub layers: usize,
    pub method: Method,
    pub evolution: EvolutionConfig,
    pub n_seeds: usize,
    pub base_seed: u64,
    pub init_mode: InitMode,
    pub perturbation_scale: f64,
    pub outlier_rule: OutlierRule,
    pub output_dir: PathBuf,
    /// Start from the other phase's initial state.
    pub swap_initial_states: bool,
    /// Apply the noise channel after the preparation gates too.
    pub noisy_preparation: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            model: TfimParameters::new(4, 1.0, 0.5, 8.5),
            phase: InitialStateKind::Ferromagnetic,
            layers: 4,
            method: Method::Qgf,
            evolution: EvolutionConfig::default(),
            n_seeds: 50,
            base_seed: 0,
            init_mode: InitMode::RandomUniform,
            perturbation_scale: 1e-3,
            outlier_rule: OutlierRule::default(),
            output_dir: PathBuf::from("results"),
            swap_initial_states: false,
            noisy_preparation: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads a TOML config, or the config embedded in a `.json` manifest.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let parse = |message: String| CliError::Parse {
            path: path.to_path_buf(),
            message,
        };
        let config = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str::<Manifest>(&text)
                .map_err(|e| parse(e.to_string()))?
                .config
        } else {
            Self::from_toml_str(&text).map_err(|e| parse(e.to_string()))?
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.name.is_empty()
            || self.name == "."
            || self.name == ".."
            || self.name.contains(['/', '\\'])
        {
            return bad(format!(
                "name '{}' is not a plain directory name",
                self.name
            ));
        }
        if self.n_seeds == 0 {
            return bad("n_seeds must be at least 1".into());
        }
        if self
            .base_seed
            .checked_add(self.n_seeds as u64 - 1)
            .is_none()
        {
            return bad("base_seed + n_seeds overflows".into());
        }
        if !(self.perturbation_scale >= 0.0 && self.perturbation_scale.is_finite()) {
            return bad(format!(
                "perturbation_scale {} must be finite and >= 0",
                self.perturbation_scale
            ));
        }
        if !(self.outlier_rule.iqr_factor >= 0.0 && self.outlier_rule.iqr_factor.is_finite()) {
            return bad(format!(
                "outlier_rule.iqr_factor {} must be finite and >= 0",
                self.outlier_rule.iqr_factor
            ));
        }
        let config_err = |e: qgf_core::QgfError| CliError::Config(e.to_string());
        self.model.validate().map_err(config_err)?;
        self.evolution.validate().map_err(config_err)?;
        self.build().map_err(|e| match e {
            CliError::Simulation(e) => config_err(e),
            other => other,
        })?;
        Ok(())
    }

    pub fn initial_kind(&self) -> InitialStateKind {
        if self.swap_initial_states {
            self.phase.other()
        } else {
            self.phase
        }
    }

    pub fn parameter_init(&self) -> ParameterInit {
        match self.init_mode {
            InitMode::RandomUniform => ParameterInit::RandomUniform,
            InitMode::ZerosPerturbed => ParameterInit::ZerosPerturbed {
                scale: self.perturbation_scale,
            },
        }
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.n_seeds as u64)
            .map(|i| self.base_seed + i)
            .collect()
    }

    /// The ansatz and Hamiltonian described by this config.
    pub fn build(&self) -> Result<(AnsatzSpec, PauliSumHamiltonian)> {
        let h = build_tfim(&self.model)?;
        let mut spec = AnsatzSpec::for_tfim(&self.model, self.layers, self.initial_kind().into())?;
        spec.noisy_preparation = self.noisy_preparation;
        Ok((spec, h))
    }

    /// Directory the batch writes into.
    pub fn batch_dir(&self) -> PathBuf {
        self.output_dir.join(&self.name)
    }
}
