//! Multi-step drivers for the filtered evolution and the plain-VQE baseline.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::ansatz::{
    noisy_energy_gradient, overlap_gradient, prepare_state, prepare_state_noisy_with, AnsatzSpec,
    NoiseRealization,
};
use crate::engine::cost::StepObjective;
use crate::engine::mclachlan::mclachlan_update_signed;
use crate::engine::optimizer::{minimize, AdamParams, InnerOutcome, InnerSettings, OptimizerKind};
use crate::error::{check_dim, QgfError, Result};
use crate::hamiltonian::{expectation, expectation_mixed, PauliSumHamiltonian};
use crate::noise::{check_probability, NoiseMode, NoiseModel};
use crate::oracle::GroundTruth;

const INIT_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionConfig {
    pub dtau: f64,
    pub n_steps: usize,
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    pub max_inner_iterations: usize,
    pub stall_tolerance: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub mclachlan_regularization: f64,
    /// `+1` integrates `A theta_dot = C` as written, `-1` reverses the flow.
    pub mclachlan_sign: f64,
    pub noise_p: f64,
    pub noise_mode: NoiseMode,
    pub n_trajectories: usize,
    pub seed: u64,
    /// Budget of inner iterations summed over all steps.
    pub total_iteration_cap: Option<usize>,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        let adam = AdamParams::default();
        Self {
            dtau: 0.005,
            n_steps: 30,
            optimizer: OptimizerKind::GradientDescent,
            learning_rate: 0.1,
            max_inner_iterations: 10,
            stall_tolerance: 1e-9,
            adam_beta1: adam.beta1,
            adam_beta2: adam.beta2,
            adam_epsilon: adam.epsilon,
            mclachlan_regularization: 1e-6,
            mclachlan_sign: 1.0,
            noise_p: 0.0,
            noise_mode: NoiseMode::PerQubit,
            n_trajectories: 32,
            seed: 0,
            total_iteration_cap: None,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(QgfError::InvalidParameter(msg));
        if !(self.dtau > 0.0 && self.dtau.is_finite()) {
            return bad(format!("dtau must be positive, got {}", self.dtau));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad(format!(
                "learning_rate must be >= 0, got {}",
                self.learning_rate
            ));
        }
        if self.max_inner_iterations == 0 {
            return bad("max_inner_iterations must be positive".into());
        }
        if self.stall_tolerance.is_nan() || self.stall_tolerance < 0.0 {
            return bad(format!(
                "stall_tolerance must be >= 0, got {}",
                self.stall_tolerance
            ));
        }
        for (name, b) in [
            ("adam_beta1", self.adam_beta1),
            ("adam_beta2", self.adam_beta2),
        ] {
            if !(0.0..1.0).contains(&b) {
                return bad(format!("{name} must lie in [0, 1), got {b}"));
            }
        }
        if self.adam_epsilon.is_nan() || self.adam_epsilon <= 0.0 {
            return bad(format!(
                "adam_epsilon must be positive, got {}",
                self.adam_epsilon
            ));
        }
        if self.mclachlan_regularization.is_nan() || self.mclachlan_regularization < 0.0 {
            return bad(format!(
                "mclachlan_regularization must be >= 0, got {}",
                self.mclachlan_regularization
            ));
        }
        if self.mclachlan_sign != 1.0 && self.mclachlan_sign != -1.0 {
            return bad(format!(
                "mclachlan_sign must be 1 or -1, got {}",
                self.mclachlan_sign
            ));
        }
        check_probability(self.noise_p)?;
        if self.n_trajectories == 0 {
            return bad("n_trajectories must be positive".into());
        }
        if self.total_iteration_cap == Some(0) {
            return bad("total_iteration_cap must be positive when set".into());
        }
        Ok(())
    }

    /// Total imaginary time `n_steps * dtau`.
    pub fn tau_total(&self) -> f64 {
        self.n_steps as f64 * self.dtau
    }

    pub fn noise(&self) -> NoiseModel {
        NoiseModel {
            p: self.noise_p,
            mode: self.noise_mode,
        }
    }

    fn inner_settings(&self, max_iterations: usize) -> InnerSettings {
        InnerSettings {
            kind: self.optimizer,
            learning_rate: self.learning_rate,
            max_iterations,
            stall_tolerance: self.stall_tolerance,
            adam: AdamParams {
                beta1: self.adam_beta1,
                beta2: self.adam_beta2,
                epsilon: self.adam_epsilon,
            },
        }
    }
}

/// How `theta^(0)` is drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParameterInit {
    /// Independent uniform draws on `[-pi, pi)`.
    RandomUniform,
    /// Zero plus independent Gaussian noise of standard deviation `scale`.
    ZerosPerturbed {
        scale: f64,
    },
    Explicit(Vec<f64>),
}

/// Draws initial angles from the dedicated stream of `seed`.
pub fn initial_parameters(init: &ParameterInit, n_params: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(INIT_STREAM);
    use std::f64::consts::PI;
    match init {
        ParameterInit::RandomUniform => {
            Ok((0..n_params).map(|_| rng.random_range(-PI..PI)).collect())
        }
        ParameterInit::ZerosPerturbed { scale } => {
            let normal = Normal::new(0.0, *scale).map_err(|e| {
                QgfError::InvalidParameter(format!("perturbation scale {scale}: {e}"))
            })?;
            Ok((0..n_params).map(|_| normal.sample(&mut rng)).collect())
        }
        ParameterInit::Explicit(theta) => {
            check_dim(n_params, theta.len())?;
            Ok(theta.clone())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub tau: f64,
    pub theta: Vec<f64>,
    pub energy: f64,
    pub fidelity: f64,
    /// Objective value at the accepted parameters; absent for the initial point.
    pub cost: Option<f64>,
    pub inner_iterations: usize,
    /// Inner iterations summed over this and all earlier steps.
    pub cumulative_iterations: usize,
    pub stalled: bool,
    /// The overlap modulus vanished and finite differences were used.
    pub fd_fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub steps: Vec<StepRecord>,
}

impl TrajectoryRecord {
    pub fn initial(&self) -> &StepRecord {
        &self.steps[0]
    }

    pub fn last(&self) -> &StepRecord {
        self.steps.last().expect("record holds the initial point")
    }

    /// Fidelity after the first step whose cumulative iteration count
    /// reaches `iterations`; the last point if the run used fewer.
    pub fn fidelity_at_iteration(&self, iterations: usize) -> f64 {
        self.steps
            .iter()
            .find(|s| s.cumulative_iterations >= iterations)
            .unwrap_or_else(|| self.last())
            .fidelity
    }
}

/// Bookkeeping attached to one logged point.
#[derive(Debug, Clone, Copy, Default)]
struct Progress {
    cost: Option<f64>,
    inner: usize,
    cumulative: usize,
    stalled: bool,
    fd_fallback: bool,
}

/// Exact energy and ground-space fidelity of the (possibly noisy) circuit.
struct Reporter<'a> {
    spec: &'a AnsatzSpec,
    h: &'a PauliSumHamiltonian,
    ground: &'a GroundTruth,
    noise: NoiseModel,
    dtau: f64,
}

impl Reporter<'_> {
    fn measure(&self, theta: &[f64]) -> Result<(f64, f64)> {
        if self.noise.is_noiseless() {
            let psi = prepare_state(self.spec, theta)?;
            Ok((expectation(self.h, &psi)?, self.ground.fidelity(&psi)?))
        } else {
            let rho = prepare_state_noisy_with(self.spec, theta, self.noise)?;
            Ok((
                expectation_mixed(self.h, &rho)?,
                self.ground.fidelity_mixed(&rho)?,
            ))
        }
    }

    fn record(&self, step: usize, theta: &[f64], p: Progress) -> Result<StepRecord> {
        let (energy, fidelity) = self.measure(theta)?;
        Ok(StepRecord {
            step,
            tau: step as f64 * self.dtau,
            theta: theta.to_vec(),
            energy,
            fidelity,
            cost: p.cost,
            inner_iterations: p.inner,
            cumulative_iterations: p.cumulative,
            stalled: p.stalled,
            fd_fallback: p.fd_fallback,
        })
    }
}

/// One noiseless inner optimization warm-started at `theta_curr`.
pub fn optimize_step(
    spec: &AnsatzSpec,
    h: &PauliSumHamiltonian,
    theta_curr: &[f64],
    config: &EvolutionConfig,
) -> Result<InnerOutcome> {
    config.validate()?;
    let mut objective = StepObjective::noiseless(spec, h, theta_curr, config.dtau)?;
    minimize(
        &mut objective,
        theta_curr,
        &config.inner_settings(config.max_inner_iterations),
    )
}

/// Runs `n_steps` filter steps, diagonalizing `h` for the fidelity reference.
pub fn run_qgf_evolution(
    spec: &AnsatzSpec,
    h: &PauliSumHamiltonian,
    config: &EvolutionConfig,
    init: &ParameterInit,
) -> Result<TrajectoryRecord> {
    let ground = GroundTruth::from_hamiltonian(h)?;
    run_qgf_evolution_with(spec, h, &ground, config, init)
}

pub fn run_qgf_evolution_with(
    spec: &AnsatzSpec,
    h: &PauliSumHamiltonian,
    ground: &GroundTruth,
    config: &EvolutionConfig,
    init: &ParameterInit,
) -> Result<TrajectoryRecord> {
    config.validate()?;
    check_dim(spec.n_qubits(), h.n_qubits())?;
    let noise = config.noise();
    let reporter = Reporter {
        spec,
        h,
        ground,
        noise,
        dtau: config.dtau,
    };
    let mut theta = initial_parameters(init, spec.n_params(), config.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(NOISE_STREAM);

    let mut steps = Vec::with_capacity(config.n_steps + 1);
    steps.push(reporter.record(0, &theta, Progress::default())?);
    let mut used = 0usize;
    for step in 1..=config.n_steps {
        let budget = config
            .total_iteration_cap
            .map_or(config.max_inner_iterations, |cap| {
                config.max_inner_iterations.min(cap.saturating_sub(used))
            });
        if budget == 0 {
            let frozen = Progress {
                cumulative: used,
                stalled: true,
                ..Default::default()
            };
            steps.push(reporter.record(step, &theta, frozen)?);
            continue;
        }
        let (next, progress) = match config.optimizer {
            OptimizerKind::Mclachlan => {
                let next = mclachlan_update_signed(
                    spec,
                    h,
                    &theta,
                    config.dtau,
                    config.mclachlan_regularization,
                    config.mclachlan_sign,
                )?;
                let cost = StepObjective::noiseless(spec, h, &theta, config.dtau)?.cost(&next)?;
                let progress = Progress {
                    cost: Some(cost),
                    inner: 1,
                    ..Default::default()
                };
                (next, progress)
            }
            _ => {
                let mut objective = StepObjective::sampled(
                    spec,
                    h,
                    &theta,
                    config.dtau,
                    noise,
                    config.n_trajectories,
                    &mut rng,
                )?;
                let out = minimize(&mut objective, &theta, &config.inner_settings(budget))?;
                let progress = Progress {
                    cost: Some(out.value),
                    inner: out.iterations,
                    stalled: out.stalled,
                    fd_fallback: objective.fd_fallbacks() > 0,
                    ..Default::default()
                };
                (out.theta, progress)
            }
        };
        theta = next;
        used += progress.inner;
        let progress = Progress {
            cumulative: used,
            ..progress
        };
        steps.push(reporter.record(step, &theta, progress)?);
    }
    Ok(TrajectoryRecord {
        seed: config.seed,
        steps,
    })
}

/// `<psi|H|psi>` and its gradient `2 Re <d_k psi|H|psi>` for the noiseless circuit.
pub fn energy_gradient(
    spec: &AnsatzSpec,
    h: &PauliSumHamiltonian,
    theta: &[f64],
) -> Result<(f64, Vec<f64>)> {
    check_dim(spec.n_qubits(), h.n_qubits())?;
    let psi = prepare_state(spec, theta)?;
    let h_psi = h.apply_vec(psi.amplitudes());
    let (z, dz) = overlap_gradient(spec, theta, &NoiseRealization::noiseless(spec), &h_psi)?;
    Ok((z.re, dz.iter().map(|d| 2.0 * d.re).collect()))
}

/// Plain gradient descent on the energy, one record per iteration. Under
/// noise the energy and its gradient come from the exact density matrix.
pub fn run_baseline_vqe(
    spec: &AnsatzSpec,
    h: &PauliSumHamiltonian,
    config: &EvolutionConfig,
    init: &ParameterInit,
) -> Result<TrajectoryRecord> {
    let ground = GroundTruth::from_hamiltonian(h)?;
    run_baseline_vqe_with(spec, h, &ground, config, init)
}

pub fn run_baseline_vqe_with(
    spec: &AnsatzSpec,
    h: &PauliSumHamiltonian,
    ground: &GroundTruth,
    config: &EvolutionConfig,
    init: &ParameterInit,
) -> Result<TrajectoryRecord> {
    config.validate()?;
    check_dim(spec.n_qubits(), h.n_qubits())?;
    let noise = config.noise();
    let reporter = Reporter {
        spec,
        h,
        ground,
        noise,
        dtau: config.dtau,
    };
    let mut theta = initial_parameters(init, spec.n_params(), config.seed)?;
    let iterations = config
        .total_iteration_cap
        .map_or(config.n_steps, |cap| cap.min(config.n_steps));
    let mut steps = Vec::with_capacity(config.n_steps + 1);
    steps.push(reporter.record(0, &theta, Progress::default())?);
    for step in 1..=config.n_steps {
        if step > iterations {
            let frozen = Progress {
                cumulative: iterations,
                stalled: true,
                ..Default::default()
            };
            steps.push(reporter.record(step, &theta, frozen)?);
            continue;
        }
        let (_, grad) = if noise.is_noiseless() {
            energy_gradient(spec, h, &theta)?
        } else {
            noisy_energy_gradient(spec, h, &theta, noise)?
        };
        theta
            .iter_mut()
            .zip(&grad)
            .for_each(|(t, g)| *t -= config.learning_rate * g);
        let progress = Progress {
            inner: 1,
            cumulative: step,
            ..Default::default()
        };
        let mut rec = reporter.record(step, &theta, progress)?;
        rec.cost = Some(rec.energy);
        steps.push(rec);
    }
    Ok(TrajectoryRecord {
        seed: config.seed,
        steps,
    })
}
