//! The per-step cost `-|<psi(theta')|(1 - dtau H^2)|psi(theta)>|`.

use num_complex::Complex64;
use rand::Rng;

use crate::ansatz::{overlap_gradient, prepare_state_with, AnsatzSpec, NoiseRealization};
use crate::engine::optimizer::Objective;
use crate::error::{check_dim, QgfError, Result};
use crate::hamiltonian::PauliSumHamiltonian;
use crate::noise::NoiseModel;
use crate::state::{dot, ZERO};

/// Below this modulus the cost is treated as non-differentiable.
pub const MODULUS_FLOOR: f64 = 1e-14;
const FD_STEP: f64 = 1e-5;

/// Cost of one imaginary-time step with the target side frozen at `theta_curr`.
///
/// Under noise each side of the overlap is averaged over a fixed set of
/// sampled error realizations, drawn once at construction, so repeated
/// evaluations inside one step see the same objective.
#[derive(Debug, Clone)]
pub struct StepObjective<'a> {
    spec: &'a AnsatzSpec,
    targets: Vec<Vec<Complex64>>,
    bra_noise: Vec<NoiseRealization>,
    fd_fallbacks: usize,
}

impl<'a> StepObjective<'a> {
    pub fn noiseless(
        spec: &'a AnsatzSpec,
        h: &PauliSumHamiltonian,
        theta_curr: &[f64],
        dtau: f64,
    ) -> Result<Self> {
        let clean = NoiseRealization::noiseless(spec);
        Self::build(spec, h, theta_curr, dtau, vec![clean.clone()], vec![clean])
    }

    /// Samples `n_trajectories` realizations for each side of the overlap.
    pub fn sampled<R: Rng + ?Sized>(
        spec: &'a AnsatzSpec,
        h: &PauliSumHamiltonian,
        theta_curr: &[f64],
        dtau: f64,
        model: NoiseModel,
        n_trajectories: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if model.is_noiseless() {
            return Self::noiseless(spec, h, theta_curr, dtau);
        }
        if n_trajectories == 0 {
            return Err(QgfError::InvalidParameter(
                "n_trajectories must be positive".into(),
            ));
        }
        let ket: Vec<_> = (0..n_trajectories)
            .map(|_| NoiseRealization::sample(spec, model, rng))
            .collect();
        let bra: Vec<_> = (0..n_trajectories)
            .map(|_| NoiseRealization::sample(spec, model, rng))
            .collect();
        Self::build(spec, h, theta_curr, dtau, ket, bra)
    }

    fn build(
        spec: &'a AnsatzSpec,
        h: &PauliSumHamiltonian,
        theta_curr: &[f64],
        dtau: f64,
        ket_noise: Vec<NoiseRealization>,
        bra_noise: Vec<NoiseRealization>,
    ) -> Result<Self> {
        check_dim(spec.n_qubits(), h.n_qubits())?;
        if !dtau.is_finite() || dtau < 0.0 {
            return Err(QgfError::InvalidParameter(format!(
                "dtau must be >= 0, got {dtau}"
            )));
        }
        let targets = ket_noise
            .iter()
            .map(|noise| {
                let psi = prepare_state_with(spec, theta_curr, noise)?.into_amplitudes();
                let h2 = h.apply_squared_vec(&psi);
                Ok(psi.iter().zip(&h2).map(|(p, q)| p - dtau * q).collect())
            })
            .collect::<Result<Vec<Vec<Complex64>>>>()?;
        Ok(Self {
            spec,
            targets,
            bra_noise,
            fd_fallbacks: 0,
        })
    }

    /// Trajectory-averaged complex overlap `z(theta')`.
    pub fn overlap(&self, theta: &[f64]) -> Result<Complex64> {
        let mut z = ZERO;
        for (noise, chi) in self.bra_noise.iter().zip(&self.targets) {
            let psi = prepare_state_with(self.spec, theta, noise)?;
            z += dot(psi.amplitudes(), chi);
        }
        Ok(z / self.targets.len() as f64)
    }

    pub fn cost(&self, theta: &[f64]) -> Result<f64> {
        Ok(-self.overlap(theta)?.norm())
    }

    /// Cost and analytic gradient; falls back to central differences when
    /// the overlap modulus vanishes.
    pub fn cost_gradient(&mut self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        let n = self.spec.n_params();
        let mut z = ZERO;
        let mut dz = vec![ZERO; n];
        for (noise, chi) in self.bra_noise.iter().zip(&self.targets) {
            let (zs, dzs) = overlap_gradient(self.spec, theta, noise, chi)?;
            z += zs;
            dz.iter_mut().zip(&dzs).for_each(|(a, b)| *a += b);
        }
        let scale = 1.0 / self.targets.len() as f64;
        z *= scale;
        let modulus = z.norm();
        if modulus < MODULUS_FLOOR {
            self.fd_fallbacks += 1;
            return Ok((-modulus, self.finite_difference(theta)?));
        }
        let grad = dz
            .iter()
            .map(|d| -(z.conj() * d * scale).re / modulus)
            .collect();
        Ok((-modulus, grad))
    }

    fn finite_difference(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let mut x = theta.to_vec();
        (0..theta.len())
            .map(|k| {
                x[k] = theta[k] + FD_STEP;
                let plus = self.cost(&x)?;
                x[k] = theta[k] - FD_STEP;
                let minus = self.cost(&x)?;
                x[k] = theta[k];
                Ok((plus - minus) / (2.0 * FD_STEP))
            })
            .collect()
    }

    /// Number of gradient evaluations that used the finite-difference path.
    pub fn fd_fallbacks(&self) -> usize {
        self.fd_fallbacks
    }
}

impl Objective for StepObjective<'_> {
    fn dim(&self) -> usize {
        self.spec.n_params()
    }

    fn value(&mut self, x: &[f64]) -> Result<f64> {
        self.cost(x)
    }

    fn value_and_gradient(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.cost_gradient(x)
    }
}

/// Noiseless step cost for trial parameters `theta_next`.
pub fn step_cost(
    spec: &AnsatzSpec,
    h: &PauliSumHamiltonian,
    theta_next: &[f64],
    theta_curr: &[f64],
    dtau: f64,
) -> Result<f64> {
    StepObjective::noiseless(spec, h, theta_curr, dtau)?.cost(theta_next)
}

/// Gradient of [`step_cost`] with respect to `theta_next`.
pub fn step_cost_gradient(
    spec: &AnsatzSpec,
    h: &PauliSumHamiltonian,
    theta_next: &[f64],
    theta_curr: &[f64],
    dtau: f64,
) -> Result<Vec<f64>> {
    Ok(StepObjective::noiseless(spec, h, theta_curr, dtau)?
        .cost_gradient(theta_next)?
        .1)
}
