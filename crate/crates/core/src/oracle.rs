//! Exact diagonalization and the reference imaginary-time filters.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{check_dim, QgfError, Result};
use crate::hamiltonian::{as_dense_matrix, PauliSumHamiltonian};
use crate::state::{dot, DensityMatrix, StateVector, ZERO};
use crate::tol;

/// Eigenpairs of a Hermitian Hamiltonian, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    n_qubits: usize,
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<Vec<Complex64>>,
}

pub fn diagonalize(h: &PauliSumHamiltonian) -> Result<Spectrum> {
    let m = as_dense_matrix(h)?;
    Ok(Spectrum::from_matrix(h.n_qubits(), m))
}

impl Spectrum {
    fn from_matrix(n_qubits: usize, m: DMatrix<Complex64>) -> Self {
        let eig = SymmetricEigen::new(m);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = order.iter().map(|&j| eig.eigenvalues[j]).collect();
        let eigenvectors = order
            .iter()
            .map(|&j| eig.eigenvectors.column(j).iter().copied().collect())
            .collect();
        Self {
            n_qubits,
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, j: usize) -> Result<StateVector> {
        let v = self.eigenvectors.get(j).ok_or(QgfError::IndexOutOfRange {
            index: j,
            len: self.eigenvalues.len(),
        })?;
        StateVector::new(self.n_qubits, v.clone())
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    /// `max_j |lambda_j|`.
    pub fn spectral_radius(&self) -> f64 {
        self.ground_energy().abs().max(self.max_eigenvalue().abs())
    }

    /// Smallest gap above the ground level that exceeds the degeneracy tolerance.
    pub fn gap(&self) -> Option<f64> {
        let e0 = self.ground_energy();
        self.eigenvalues
            .iter()
            .find(|&&e| e - e0 > tol::DEGENERACY)
            .map(|e| e - e0)
    }

    /// Coefficients `<lambda_j|psi>`.
    pub fn decompose(&self, psi: &StateVector) -> Result<Vec<Complex64>> {
        check_dim(self.n_qubits, psi.n_qubits())?;
        Ok(self
            .eigenvectors
            .iter()
            .map(|v| dot(v, psi.amplitudes()))
            .collect())
    }

    fn recompose(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let d = 1usize << self.n_qubits;
        let mut out = vec![ZERO; d];
        for (c, v) in coeffs.iter().zip(&self.eigenvectors) {
            if *c != ZERO {
                for (o, a) in out.iter_mut().zip(v) {
                    *o += c * a;
                }
            }
        }
        out
    }

    /// Ground level and an orthonormal basis of its eigenspace.
    pub fn ground_truth(&self) -> GroundTruth {
        let e0 = self.ground_energy();
        let basis = self
            .eigenvalues
            .iter()
            .zip(&self.eigenvectors)
            .take_while(|(e, _)| **e - e0 <= tol::DEGENERACY)
            .map(|(_, v)| StateVector::new(self.n_qubits, v.clone()).expect("dimension"))
            .collect();
        GroundTruth { energy: e0, basis }
    }
}

/// Reference for fidelity: the (possibly degenerate) ground eigenspace.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub energy: f64,
    pub basis: Vec<StateVector>,
}

impl GroundTruth {
    pub fn from_hamiltonian(h: &PauliSumHamiltonian) -> Result<Self> {
        Ok(diagonalize(h)?.ground_truth())
    }

    pub fn degeneracy(&self) -> usize {
        self.basis.len()
    }

    /// Squared norm of the projection of `psi` onto the ground space.
    pub fn fidelity(&self, psi: &StateVector) -> Result<f64> {
        check_dim(self.basis[0].n_qubits(), psi.n_qubits())?;
        Ok(self
            .basis
            .iter()
            .map(|g| dot(g.amplitudes(), psi.amplitudes()).norm_sqr())
            .sum())
    }

    /// `Tr(P_0 rho)` for the ground-space projector `P_0`.
    pub fn fidelity_mixed(&self, rho: &DensityMatrix) -> Result<f64> {
        check_dim(self.basis[0].n_qubits(), rho.n_qubits())?;
        Ok(self
            .basis
            .iter()
            .map(|g| rho.sandwich(g.amplitudes()).re)
            .sum())
    }
}

/// `exp(-tau H^2) psi0` normalized, evaluated in the eigenbasis.
pub fn exact_filter_state(
    spectrum: &Spectrum,
    psi0: &StateVector,
    tau: f64,
) -> Result<StateVector> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(QgfError::InvalidParameter(format!(
            "tau must be finite and >= 0, got {tau}"
        )));
    }
    let coeffs = spectrum.decompose(psi0)?;
    let offset = spectrum
        .eigenvalues
        .iter()
        .zip(&coeffs)
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(e, _)| e * e)
        .fold(f64::INFINITY, f64::min);
    if !offset.is_finite() {
        return Err(QgfError::DegenerateState);
    }
    let filtered: Vec<Complex64> = spectrum
        .eigenvalues
        .iter()
        .zip(&coeffs)
        .map(|(e, c)| c * (-(e * e - offset) * tau).exp())
        .collect();
    let out = StateVector::new(spectrum.n_qubits, spectrum.recompose(&filtered))?;
    normalize_filtered(out, tau)
}

/// `(1 - dtau H^2) psi` normalized. Requires `dtau * max|lambda|^2 < 1`.
pub fn exact_linearized_step(
    spectrum: &Spectrum,
    psi: &StateVector,
    dtau: f64,
) -> Result<StateVector> {
    let r = spectrum.spectral_radius();
    let bound = 1.0 / (r * r);
    if !(dtau > 0.0 && dtau < bound) {
        return Err(QgfError::StepSize { dtau, bound });
    }
    let coeffs = spectrum.decompose(psi)?;
    let stepped: Vec<Complex64> = spectrum
        .eigenvalues
        .iter()
        .zip(&coeffs)
        .map(|(e, c)| c * (1.0 - dtau * e * e))
        .collect();
    let out = StateVector::new(spectrum.n_qubits, spectrum.recompose(&stepped))?;
    normalize_filtered(out, dtau)
}

fn normalize_filtered(mut v: StateVector, tau: f64) -> Result<StateVector> {
    let norm = v.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(QgfError::DegenerateFilter { tau });
    }
    v.scale(Complex64::new(1.0 / norm, 0.0));
    Ok(v)
}
