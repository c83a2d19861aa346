//! Variational quantum imaginary-time evolution under a Gaussian filter
//! `exp(-tau H^2)`, simulated exactly on small transverse-field Ising chains.

pub mod ansatz;
pub mod engine;
pub mod error;
pub mod hamiltonian;
pub mod noise;
pub mod oracle;
pub mod state;

/// Numerical tolerances shared across the crate.
pub mod tol {
    /// Identities that hold to rounding: normalization, Hermiticity, unitarity.
    pub const ALGEBRAIC: f64 = 1e-12;
    /// Results of an iterative eigensolver.
    pub const SPECTRAL: f64 = 1e-10;
    /// Eigenvalues closer than this are one level.
    pub const DEGENERACY: f64 = 1e-8;
}

pub use ansatz::{
    differential_state, prepare_initial, prepare_state, prepare_state_noisy, AnsatzSpec,
    InitialState, InitialStateKind,
};
pub use engine::{
    run_baseline_vqe, run_qgf_evolution, EvolutionConfig, OptimizerKind, ParameterInit, StepRecord,
    TrajectoryRecord,
};
pub use error::{QgfError, Result};
pub use hamiltonian::{build_tfim, expectation, PauliSumHamiltonian, TfimParameters};
pub use noise::{DepolarizingNoise, NoiseMode, NoiseModel};
pub use oracle::{diagonalize, exact_filter_state, exact_linearized_step, GroundTruth, Spectrum};
pub use state::{DensityMatrix, Pauli, PauliString, StateVector};
