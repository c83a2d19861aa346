use thiserror::Error;

/// Errors raised by the simulation and optimization routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QgfError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state has zero norm and cannot be normalized")]
    DegenerateState,

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{n_qubits} qubits exceeds the dense limit of {limit}")]
    SizeLimit { n_qubits: usize, limit: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid probability {0}; expected a value in [0, 1]")]
    InvalidProbability(f64),

    #[error("unknown initial state kind '{0}'")]
    UnknownInitialState(String),

    #[error("expectation value has imaginary residue {0}")]
    ImaginaryResidue(f64),

    #[error("filter annihilated the state at tau = {tau}")]
    DegenerateFilter { tau: f64 },

    #[error("step size {dtau} violates dtau * lambda_max^2 < 1 (bound {bound})")]
    StepSize { dtau: f64, bound: f64 },

    #[error("parameter update is ill-posed: A vanishes while C = {c_norm}")]
    IllPosedUpdate { c_norm: f64 },
}

pub type Result<T, E = QgfError> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(QgfError::DimensionMismatch { expected, found })
    }
}
