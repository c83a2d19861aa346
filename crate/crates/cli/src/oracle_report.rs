//! Exact spectrum summary printed by the `oracle` subcommand.

use qgf_core::{build_tfim, diagonalize, prepare_initial, InitialStateKind, TfimParameters};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::presets::PHASES;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub model: TfimParameters,
    pub ground_energy: f64,
    pub ground_degeneracy: usize,
    pub gap: Option<f64>,
    pub max_eigenvalue: f64,
    /// Ground-subspace fidelity of each named initial state.
    pub initial_fidelities: Vec<(InitialStateKind, f64)>,
    pub eigenvalues: Vec<f64>,
}

pub fn oracle_report(model: &TfimParameters) -> Result<OracleReport> {
    let h = build_tfim(model)?;
    let spectrum = diagonalize(&h)?;
    let ground = spectrum.ground_truth();
    let initial_fidelities = PHASES
        .into_iter()
        .map(|k| Ok((k, ground.fidelity(&prepare_initial(k, model.n_qubits)?)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(OracleReport {
        model: *model,
        ground_energy: spectrum.ground_energy(),
        ground_degeneracy: ground.degeneracy(),
        gap: spectrum.gap(),
        max_eigenvalue: spectrum.max_eigenvalue(),
        initial_fidelities,
        eigenvalues: spectrum.eigenvalues().to_vec(),
    })
}
