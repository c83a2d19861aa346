//! McLachlan parameter flow `A theta_dot = C` for the filter generator `-H^2`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::ansatz::{differential_states_with, prepare_state, AnsatzSpec, NoiseRealization};
use crate::error::{check_dim, QgfError, Result};
use crate::hamiltonian::PauliSumHamiltonian;
use crate::state::{dot, StateVector, ZERO};

/// Entries of `A` below this magnitude count as a vanishing matrix.
const NEGLIGIBLE: f64 = 1e-14;

fn derivatives(spec: &AnsatzSpec, theta: &[f64]) -> Result<Vec<StateVector>> {
    differential_states_with(spec, theta, &NoiseRealization::noiseless(spec))
}

fn gram(derivs: &[StateVector]) -> DMatrix<f64> {
    let n = derivs.len();
    let mut a = DMatrix::zeros(n, n);
    for j in 0..n {
        for k in j..n {
            let v = dot(derivs[j].amplitudes(), derivs[k].amplitudes()).re;
            a[(j, k)] = v;
            a[(k, j)] = v;
        }
    }
    a
}

/// `A_jk = Re <d_j psi | d_k psi>`.
pub fn mclachlan_a(spec: &AnsatzSpec, theta: &[f64]) -> Result<DMatrix<f64>> {
    Ok(gram(&derivatives(spec, theta)?))
}

fn c_from(derivs: &[StateVector], h2_psi: &[Complex64]) -> Vec<f64> {
    derivs
        .iter()
        .map(|d| -dot(d.amplitudes(), h2_psi).re)
        .collect()
}

/// `C_j = -Re <d_j psi| H^2 |psi>`, with `H^2 psi` from two applications of `H`.
pub fn mclachlan_c(spec: &AnsatzSpec, h: &PauliSumHamiltonian, theta: &[f64]) -> Result<Vec<f64>> {
    check_dim(spec.n_qubits(), h.n_qubits())?;
    let psi = prepare_state(spec, theta)?;
    let h2 = h.apply_squared_vec(psi.amplitudes());
    Ok(c_from(&derivatives(spec, theta)?, &h2))
}

/// `C_j = -Re sum_{l,m} c_l c_m <d_j psi| h_l h_m |psi>`, one term pair at a time.
pub fn mclachlan_c_expanded(
    spec: &AnsatzSpec,
    h: &PauliSumHamiltonian,
    theta: &[f64],
) -> Result<Vec<f64>> {
    check_dim(spec.n_qubits(), h.n_qubits())?;
    let psi = prepare_state(spec, theta)?;
    let derivs = derivatives(spec, theta)?;
    let masks = h.masks();
    let d = psi.dim();
    let mut c = vec![0.0; derivs.len()];
    let mut once = vec![ZERO; d];
    let mut twice = vec![ZERO; d];
    for (ml, cl) in &masks {
        for (mm, cm) in &masks {
            mm.apply_into(Complex64::new(1.0, 0.0), psi.amplitudes(), &mut once);
            ml.apply_into(Complex64::new(cl * cm, 0.0), &once, &mut twice);
            for (cj, dj) in c.iter_mut().zip(&derivs) {
                *cj -= dot(dj.amplitudes(), &twice).re;
            }
        }
    }
    Ok(c)
}

/// Solves `(A + reg I) theta_dot = C` by SVD least squares.
pub fn solve_flow(a: &DMatrix<f64>, c: &[f64], regularization: f64) -> Result<Vec<f64>> {
    let n = a.nrows();
    check_dim(n, c.len())?;
    let c_norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    if a.amax() < NEGLIGIBLE {
        if c_norm > NEGLIGIBLE {
            return Err(QgfError::IllPosedUpdate { c_norm });
        }
        return Ok(vec![0.0; n]);
    }
    let m = a + DMatrix::identity(n, n) * regularization;
    let svd = m.svd(true, true);
    let cutoff = svd.singular_values.max() * 1e-12;
    let x = svd
        .solve(&DVector::from_column_slice(c), cutoff)
        .map_err(|e| QgfError::InvalidParameter(e.to_string()))?;
    Ok(x.iter().copied().collect())
}

/// `theta + sign * dtau * theta_dot`; `sign = 1` follows the flow as derived.
pub fn mclachlan_update_signed(
    spec: &AnsatzSpec,
    h: &PauliSumHamiltonian,
    theta: &[f64],
    dtau: f64,
    regularization: f64,
    sign: f64,
) -> Result<Vec<f64>> {
    check_dim(spec.n_qubits(), h.n_qubits())?;
    let psi = prepare_state(spec, theta)?;
    let derivs = derivatives(spec, theta)?;
    let h2 = h.apply_squared_vec(psi.amplitudes());
    let rate = solve_flow(&gram(&derivs), &c_from(&derivs, &h2), regularization)?;
    Ok(theta
        .iter()
        .zip(&rate)
        .map(|(t, r)| t + sign * dtau * r)
        .collect())
}

pub fn mclachlan_update(
    spec: &AnsatzSpec,
    h: &PauliSumHamiltonian,
    theta: &[f64],
    dtau: f64,
    regularization: f64,
) -> Result<Vec<f64>> {
    mclachlan_update_signed(spec, h, theta, dtau, regularization, 1.0)
}
