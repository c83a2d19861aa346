//! Weighted Pauli-sum Hamiltonians and the shifted periodic transverse-field
//! Ising chain.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, QgfError, Result};
use crate::state::{dot, DensityMatrix, Pauli, PauliMask, PauliString, StateVector, ZERO};
use crate::tol;

/// Largest register converted to a dense matrix unless the caller raises it.
pub const DEFAULT_DENSE_LIMIT: usize = 12;

/// `H = sum_l c_l h_l` over Pauli strings of a common length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliSumHamiltonian {
    n_qubits: usize,
    terms: Vec<PauliString>,
}

impl PauliSumHamiltonian {
    pub fn new(n_qubits: usize, terms: Vec<PauliString>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(QgfError::InvalidParameter(
                "n_qubits must be positive".into(),
            ));
        }
        for t in &terms {
            check_dim(n_qubits, t.n_qubits())?;
            if !t.coefficient.is_finite() {
                return Err(QgfError::InvalidParameter(format!(
                    "non-finite coefficient on {}",
                    t.label()
                )));
            }
        }
        Ok(Self { n_qubits, terms })
    }

    pub fn empty(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    /// Adds a term, summing coefficients if the same string is already present.
    pub fn push_merged(&mut self, term: PauliString) -> Result<()> {
        check_dim(self.n_qubits, term.n_qubits())?;
        match self.terms.iter_mut().find(|t| t.letters == term.letters) {
            Some(existing) => existing.coefficient += term.coefficient,
            None => self.terms.push(term),
        }
        Ok(())
    }

    pub fn has_identity_term(&self) -> bool {
        self.terms.iter().any(PauliString::is_identity)
    }

    /// Sum of identity-term coefficients.
    pub fn identity_offset(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.is_identity())
            .map(|t| t.coefficient)
            .sum()
    }

    /// Upper bound on the spectral radius.
    pub fn coefficient_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }

    pub(crate) fn masks(&self) -> Vec<(PauliMask, f64)> {
        self.terms
            .iter()
            .map(|t| (t.mask(), t.coefficient))
            .collect()
    }

    /// `out = H v` on raw amplitude slices.
    pub(crate) fn apply_slice(&self, v: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|x| *x = ZERO);
        for t in &self.terms {
            t.mask()
                .accumulate(Complex64::new(t.coefficient, 0.0), v, out);
        }
    }

    pub(crate) fn apply_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; v.len()];
        self.apply_slice(v, &mut out);
        out
    }

    pub(crate) fn apply_squared_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        let once = self.apply_vec(v);
        self.apply_vec(&once)
    }
}

/// Parameters of `H = -J sum Z_n Z_{n+1} + g sum X_n + E_s` on a ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TfimParameters {
    pub n_qubits: usize,
    pub coupling: f64,
    pub field: f64,
    pub shift: f64,
}

impl TfimParameters {
    pub fn new(n_qubits: usize, coupling: f64, field: f64, shift: f64) -> Self {
        Self {
            n_qubits,
            coupling,
            field,
            shift,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits < 2 {
            return Err(QgfError::InvalidParameter(format!(
                "transverse-field Ising chain needs at least 2 sites, got {}",
                self.n_qubits
            )));
        }
        if !(self.coupling.is_finite() && self.field.is_finite() && self.shift.is_finite()) {
            return Err(QgfError::InvalidParameter(
                "non-finite Ising parameter".into(),
            ));
        }
        Ok(())
    }

    /// The `-J sum ZZ` part, bonds `(n, n+1 mod N)`; duplicate bonds merge.
    pub fn zz_part(&self) -> Result<PauliSumHamiltonian> {
        self.validate()?;
        let n = self.n_qubits;
        let mut h = PauliSumHamiltonian::empty(n);
        for site in 0..n {
            let bond = PauliString::from_sparse(
                n,
                &[(site, Pauli::Z), ((site + 1) % n, Pauli::Z)],
                -self.coupling,
            )?;
            h.push_merged(bond)?;
        }
        Ok(h)
    }

    /// The `g sum X` part.
    pub fn x_part(&self) -> Result<PauliSumHamiltonian> {
        self.validate()?;
        let n = self.n_qubits;
        let terms = (0..n)
            .map(|site| PauliString::from_sparse(n, &[(site, Pauli::X)], self.field))
            .collect::<Result<Vec<_>>>()?;
        PauliSumHamiltonian::new(n, terms)
    }
}

/// Builds the shifted periodic chain. At `N = 2` the two bonds coincide and
/// are merged into one `-2J Z Z` term.
pub fn build_tfim(p: &TfimParameters) -> Result<PauliSumHamiltonian> {
    let mut h = p.zz_part()?;
    for t in p.x_part()?.terms {
        h.push_merged(t)?;
    }
    h.push_merged(PauliString::identity(p.n_qubits, p.shift))?;
    Ok(h)
}

pub fn apply_h(h: &PauliSumHamiltonian, psi: &StateVector) -> Result<StateVector> {
    check_dim(h.n_qubits(), psi.n_qubits())?;
    StateVector::new(psi.n_qubits(), h.apply_vec(psi.amplitudes()))
}

pub fn apply_h_squared(h: &PauliSumHamiltonian, psi: &StateVector) -> Result<StateVector> {
    check_dim(h.n_qubits(), psi.n_qubits())?;
    StateVector::new(psi.n_qubits(), h.apply_squared_vec(psi.amplitudes()))
}

/// `sum_{l,m} c_l c_m h_l h_m |psi>`, term pair by term pair.
pub fn apply_h_squared_expanded(h: &PauliSumHamiltonian, psi: &StateVector) -> Result<StateVector> {
    check_dim(h.n_qubits(), psi.n_qubits())?;
    let masks = h.masks();
    let d = psi.dim();
    let mut out = StateVector::zeros(psi.n_qubits());
    let mut inner = vec![ZERO; d];
    for (ml, cl) in &masks {
        for (mm, cm) in &masks {
            mm.apply_into(Complex64::new(cl * cm, 0.0), psi.amplitudes(), &mut inner);
            ml.accumulate(Complex64::new(1.0, 0.0), &inner, out.amplitudes_mut());
        }
    }
    Ok(out)
}

/// `<psi|H|psi>` for a normalized state.
pub fn expectation(h: &PauliSumHamiltonian, psi: &StateVector) -> Result<f64> {
    check_dim(h.n_qubits(), psi.n_qubits())?;
    if !psi.is_normalized() {
        return Err(QgfError::NotNormalized { norm: psi.norm() });
    }
    let value = dot(psi.amplitudes(), &h.apply_vec(psi.amplitudes()));
    if value.im.abs() >= tol::SPECTRAL {
        return Err(QgfError::ImaginaryResidue(value.im));
    }
    Ok(value.re)
}

/// `Re Tr(H rho)`.
pub fn expectation_mixed(h: &PauliSumHamiltonian, rho: &DensityMatrix) -> Result<f64> {
    check_dim(h.n_qubits(), rho.n_qubits())?;
    let d = rho.dim();
    let entries = rho.entries();
    let mut acc = ZERO;
    for t in h.terms() {
        let m = t.mask();
        // Tr(P rho) = sum_b <b|P|b'> rho_{b', b} with b = b' ^ x.
        let mut tr = ZERO;
        for b in 0..d {
            let src = b ^ m.x;
            tr += m.phase(src) * entries[src * d + b];
        }
        acc += t.coefficient * tr;
    }
    Ok(acc.re)
}

pub fn as_dense_matrix(h: &PauliSumHamiltonian) -> Result<DMatrix<Complex64>> {
    as_dense_matrix_with_limit(h, DEFAULT_DENSE_LIMIT)
}

pub fn as_dense_matrix_with_limit(
    h: &PauliSumHamiltonian,
    limit: usize,
) -> Result<DMatrix<Complex64>> {
    if h.n_qubits() > limit {
        return Err(QgfError::SizeLimit {
            n_qubits: h.n_qubits(),
            limit,
        });
    }
    let d = h.dim();
    let mut m = DMatrix::from_element(d, d, ZERO);
    for t in h.terms() {
        let mask = t.mask();
        for col in 0..d {
            m[(col ^ mask.x, col)] += t.coefficient * mask.phase(col);
        }
    }
    Ok(m)
}
