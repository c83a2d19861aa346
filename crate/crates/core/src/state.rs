//! Dense pure states, density matrices and Pauli-string actions.
//!
//! Qubit 0 is the most significant bit of a basis-state index: on three
//! qubits, `|q0 q1 q2> = |1 0 0>` is index 4.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, QgfError, Result};
use crate::tol;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Bit-mask form of a Pauli string: `P|b> = i^{n_y} (-1)^{|b & z|} |b ^ x>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PauliMask {
    pub x: usize,
    pub z: usize,
    y_phase: u8,
}

impl PauliMask {
    pub fn identity() -> Self {
        Self {
            x: 0,
            z: 0,
            y_phase: 0,
        }
    }

    pub fn from_letters(letters: &[Pauli]) -> Self {
        let n = letters.len();
        let mut mask = Self::identity();
        for (q, p) in letters.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => mask.x |= bit,
                Pauli::Z => mask.z |= bit,
                Pauli::Y => {
                    mask.x |= bit;
                    mask.z |= bit;
                    mask.y_phase = (mask.y_phase + 1) % 4;
                }
            }
        }
        mask
    }

    pub fn single(n_qubits: usize, qubit: usize, pauli: Pauli) -> Self {
        let mut letters = vec![Pauli::I; n_qubits];
        letters[qubit] = pauli;
        Self::from_letters(&letters)
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Phase picked up by basis state `b`.
    #[inline]
    pub fn phase(&self, b: usize) -> Complex64 {
        let sign = if (b & self.z).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        match self.y_phase {
            0 => Complex64::new(sign, 0.0),
            1 => Complex64::new(0.0, sign),
            2 => Complex64::new(-sign, 0.0),
            _ => Complex64::new(0.0, -sign),
        }
    }

    /// `dst = scale * P src`.
    pub fn apply_into(&self, scale: Complex64, src: &[Complex64], dst: &mut [Complex64]) {
        for (b, amp) in src.iter().enumerate() {
            dst[b ^ self.x] = scale * self.phase(b) * amp;
        }
    }

    /// `acc += scale * P src`.
    pub fn accumulate(&self, scale: Complex64, src: &[Complex64], acc: &mut [Complex64]) {
        for (b, amp) in src.iter().enumerate() {
            acc[b ^ self.x] += scale * self.phase(b) * amp;
        }
    }

    pub fn apply_inplace(&self, v: &mut [Complex64]) {
        if self.x == 0 {
            for (b, amp) in v.iter_mut().enumerate() {
                *amp *= self.phase(b);
            }
            return;
        }
        for b in 0..v.len() {
            let c = b ^ self.x;
            if b < c {
                let (vb, vc) = (v[b], v[c]);
                v[c] = self.phase(b) * vb;
                v[b] = self.phase(c) * vc;
            }
        }
    }

    /// In-place `exp(-i angle P) v = cos(angle) v - i sin(angle) P v`.
    pub fn rotate_inplace(&self, angle: f64, v: &mut [Complex64]) {
        let (s, c) = angle.sin_cos();
        let mis = Complex64::new(0.0, -s);
        if self.x == 0 {
            for (b, amp) in v.iter_mut().enumerate() {
                *amp *= c + mis * self.phase(b);
            }
            return;
        }
        for b in 0..v.len() {
            let d = b ^ self.x;
            if b < d {
                let (vb, vd) = (v[b], v[d]);
                v[b] = c * vb + mis * self.phase(d) * vd;
                v[d] = c * vd + mis * self.phase(b) * vb;
            }
        }
    }
}

/// A weighted tensor product of single-qubit Paulis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliString {
    pub letters: Vec<Pauli>,
    pub coefficient: f64,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>, coefficient: f64) -> Self {
        Self {
            letters,
            coefficient,
        }
    }

    pub fn identity(n_qubits: usize, coefficient: f64) -> Self {
        Self::new(vec![Pauli::I; n_qubits], coefficient)
    }

    /// Builds a string from `(qubit, pauli)` pairs; unlisted qubits are identity.
    pub fn from_sparse(n_qubits: usize, ops: &[(usize, Pauli)], coefficient: f64) -> Result<Self> {
        let mut letters = vec![Pauli::I; n_qubits];
        for &(q, p) in ops {
            if q >= n_qubits {
                return Err(QgfError::IndexOutOfRange {
                    index: q,
                    len: n_qubits,
                });
            }
            letters[q] = p;
        }
        Ok(Self::new(letters, coefficient))
    }

    /// Parses a label such as `"ZZII"`.
    pub fn parse(label: &str, coefficient: f64) -> Result<Self> {
        let letters = label
            .chars()
            .map(|c| {
                Pauli::from_char(c)
                    .ok_or_else(|| QgfError::InvalidParameter(format!("bad Pauli letter '{c}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(letters, coefficient))
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|p| *p == Pauli::I)
    }

    pub fn mask(&self) -> PauliMask {
        PauliMask::from_letters(&self.letters)
    }

    /// Qubits on which the string acts non-trivially.
    pub fn support(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, p)| **p != Pauli::I)
            .map(|(q, _)| q)
            .collect()
    }

    pub fn label(&self) -> String {
        self.letters.iter().map(|p| p.as_char()).collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}*{}", self.coefficient, self.label())
    }
}

/// Pure state of `n_qubits` qubits stored as a dense amplitude vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(QgfError::InvalidParameter(
                "n_qubits must be positive".into(),
            ));
        }
        check_dim(1 << n_qubits, amplitudes.len())?;
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn from_real(n_qubits: usize, amplitudes: &[f64]) -> Result<Self> {
        Self::new(
            n_qubits,
            amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
        )
    }

    pub fn zeros(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            amplitudes: vec![ZERO; 1 << n_qubits],
        }
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut s = Self::zeros(n_qubits);
        s.amplitudes[index] = ONE;
        s
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, factor: Complex64) {
        for a in &mut self.amplitudes {
            *a *= factor;
        }
    }

    /// `self += factor * other`.
    pub fn axpy(&mut self, factor: Complex64, other: &StateVector) -> Result<()> {
        check_dim(self.dim(), other.dim())?;
        for (a, b) in self.amplitudes.iter_mut().zip(&other.amplitudes) {
            *a += factor * b;
        }
        Ok(())
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() < tol::SPECTRAL
    }

    /// Largest entrywise modulus difference.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Outer product `|psi><psi|`.
    pub fn projector(&self) -> DensityMatrix {
        let d = self.dim();
        let mut entries = vec![ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                entries[i * d + j] = self.amplitudes[i] * self.amplitudes[j].conj();
            }
        }
        DensityMatrix {
            n_qubits: self.n_qubits,
            entries,
        }
    }
}

pub(crate) fn dot(bra: &[Complex64], ket: &[Complex64]) -> Complex64 {
    bra.iter().zip(ket).map(|(a, b)| a.conj() * b).sum()
}

/// Returns `s.coefficient * P |psi>`; the input is left untouched.
pub fn apply_pauli_string(s: &PauliString, psi: &StateVector) -> Result<StateVector> {
    check_dim(psi.n_qubits(), s.n_qubits())?;
    let mut out = StateVector::zeros(psi.n_qubits());
    s.mask().apply_into(
        Complex64::new(s.coefficient, 0.0),
        psi.amplitudes(),
        out.amplitudes_mut(),
    );
    Ok(out)
}

/// `<phi|psi>`, conjugating `phi`.
pub fn inner_product(phi: &StateVector, psi: &StateVector) -> Result<Complex64> {
    check_dim(phi.dim(), psi.dim())?;
    Ok(dot(phi.amplitudes(), psi.amplitudes()))
}

pub fn fidelity_pure(phi: &StateVector, psi: &StateVector) -> Result<f64> {
    Ok(inner_product(phi, psi)?.norm_sqr())
}

/// `<psi|rho|psi>`.
pub fn fidelity_mixed(rho: &DensityMatrix, psi: &StateVector) -> Result<f64> {
    check_dim(rho.dim(), psi.dim())?;
    Ok(rho.sandwich(psi.amplitudes()).re)
}

pub fn normalize(psi: &StateVector) -> Result<StateVector> {
    let norm = psi.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(QgfError::DegenerateState);
    }
    let mut out = psi.clone();
    out.scale(Complex64::new(1.0 / norm, 0.0));
    Ok(out)
}

/// Density matrix stored row-major as a dense `2^n x 2^n` array.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn from_entries(n_qubits: usize, entries: Vec<Complex64>) -> Result<Self> {
        let d = 1usize << n_qubits;
        check_dim(d * d, entries.len())?;
        Ok(Self { n_qubits, entries })
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        let mut entries = vec![ZERO; d * d];
        for i in 0..d {
            entries[i * d + i] = Complex64::new(1.0 / d as f64, 0.0);
        }
        Self { n_qubits, entries }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim() + j]
    }

    pub fn trace(&self) -> Complex64 {
        let d = self.dim();
        (0..d).map(|i| self.entries[i * d + i]).sum()
    }

    /// `<v|rho|v>`.
    pub fn sandwich(&self, v: &[Complex64]) -> Complex64 {
        let d = self.dim();
        let mut acc = ZERO;
        for i in 0..d {
            let row = &self.entries[i * d..(i + 1) * d];
            acc += v[i].conj() * dot_plain(row, v);
        }
        acc
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        DMatrix::from_row_slice(d, d, &self.entries)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = self.to_matrix();
        let herm = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks trace, Hermiticity and positivity against the crate tolerances.
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm >= tol::ALGEBRAIC {
            return Err(QgfError::InvalidParameter(format!(
                "density matrix not Hermitian (error {herm:e})"
            )));
        }
        let tr = self.trace();
        if (tr - ONE).norm() >= tol::ALGEBRAIC {
            return Err(QgfError::InvalidParameter(format!(
                "density matrix trace {tr} != 1"
            )));
        }
        let min = self.min_eigenvalue();
        if min < -tol::SPECTRAL {
            return Err(QgfError::InvalidParameter(format!(
                "density matrix has negative eigenvalue {min:e}"
            )));
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `self = a * self + b * other`.
    pub fn combine(&mut self, a: f64, b: f64, other: &DensityMatrix) {
        for (x, y) in self.entries.iter_mut().zip(&other.entries) {
            *x = a * *x + b * y;
        }
    }

    /// `rho -> M rho`, where `op` applies `M` to a vector in place.
    pub fn left_apply(&mut self, op: impl Fn(&mut [Complex64])) {
        let d = self.dim();
        let mut col = vec![ZERO; d];
        for j in 0..d {
            for (i, c) in col.iter_mut().enumerate() {
                *c = self.entries[i * d + j];
            }
            op(&mut col);
            for (i, c) in col.iter().enumerate() {
                self.entries[i * d + j] = *c;
            }
        }
    }

    /// `rho -> rho M^dagger`, where `op` applies `M` to a vector in place.
    pub fn right_apply_adjoint(&mut self, op: impl Fn(&mut [Complex64])) {
        let d = self.dim();
        for row in self.entries.chunks_mut(d) {
            row.iter_mut().for_each(|x| *x = x.conj());
            op(row);
            row.iter_mut().for_each(|x| *x = x.conj());
        }
    }

    /// `rho -> M rho M^dagger`.
    pub fn conjugate_with(&mut self, op: impl Fn(&mut [Complex64])) {
        self.left_apply(&op);
        self.right_apply_adjoint(&op);
    }

    /// `Tr(A B)` for two row-major matrices of this dimension.
    pub fn trace_product(&self, other: &DensityMatrix) -> Complex64 {
        let d = self.dim();
        let mut acc = ZERO;
        for i in 0..d {
            for k in 0..d {
                acc += self.entries[i * d + k] * other.entries[k * d + i];
            }
        }
        acc
    }
}

fn dot_plain(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_string_leaves_state() {
        let psi = StateVector::new(2, vec![c(0.5), I * 0.5, c(-0.5), c(0.5)]).unwrap();
        let out = apply_pauli_string(&PauliString::identity(2, 1.0), &psi).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn x_on_qubit_zero_flips_most_significant_bit() {
        let psi = StateVector::basis(2, 0b00);
        let s = PauliString::parse("XI", 1.0).unwrap();
        let out = apply_pauli_string(&s, &psi).unwrap();
        assert_eq!(out, StateVector::basis(2, 0b10));
    }

    #[test]
    fn zz_fixes_bell_state() {
        let bell = StateVector::from_real(2, &[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).unwrap();
        let out = apply_pauli_string(&PauliString::parse("ZZ", 1.0).unwrap(), &bell).unwrap();
        assert!(out.max_abs_diff(&bell) < 1e-15);
    }

    #[test]
    fn y_action_matches_matrix() {
        // Y|0> = i|1>, Y|1> = -i|0>
        let y = PauliString::parse("Y", 1.0).unwrap();
        let out = apply_pauli_string(&y, &StateVector::basis(1, 0)).unwrap();
        assert_eq!(out.amplitudes(), &[ZERO, I]);
        let out = apply_pauli_string(&y, &StateVector::basis(1, 1)).unwrap();
        assert_eq!(out.amplitudes(), &[-I, ZERO]);
    }

    #[test]
    fn pauli_length_mismatch_is_error() {
        let s = PauliString::parse("XX", 1.0).unwrap();
        let err = apply_pauli_string(&s, &StateVector::basis(3, 0)).unwrap_err();
        assert!(matches!(err, QgfError::DimensionMismatch { .. }));
    }

    #[test]
    fn inner_product_examples() {
        let zero = StateVector::basis(1, 0);
        let one = StateVector::basis(1, 1);
        let plus = StateVector::from_real(1, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        assert!((inner_product(&zero, &zero).unwrap() - ONE).norm() < 1e-15);
        assert_eq!(inner_product(&zero, &one).unwrap(), ZERO);
        assert!((inner_product(&plus, &zero).unwrap() - c(FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!(inner_product(&zero, &StateVector::basis(2, 0)).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let zero = StateVector::basis(1, 0);
        let one = StateVector::basis(1, 1);
        assert!((fidelity_pure(&zero, &zero).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(fidelity_pure(&zero, &one).unwrap(), 0.0);
        let mixed = DensityMatrix::maximally_mixed(3);
        let f = fidelity_mixed(&mixed, &StateVector::basis(3, 5)).unwrap();
        assert!((f - 0.125).abs() < 1e-15);
        let proj = one.projector();
        assert!((fidelity_mixed(&proj, &one).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn normalize_examples() {
        let v = StateVector::from_real(2, &[2.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(normalize(&v).unwrap(), StateVector::basis(2, 0));
        let v = StateVector::from_real(1, &[1.0, 1.0]).unwrap();
        let n = normalize(&v).unwrap();
        assert!((n.amplitudes()[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((n.amplitudes()[1].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(normalize(&n).unwrap().max_abs_diff(&n) < 1e-12);
        assert_eq!(
            normalize(&StateVector::zeros(2)).unwrap_err(),
            QgfError::DegenerateState
        );
    }

    #[test]
    fn state_length_must_match_qubits() {
        assert!(StateVector::new(2, vec![ONE; 3]).is_err());
    }

    #[test]
    fn rotation_matches_cos_sin_form() {
        let s = PauliString::parse("XY", 1.0).unwrap();
        let m = s.mask();
        let psi = StateVector::new(
            2,
            vec![
                c(0.1),
                Complex64::new(0.3, -0.2),
                c(0.7),
                Complex64::new(0.0, 0.4),
            ],
        )
        .unwrap();
        let angle = 0.37;
        let mut rotated = psi.clone();
        m.rotate_inplace(angle, rotated.amplitudes_mut());
        let p = apply_pauli_string(&s, &psi).unwrap();
        let mut expected = psi.clone();
        expected.scale(c(angle.cos()));
        expected
            .axpy(Complex64::new(0.0, -angle.sin()), &p)
            .unwrap();
        assert!(rotated.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn density_matrix_conjugation_by_pauli() {
        let psi = StateVector::from_real(1, &[0.6, 0.8]).unwrap();
        let mut rho = psi.projector();
        let x = PauliMask::single(1, 0, Pauli::X);
        rho.conjugate_with(|v| x.apply_inplace(v));
        let flipped = StateVector::from_real(1, &[0.8, 0.6]).unwrap().projector();
        assert!(rho.max_abs_diff(&flipped) < 1e-15);
        rho.validate().unwrap();
    }
}
