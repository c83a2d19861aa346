//! Dense-matrix reference built from Kronecker products, independent of the
//! bit-mask kernels under test.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qgf_core::InitialStateKind;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn pauli(letter: char) -> CMat {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match letter {
        'I' => CMat::from_row_slice(2, 2, &[o, z, z, o]),
        'X' => CMat::from_row_slice(2, 2, &[z, o, o, z]),
        'Y' => CMat::from_row_slice(2, 2, &[z, -i, i, z]),
        'Z' => CMat::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => panic!("bad letter {letter}"),
    }
}

/// Tensor product with qubit 0 leftmost.
pub fn string(label: &str) -> CMat {
    label
        .chars()
        .map(pauli)
        .reduce(|acc, m| acc.kronecker(&m))
        .unwrap()
}

fn placed(n: usize, ops: &[(usize, char)]) -> CMat {
    let label: String = (0..n)
        .map(|q| ops.iter().find(|(p, _)| *p == q).map_or('I', |(_, l)| *l))
        .collect();
    string(&label)
}

pub fn zz_part(n: usize, coupling: f64) -> CMat {
    let d = 1 << n;
    let mut m = CMat::zeros(d, d);
    let bonds = if n == 2 { 1 } else { n };
    let weight = if n == 2 { 2.0 } else { 1.0 };
    for b in 0..bonds {
        m += placed(n, &[(b, 'Z'), ((b + 1) % n, 'Z')]) * c(-coupling * weight, 0.0);
    }
    m
}

pub fn x_part(n: usize, field: f64) -> CMat {
    let d = 1 << n;
    let mut m = CMat::zeros(d, d);
    for q in 0..n {
        m += placed(n, &[(q, 'X')]) * c(field, 0.0);
    }
    m
}

pub fn tfim(n: usize, coupling: f64, field: f64, shift: f64) -> CMat {
    let d = 1 << n;
    zz_part(n, coupling) + x_part(n, field) + CMat::identity(d, d) * c(shift, 0.0)
}

/// `exp(-i t G)` for Hermitian `G`.
pub fn expm_i(g: &CMat, t: f64) -> CMat {
    let eig = g.clone().symmetric_eigen();
    let phases = CMat::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -t * l)));
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

pub fn initial(kind: InitialStateKind, n: usize) -> CVec {
    let d = 1 << n;
    match kind {
        InitialStateKind::Ferromagnetic => {
            let minus = CVec::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]) / c(2f64.sqrt(), 0.0);
            (1..n).fold(minus.clone(), |acc, _| acc.kronecker(&minus))
        }
        InitialStateKind::Paramagnetic => {
            let mut v = CVec::zeros(d);
            v[0] = c(1.0 / 2f64.sqrt(), 0.0);
            v[d - 1] = c(if n % 2 == 0 { 1.0 } else { -1.0 } / 2f64.sqrt(), 0.0);
            v
        }
    }
}

/// QAOA state: layer l applies exp(-i th[2l+1] Hzz) then exp(-i th[2l] Hx).
pub struct DenseAnsatz {
    pub zz: CMat,
    pub x: CMat,
    pub psi0: CVec,
}

impl DenseAnsatz {
    pub fn new(n: usize, coupling: f64, field: f64, kind: InitialStateKind) -> Self {
        Self {
            zz: zz_part(n, coupling),
            x: x_part(n, field),
            psi0: initial(kind, n),
        }
    }

    pub fn state(&self, theta: &[f64]) -> CVec {
        let mut psi = self.psi0.clone();
        for l in 0..theta.len() / 2 {
            psi = expm_i(&self.zz, theta[2 * l + 1]) * psi;
            psi = expm_i(&self.x, theta[2 * l]) * psi;
        }
        psi
    }

    /// Derivative with the generator inserted after its exponential.
    pub fn derivative(&self, theta: &[f64], k: usize) -> CVec {
        let mi = c(0.0, -1.0);
        let mut psi = self.psi0.clone();
        for l in 0..theta.len() / 2 {
            psi = expm_i(&self.zz, theta[2 * l + 1]) * psi;
            if k == 2 * l + 1 {
                psi = &self.zz * psi * mi;
            }
            psi = expm_i(&self.x, theta[2 * l]) * psi;
            if k == 2 * l {
                psi = &self.x * psi * mi;
            }
        }
        psi
    }
}

pub fn to_dense(v: &[Complex64]) -> CVec {
    CVec::from_column_slice(v)
}

pub fn max_diff(a: &CVec, b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Deterministic pseudo-random angles in `[-pi, pi)`.
pub fn angles(seed: u64, n: usize) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
        .collect()
}
