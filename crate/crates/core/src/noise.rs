//! Depolarizing channels on density matrices and their Pauli-sampling
//! unraveling for pure-state trajectories.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QgfError, Result};
use crate::state::{DensityMatrix, Pauli, PauliMask};

/// Where the depolarizing channel acts after each noisy gate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// `(1-p) rho + p/3 (X rho X + Y rho Y + Z rho Z)` on each touched qubit.
    #[default]
    PerQubit,
    /// `(1-p) rho + p I / 2^n` on the whole register, once per gate.
    Global,
}

/// Depolarizing strength `p` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepolarizingNoise {
    p: f64,
}

impl DepolarizingNoise {
    pub fn new(p: f64) -> Result<Self> {
        check_probability(p)?;
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn is_noiseless(&self) -> bool {
        self.p == 0.0
    }
}

/// Channel strength together with where it acts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p: f64,
    #[serde(default)]
    pub mode: NoiseMode,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn new(p: f64, mode: NoiseMode) -> Result<Self> {
        check_probability(p)?;
        Ok(Self { p, mode })
    }

    pub fn per_qubit(p: f64) -> Result<Self> {
        Self::new(p, NoiseMode::PerQubit)
    }

    pub fn is_noiseless(&self) -> bool {
        self.p == 0.0
    }
}

impl From<DepolarizingNoise> for NoiseModel {
    fn from(d: DepolarizingNoise) -> Self {
        Self {
            p: d.p,
            mode: NoiseMode::PerQubit,
        }
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(QgfError::InvalidProbability(p))
    }
}

/// Applies the single-qubit depolarizing channel to `qubit`.
pub fn apply_depolarizing(rho: &DensityMatrix, qubit: usize, p: f64) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    depolarize_inplace(&mut out, qubit, p)?;
    Ok(out)
}

pub(crate) fn depolarize_inplace(rho: &mut DensityMatrix, qubit: usize, p: f64) -> Result<()> {
    check_probability(p)?;
    let n = rho.n_qubits();
    if qubit >= n {
        return Err(QgfError::IndexOutOfRange {
            index: qubit,
            len: n,
        });
    }
    if p == 0.0 {
        return Ok(());
    }
    let mut acc = rho.clone();
    acc.combine(1.0 - p, 0.0, rho);
    for pauli in [Pauli::X, Pauli::Y, Pauli::Z] {
        let mask = PauliMask::single(n, qubit, pauli);
        let mut term = rho.clone();
        term.conjugate_with(|v| mask.apply_inplace(v));
        acc.combine(1.0, p / 3.0, &term);
    }
    *rho = acc;
    Ok(())
}

/// `rho -> (1-p) rho + p I / 2^n`.
pub fn apply_global_depolarizing(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    global_depolarize_inplace(&mut out, p)?;
    Ok(out)
}

pub(crate) fn global_depolarize_inplace(rho: &mut DensityMatrix, p: f64) -> Result<()> {
    check_probability(p)?;
    if p > 0.0 {
        let flat = DensityMatrix::maximally_mixed(rho.n_qubits());
        rho.combine(1.0 - p, p, &flat);
    }
    Ok(())
}

/// Draws the Kraus branch of the single-qubit channel: identity with
/// probability `1-p`, otherwise X, Y or Z with probability `p/3` each.
pub fn sample_depolarizing<R: Rng + ?Sized>(p: f64, rng: &mut R) -> Result<Pauli> {
    check_probability(p)?;
    Ok(draw_pauli(p, rng))
}

#[inline]
pub(crate) fn draw_pauli<R: Rng + ?Sized>(p: f64, rng: &mut R) -> Pauli {
    if p == 0.0 {
        return Pauli::I;
    }
    let u: f64 = rng.random();
    if u >= p {
        Pauli::I
    } else if u < p / 3.0 {
        Pauli::X
    } else if u < 2.0 * p / 3.0 {
        Pauli::Y
    } else {
        Pauli::Z
    }
}

/// Unraveling of the global channel: with probability `p` a uniformly random
/// `n`-qubit Pauli string (identity included) is applied.
pub(crate) fn draw_global<R: Rng + ?Sized>(
    n_qubits: usize,
    p: f64,
    rng: &mut R,
) -> Option<Vec<Pauli>> {
    if p == 0.0 {
        return None;
    }
    let u: f64 = rng.random();
    if u >= p {
        return None;
    }
    let letters: Vec<Pauli> = (0..n_qubits)
        .map(|_| Pauli::ALL[rng.random_range(0..4)])
        .collect();
    if letters.iter().all(|l| *l == Pauli::I) {
        None
    } else {
        Some(letters)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{normalize, StateVector};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_rho(n: usize, seed: u64) -> DensityMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut psi = StateVector::zeros(n);
        for a in psi.amplitudes_mut() {
            *a = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
        normalize(&psi).unwrap().projector()
    }

    #[test]
    fn zero_probability_is_identity() {
        let rho = sample_rho(2, 1);
        assert_eq!(apply_depolarizing(&rho, 1, 0.0).unwrap(), rho);
    }

    #[test]
    fn three_quarters_fully_depolarizes_one_qubit() {
        let rho = sample_rho(1, 2);
        let out = apply_depolarizing(&rho, 0, 0.75).unwrap();
        assert!(out.max_abs_diff(&DensityMatrix::maximally_mixed(1)) < 1e-15);
    }

    #[test]
    fn channel_composes_as_semigroup() {
        // lambda(p) = 1 - 4p/3 is the Bloch-vector contraction; two applications
        // multiply the contractions.
        let p = 1e-4;
        let composed = 0.75 * (1.0 - (1.0 - 4.0 * p / 3.0_f64).powi(2));
        let rho = sample_rho(2, 3);
        let twice = apply_depolarizing(&apply_depolarizing(&rho, 0, p).unwrap(), 0, p).unwrap();
        let once = apply_depolarizing(&rho, 0, composed).unwrap();
        assert!(twice.max_abs_diff(&once) < 1e-12);
    }

    #[test]
    fn errors_on_bad_inputs() {
        let rho = sample_rho(2, 4);
        assert_eq!(
            apply_depolarizing(&rho, 2, 0.1).unwrap_err(),
            QgfError::IndexOutOfRange { index: 2, len: 2 }
        );
        assert_eq!(
            apply_depolarizing(&rho, 0, 1.5).unwrap_err(),
            QgfError::InvalidProbability(1.5)
        );
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_depolarizing(-0.1, &mut rng).is_err());
    }

    #[test]
    fn sampling_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            assert_eq!(sample_depolarizing(0.0, &mut rng).unwrap(), Pauli::I);
            assert_ne!(sample_depolarizing(1.0, &mut rng).unwrap(), Pauli::I);
        }
    }

    #[test]
    fn sampling_frequencies_within_four_sigma() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let draws = 1_000_000usize;
        let mut counts = [0usize; 4];
        for _ in 0..draws {
            let idx = match sample_depolarizing(0.3, &mut rng).unwrap() {
                Pauli::I => 0,
                Pauli::X => 1,
                Pauli::Y => 2,
                Pauli::Z => 3,
            };
            counts[idx] += 1;
        }
        for (count, expected) in counts.iter().zip([0.7, 0.1, 0.1, 0.1]) {
            let sigma = (expected * (1.0 - expected) / draws as f64).sqrt();
            let freq = *count as f64 / draws as f64;
            assert!(
                (freq - expected).abs() < 4.0 * sigma,
                "{freq} vs {expected}"
            );
        }
    }

    #[test]
    fn unital_on_maximally_mixed() {
        let flat = DensityMatrix::maximally_mixed(3);
        for p in [0.0, 1e-4, 0.3, 0.75, 1.0] {
            let out = apply_depolarizing(&flat, 1, p).unwrap();
            assert!(out.max_abs_diff(&flat) < 1e-15);
        }
    }

    #[test]
    fn global_channel_mixes_toward_identity() {
        let rho = sample_rho(2, 7);
        let out = apply_global_depolarizing(&rho, 1.0).unwrap();
        assert!(out.max_abs_diff(&DensityMatrix::maximally_mixed(2)) < 1e-15);
        out.validate().unwrap();
    }
}
