mod common;

use common::*;
use num_complex::Complex64;
use qgf_core::ansatz::{prepare_state_noisy, prepare_state_noisy_with, sample_trajectory};
use qgf_core::hamiltonian::{expectation, expectation_mixed};
use qgf_core::noise::{apply_depolarizing, apply_global_depolarizing};
use qgf_core::state::normalize;
use qgf_core::{
    build_tfim, AnsatzSpec, DensityMatrix, GroundTruth, InitialStateKind, NoiseMode, NoiseModel,
    StateVector, TfimParameters,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PROBABILITIES: [f64; 5] = [0.0, 1e-4, 1e-2, 0.75, 1.0];

fn random_mixed(n: usize, rank: usize, seed: u64) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rho: Option<DensityMatrix> = None;
    let weights: Vec<f64> = (0..rank).map(|_| rng.random::<f64>() + 0.1).collect();
    let total: f64 = weights.iter().sum();
    for w in weights {
        let mut psi = StateVector::zeros(n);
        for a in psi.amplitudes_mut() {
            *a = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
        let proj = normalize(&psi).unwrap().projector();
        match rho.as_mut() {
            None => {
                let mut p = proj;
                p.combine(w / total, 0.0, &DensityMatrix::maximally_mixed(n));
                rho = Some(p);
            }
            Some(r) => r.combine(1.0, w / total, &proj),
        }
    }
    rho.unwrap()
}

#[test]
fn channel_preserves_density_matrix_invariants() {
    for (i, p) in PROBABILITIES.into_iter().enumerate() {
        let rho = random_mixed(3, 3, i as u64);
        for q in 0..3 {
            let out = apply_depolarizing(&rho, q, p).unwrap();
            out.validate().unwrap();
        }
        apply_global_depolarizing(&rho, p)
            .unwrap()
            .validate()
            .unwrap();
    }
}

#[test]
fn noisy_circuit_output_is_a_density_matrix() {
    let model = TfimParameters::new(4, 0.5, 1.0, 11.0);
    let spec = AnsatzSpec::for_tfim(&model, 4, InitialStateKind::Paramagnetic.into()).unwrap();
    for p in PROBABILITIES {
        prepare_state_noisy(&spec, &angles(1, 8), p)
            .unwrap()
            .validate()
            .unwrap();
    }
}

#[test]
fn channel_is_linear_on_mixtures() {
    let a = random_mixed(2, 2, 10);
    let b = random_mixed(2, 3, 11);
    for alpha in [0.0, 0.3, 0.9] {
        let mut mix = a.clone();
        mix.combine(alpha, 1.0 - alpha, &b);
        let lhs = apply_depolarizing(&mix, 1, 0.2).unwrap();
        let mut rhs = apply_depolarizing(&a, 1, 0.2).unwrap();
        rhs.combine(alpha, 1.0 - alpha, &apply_depolarizing(&b, 1, 0.2).unwrap());
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }
}

#[test]
fn channel_matches_kraus_sum_on_dense_matrices() {
    let rho = random_mixed(2, 2, 12);
    let dense = rho.to_matrix();
    let p = 0.37;
    let mut expected = dense.clone() * Complex64::new(1.0 - p, 0.0);
    for l in ['X', 'Y', 'Z'] {
        let k = string(&format!("I{l}"));
        expected += &k * &dense * &k * Complex64::new(p / 3.0, 0.0);
    }
    let out = apply_depolarizing(&rho, 1, p).unwrap().to_matrix();
    assert!((out - expected).iter().all(|z| z.norm() < 1e-14));
}

#[test]
fn unital_for_every_probability() {
    let flat = DensityMatrix::maximally_mixed(4);
    for p in PROBABILITIES {
        assert!(apply_depolarizing(&flat, 2, p).unwrap().max_abs_diff(&flat) < 1e-15);
    }
}

/// Trajectory means of several observables agree with the exact channel
/// within three standard errors.
#[test]
fn trajectory_average_matches_exact_channel() {
    let model = TfimParameters::new(4, 1.0, 0.5, 8.5);
    let spec = AnsatzSpec::for_tfim(&model, 4, InitialStateKind::Ferromagnetic.into()).unwrap();
    let h = build_tfim(&model).unwrap();
    let gt = GroundTruth::from_hamiltonian(&h).unwrap();
    let theta = angles(77, 8);
    let p = 0.01;
    let rho = prepare_state_noisy(&spec, &theta, p).unwrap();
    let exact = [
        expectation_mixed(&h, &rho).unwrap(),
        gt.fidelity_mixed(&rho).unwrap(),
    ];
    let samples = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut sum = [0.0; 2];
    let mut sum_sq = [0.0; 2];
    for _ in 0..samples {
        let psi = sample_trajectory(&spec, &theta, p, &mut rng).unwrap();
        let obs = [expectation(&h, &psi).unwrap(), gt.fidelity(&psi).unwrap()];
        for k in 0..2 {
            sum[k] += obs[k];
            sum_sq[k] += obs[k] * obs[k];
        }
    }
    let m = samples as f64;
    for k in 0..2 {
        let mean = sum[k] / m;
        let var = (sum_sq[k] / m - mean * mean) * m / (m - 1.0);
        let se = (var / m).sqrt();
        assert!(
            (mean - exact[k]).abs() < 3.0 * se,
            "observable {k}: {mean} vs {} (se {se})",
            exact[k]
        );
    }
}

#[test]
fn global_mode_trajectories_match_global_channel() {
    let model = TfimParameters::new(3, 0.5, 1.0, 0.0);
    let mut spec = AnsatzSpec::for_tfim(&model, 2, InitialStateKind::Paramagnetic.into()).unwrap();
    spec.noisy_preparation = true;
    let h = build_tfim(&model).unwrap();
    let noise = NoiseModel::new(0.05, NoiseMode::Global).unwrap();
    let theta = angles(5, 4);
    let exact =
        expectation_mixed(&h, &prepare_state_noisy_with(&spec, &theta, noise).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let samples = 50_000;
    let values: Vec<f64> = (0..samples)
        .map(|_| {
            let real = qgf_core::ansatz::NoiseRealization::sample(&spec, noise, &mut rng);
            let psi = qgf_core::ansatz::prepare_state_with(&spec, &theta, &real).unwrap();
            expectation(&h, &psi).unwrap()
        })
        .collect();
    let m = samples as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    assert!(
        (mean - exact).abs() < 3.0 * (var / m).sqrt(),
        "{mean} vs {exact}"
    );
}
