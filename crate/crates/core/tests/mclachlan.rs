mod common;

use common::*;
use nalgebra::DMatrix;
use qgf_core::engine::{mclachlan_a, mclachlan_c, mclachlan_c_expanded, mclachlan_update};
use qgf_core::{
    build_tfim, diagonalize, exact_linearized_step, prepare_state, AnsatzSpec, GroundTruth,
    InitialStateKind, TfimParameters,
};

fn setup(ferro: bool) -> (AnsatzSpec, qgf_core::PauliSumHamiltonian, DenseAnsatz, CMat) {
    let (j, g, kind) = if ferro {
        (1.0, 0.5, InitialStateKind::Ferromagnetic)
    } else {
        (0.5, 1.0, InitialStateKind::Paramagnetic)
    };
    let model = TfimParameters::new(4, j, g, 8.5);
    (
        AnsatzSpec::for_tfim(&model, 4, kind.into()).unwrap(),
        build_tfim(&model).unwrap(),
        DenseAnsatz::new(4, j, g, kind),
        tfim(4, j, g, 8.5),
    )
}

#[test]
fn a_and_c_match_dense_recomputation() {
    for seed in 0..20 {
        let (spec, h, dense, hd) = setup(seed % 2 == 0);
        let theta = angles(seed, 8);
        let a = mclachlan_a(&spec, &theta).unwrap();
        let c = mclachlan_c(&spec, &h, &theta).unwrap();
        let psi = dense.state(&theta);
        let h2psi = &hd * (&hd * &psi);
        let derivs: Vec<CVec> = (0..8).map(|k| dense.derivative(&theta, k)).collect();
        for j in 0..8 {
            for k in 0..8 {
                assert!((a[(j, k)] - derivs[j].dotc(&derivs[k]).re).abs() < 1e-10);
                assert_eq!(a[(j, k)], a[(k, j)]);
            }
            assert!((c[j] + derivs[j].dotc(&h2psi).re).abs() < 1e-10);
        }
        let min_eig = a.symmetric_eigenvalues().min();
        assert!(min_eig >= -1e-10, "{min_eig}");
    }
}

#[test]
fn c_paths_agree_on_random_points() {
    for seed in 0..20 {
        let (spec, h, _, _) = setup(seed % 2 == 1);
        let theta = angles(40 + seed, 8);
        let a = mclachlan_c(&spec, &h, &theta).unwrap();
        let b = mclachlan_c_expanded(&spec, &h, &theta).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
    }
}

#[test]
fn last_applied_generator_gives_its_second_moment() {
    // theta[0] drives the final exponential, so d_0 psi = -i Hx psi
    let model = TfimParameters::new(3, 1.0, 0.7, 0.0);
    let spec = AnsatzSpec::for_tfim(&model, 1, InitialStateKind::Ferromagnetic.into()).unwrap();
    let dense = DenseAnsatz::new(3, 1.0, 0.7, InitialStateKind::Ferromagnetic);
    let theta = [0.37, -0.81];
    let psi = dense.state(&theta);
    let gx2 = &dense.x * &dense.x;
    let expected = psi.dotc(&(&gx2 * &psi)).re;
    let a = mclachlan_a(&spec, &theta).unwrap();
    assert!((a[(0, 0)] - expected).abs() < 1e-12);
}

#[test]
fn small_step_moves_toward_linearized_target() {
    for ferro in [true, false] {
        let (spec, h, _, _) = setup(ferro);
        let spectrum = diagonalize(&h).unwrap();
        let theta = angles(if ferro { 7 } else { 8 }, 8);
        let psi = prepare_state(&spec, &theta).unwrap();
        let target = exact_linearized_step(&spectrum, &psi, 1e-4).unwrap();
        let next = mclachlan_update(&spec, &h, &theta, 1e-4, 1e-6).unwrap();
        let moved = prepare_state(&spec, &next).unwrap();
        let before = qgf_core::state::fidelity_pure(&psi, &target).unwrap();
        let after = qgf_core::state::fidelity_pure(&moved, &target).unwrap();
        assert!(after >= before, "{after} < {before}");
    }
}

#[test]
fn default_sign_lowers_energy() {
    let (spec, h, _, _) = setup(true);
    let gt = GroundTruth::from_hamiltonian(&h).unwrap();
    let mut theta = angles(3, 8);
    let e0 = qgf_core::expectation(&h, &prepare_state(&spec, &theta).unwrap()).unwrap();
    for _ in 0..20 {
        theta = mclachlan_update(&spec, &h, &theta, 0.002, 1e-6).unwrap();
    }
    let e1 = qgf_core::expectation(&h, &prepare_state(&spec, &theta).unwrap()).unwrap();
    assert!(e1 < e0 && e1 >= gt.energy - 1e-9);
}

#[test]
fn identity_gram_matrix_update_is_c_step() {
    let c = [0.5, -0.25, 1.5];
    let x = qgf_core::engine::solve_flow(&DMatrix::identity(3, 3), &c, 0.0).unwrap();
    let dtau = 0.01;
    let theta = [0.1, 0.2, 0.3];
    let next: Vec<f64> = theta.iter().zip(&x).map(|(t, r)| t + dtau * r).collect();
    for k in 0..3 {
        assert!((next[k] - (theta[k] + dtau * c[k])).abs() < 1e-15);
    }
}
