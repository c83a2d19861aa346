//! Fast self-checks run by the `check` subcommand.

use qgf_core::ansatz::prepare_state_noisy;
use qgf_core::engine::{
    energy_gradient, initial_parameters, mclachlan_a, mclachlan_c, mclachlan_c_expanded,
    run_qgf_evolution, step_cost, step_cost_gradient,
};
use qgf_core::noise::{apply_depolarizing, apply_global_depolarizing};
use qgf_core::{
    build_tfim, diagonalize, exact_filter_state, expectation, prepare_initial, prepare_state,
    AnsatzSpec, EvolutionConfig, GroundTruth, OptimizerKind, ParameterInit, PauliSumHamiltonian,
    Result, TfimParameters,
};

use crate::presets::{phase_couplings, PHASES};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn() -> Result<(bool, String)>;

const CHECKS: [(&str, Check); 8] = [
    ("shift_moves_spectrum_rigidly", shift_moves_spectrum),
    ("exact_filter_is_monotone", exact_filter_monotone),
    ("prepared_states_are_normalized", prepared_states_normalized),
    ("gradients_match_finite_differences", gradients_match_fd),
    ("mclachlan_system_is_consistent", mclachlan_consistent),
    ("channels_return_density_matrices", channels_valid),
    ("noisy_circuits_are_density_matrices", noisy_circuits_valid),
    ("evolution_is_deterministic", evolution_deterministic),
];

pub fn run_checks() -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .map(|(name, check)| match check() {
            Ok((passed, detail)) => CheckOutcome {
                name,
                passed,
                detail,
            },
            Err(e) => CheckOutcome {
                name,
                passed: false,
                detail: format!("error: {e}"),
            },
        })
        .collect()
}

fn chain(
    phase: qgf_core::InitialStateKind,
    shift: f64,
) -> Result<(AnsatzSpec, PauliSumHamiltonian)> {
    let (j, g) = phase_couplings(phase);
    let model = TfimParameters::new(4, j, g, shift);
    Ok((
        AnsatzSpec::for_tfim(&model, 4, phase.into())?,
        build_tfim(&model)?,
    ))
}

fn random_theta(seed: u64) -> Result<Vec<f64>> {
    initial_parameters(&ParameterInit::RandomUniform, 8, seed)
}

fn shift_moves_spectrum() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for phase in PHASES {
        let plain = diagonalize(&chain(phase, 0.0)?.1)?;
        let shifted = diagonalize(&chain(phase, 8.5)?.1)?;
        for (a, b) in plain.eigenvalues().iter().zip(shifted.eigenvalues()) {
            worst = worst.max((a + 8.5 - b).abs());
        }
    }
    Ok((worst < 1e-10, format!("max deviation {worst:.2e}")))
}

fn exact_filter_monotone() -> Result<(bool, String)> {
    let mut violations = 0;
    for phase in PHASES {
        let (_, h) = chain(phase, 8.5)?;
        let spectrum = diagonalize(&h)?;
        let ground = spectrum.ground_truth();
        let psi0 = prepare_initial(phase, 4)?;
        let (mut last_f, mut last_e) = (f64::NEG_INFINITY, f64::INFINITY);
        for k in 0..=30 {
            let psi = exact_filter_state(&spectrum, &psi0, k as f64 * 0.005)?;
            let (f, e) = (ground.fidelity(&psi)?, expectation(&h, &psi)?);
            violations += usize::from(f < last_f - 1e-10) + usize::from(e > last_e + 1e-10);
            (last_f, last_e) = (f, e);
        }
    }
    Ok((violations == 0, format!("{violations} violations")))
}

fn prepared_states_normalized() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let (spec, _) = chain(PHASES[(seed % 2) as usize], 8.5)?;
        let psi = prepare_state(&spec, &random_theta(seed)?)?;
        worst = worst.max((psi.norm() - 1.0).abs());
    }
    Ok((worst < 1e-12, format!("max |norm - 1| {worst:.2e}")))
}

fn central(f: impl Fn(&[f64]) -> Result<f64>, theta: &[f64], k: usize) -> Result<f64> {
    let h = 1e-5;
    let mut x = theta.to_vec();
    x[k] = theta[k] + h;
    let plus = f(&x)?;
    x[k] = theta[k] - h;
    Ok((plus - f(&x)?) / (2.0 * h))
}

fn gradients_match_fd() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let (spec, h) = chain(PHASES[(seed % 2) as usize], 8.5)?;
        let curr = random_theta(100 + seed)?;
        let next = random_theta(200 + seed)?;
        let g = step_cost_gradient(&spec, &h, &next, &curr, 0.005)?;
        let (_, ge) = energy_gradient(&spec, &h, &next)?;
        for k in 0..8 {
            let fd = central(|x| step_cost(&spec, &h, x, &curr, 0.005), &next, k)?;
            let fe = central(|x| Ok(energy_gradient(&spec, &h, x)?.0), &next, k)?;
            worst = worst.max((g[k] - fd).abs()).max((ge[k] - fe).abs());
        }
    }
    Ok((worst < 1e-6, format!("max deviation {worst:.2e}")))
}

fn mclachlan_consistent() -> Result<(bool, String)> {
    let (mut asym, mut min_eig, mut c_gap) = (0.0f64, f64::INFINITY, 0.0f64);
    for seed in 0..5 {
        let (spec, h) = chain(PHASES[(seed % 2) as usize], 8.5)?;
        let theta = random_theta(300 + seed)?;
        let a = mclachlan_a(&spec, &theta)?;
        asym = asym.max((&a - a.transpose()).amax());
        min_eig = min_eig.min(a.symmetric_eigenvalues().min());
        let c1 = mclachlan_c(&spec, &h, &theta)?;
        let c2 = mclachlan_c_expanded(&spec, &h, &theta)?;
        for (x, y) in c1.iter().zip(&c2) {
            c_gap = c_gap.max((x - y).abs());
        }
    }
    let ok = asym < 1e-12 && min_eig >= -1e-10 && c_gap < 1e-10;
    Ok((
        ok,
        format!("asymmetry {asym:.2e}, min eigenvalue {min_eig:.2e}, C paths {c_gap:.2e}"),
    ))
}

fn channels_valid() -> Result<(bool, String)> {
    let (spec, _) = chain(PHASES[0], 8.5)?;
    let rho = prepare_state(&spec, &random_theta(7)?)?.projector();
    for p in [0.0, 1e-4, 1e-2, 0.75, 1.0] {
        for q in 0..4 {
            apply_depolarizing(&rho, q, p)?.validate()?;
        }
        apply_global_depolarizing(&rho, p)?.validate()?;
    }
    Ok((true, "trace, Hermiticity and positivity hold".into()))
}

fn noisy_circuits_valid() -> Result<(bool, String)> {
    let (spec, h) = chain(PHASES[1], 11.0)?;
    let ground = GroundTruth::from_hamiltonian(&h)?;
    let theta = random_theta(8)?;
    for p in [0.0, 1e-4, 1e-2] {
        let rho = prepare_state_noisy(&spec, &theta, p)?;
        rho.validate()?;
        let f = ground.fidelity_mixed(&rho)?;
        if !(-1e-12..=1.0 + 1e-12).contains(&f) {
            return Ok((false, format!("fidelity {f} at p = {p}")));
        }
    }
    Ok((true, "valid outputs for p in {0, 1e-4, 1e-2}".into()))
}

fn evolution_deterministic() -> Result<(bool, String)> {
    let (spec, h) = chain(PHASES[0], 8.5)?;
    let cfg = EvolutionConfig {
        n_steps: 3,
        optimizer: OptimizerKind::Bfgs,
        noise_p: 1e-3,
        n_trajectories: 2,
        seed: 11,
        ..Default::default()
    };
    let a = run_qgf_evolution(&spec, &h, &cfg, &ParameterInit::RandomUniform)?;
    let b = run_qgf_evolution(&spec, &h, &cfg, &ParameterInit::RandomUniform)?;
    Ok((a == b, "two identical seeded runs compared".into()))
}
