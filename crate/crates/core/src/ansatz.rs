//! QAOA trial states for the Ising chain.
//!
//! Layer `l` applies `exp(-i theta[2l+1] h_zz)` followed by
//! `exp(-i theta[2l] h_x)`. Each generator is a sum of mutually commuting
//! Pauli strings, so a layer is executed exactly as one single-string
//! rotation per term. Noise sites sit after every such rotation.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, QgfError, Result};
use crate::hamiltonian::{as_dense_matrix, PauliSumHamiltonian, TfimParameters};
use crate::noise::{self, check_probability, NoiseMode, NoiseModel};
use crate::state::{dot, DensityMatrix, Pauli, PauliMask, StateVector, I, ZERO};

/// Named initial-state preparations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialStateKind {
    /// `Z H |0>` on every qubit, i.e. `|->^n`.
    Ferromagnetic,
    /// GHZ from a Hadamard and a CNOT chain, then `Z` on every qubit.
    Paramagnetic,
}

impl InitialStateKind {
    pub fn name(self) -> &'static str {
        match self {
            InitialStateKind::Ferromagnetic => "ferromagnetic",
            InitialStateKind::Paramagnetic => "paramagnetic",
        }
    }

    pub fn other(self) -> Self {
        match self {
            InitialStateKind::Ferromagnetic => InitialStateKind::Paramagnetic,
            InitialStateKind::Paramagnetic => InitialStateKind::Ferromagnetic,
        }
    }
}

impl fmt::Display for InitialStateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InitialStateKind {
    type Err = QgfError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ferromagnetic" | "ferro" => Ok(InitialStateKind::Ferromagnetic),
            "paramagnetic" | "para" => Ok(InitialStateKind::Paramagnetic),
            other => Err(QgfError::UnknownInitialState(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Named(InitialStateKind),
    /// A caller-supplied normalized state, prepared without gates.
    Custom(StateVector),
}

impl From<InitialStateKind> for InitialState {
    fn from(kind: InitialStateKind) -> Self {
        InitialState::Named(kind)
    }
}

/// Gates of the initial-state circuit acting on `|0...0>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrepGate {
    Hadamard(usize),
    Cnot { control: usize, target: usize },
    Z(usize),
}

impl PrepGate {
    fn qubits(&self) -> Vec<usize> {
        match *self {
            PrepGate::Hadamard(q) | PrepGate::Z(q) => vec![q],
            PrepGate::Cnot { control, target } => vec![control, target],
        }
    }

    fn apply(&self, n_qubits: usize, v: &mut [Complex64]) {
        let bit = |q: usize| 1usize << (n_qubits - 1 - q);
        match *self {
            PrepGate::Hadamard(q) => {
                let m = bit(q);
                for b in 0..v.len() {
                    if b & m == 0 {
                        let (a0, a1) = (v[b], v[b | m]);
                        v[b] = (a0 + a1) * FRAC_1_SQRT_2;
                        v[b | m] = (a0 - a1) * FRAC_1_SQRT_2;
                    }
                }
            }
            PrepGate::Cnot { control, target } => {
                let (c, t) = (bit(control), bit(target));
                for b in 0..v.len() {
                    if b & c != 0 && b & t == 0 {
                        v.swap(b, b | t);
                    }
                }
            }
            PrepGate::Z(q) => {
                let m = bit(q);
                for (b, a) in v.iter_mut().enumerate() {
                    if b & m != 0 {
                        *a = -*a;
                    }
                }
            }
        }
    }
}

pub fn preparation_gates(kind: InitialStateKind, n_qubits: usize) -> Vec<PrepGate> {
    match kind {
        InitialStateKind::Ferromagnetic => (0..n_qubits)
            .flat_map(|q| [PrepGate::Hadamard(q), PrepGate::Z(q)])
            .collect(),
        InitialStateKind::Paramagnetic => {
            let mut gates = vec![PrepGate::Hadamard(0)];
            gates.extend((0..n_qubits - 1).map(|q| PrepGate::Cnot {
                control: q,
                target: q + 1,
            }));
            gates.extend((0..n_qubits).map(PrepGate::Z));
            gates
        }
    }
}

pub fn prepare_initial(kind: InitialStateKind, n_qubits: usize) -> Result<StateVector> {
    if n_qubits < 2 {
        return Err(QgfError::InvalidParameter(format!(
            "initial states need at least 2 qubits, got {n_qubits}"
        )));
    }
    let mut psi = StateVector::basis(n_qubits, 0);
    for g in preparation_gates(kind, n_qubits) {
        g.apply(n_qubits, psi.amplitudes_mut());
    }
    Ok(psi)
}

/// One elementary factor `exp(-i theta[param] coefficient P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    pub param: usize,
    pub coefficient: f64,
    pub mask: PauliMask,
    pub qubits: Vec<usize>,
}

impl Rotation {
    #[inline]
    fn apply(&self, theta: &[f64], v: &mut [Complex64]) {
        self.mask
            .rotate_inplace(theta[self.param] * self.coefficient, v);
    }

    #[inline]
    fn apply_inverse(&self, theta: &[f64], v: &mut [Complex64]) {
        self.mask
            .rotate_inplace(-theta[self.param] * self.coefficient, v);
    }
}

/// Fixed QAOA circuit: generators, depth and initial state.
#[derive(Debug, Clone)]
pub struct AnsatzSpec {
    n_qubits: usize,
    layers: usize,
    generator_zz: PauliSumHamiltonian,
    generator_x: PauliSumHamiltonian,
    initial: InitialState,
    /// Apply the noise channel after preparation gates as well.
    pub noisy_preparation: bool,
    prep_gates: Vec<PrepGate>,
    initial_state: StateVector,
    rotations: Vec<Rotation>,
}

impl AnsatzSpec {
    pub fn new(
        generator_zz: PauliSumHamiltonian,
        generator_x: PauliSumHamiltonian,
        layers: usize,
        initial: InitialState,
    ) -> Result<Self> {
        let n_qubits = generator_zz.n_qubits();
        check_dim(n_qubits, generator_x.n_qubits())?;
        if layers == 0 {
            return Err(QgfError::InvalidParameter(
                "ansatz needs at least one layer".into(),
            ));
        }
        if generator_zz.has_identity_term() || generator_x.has_identity_term() {
            return Err(QgfError::InvalidParameter(
                "ansatz generators must not contain identity terms".into(),
            ));
        }
        for (name, g) in [("zz", &generator_zz), ("x", &generator_x)] {
            if !commutes_pairwise(g) {
                return Err(QgfError::InvalidParameter(format!(
                    "{name} generator terms do not commute"
                )));
            }
        }
        let (prep_gates, initial_state) = match &initial {
            InitialState::Named(kind) => (
                preparation_gates(*kind, n_qubits),
                prepare_initial(*kind, n_qubits)?,
            ),
            InitialState::Custom(psi) => {
                check_dim(n_qubits, psi.n_qubits())?;
                if !psi.is_normalized() {
                    return Err(QgfError::NotNormalized { norm: psi.norm() });
                }
                (Vec::new(), psi.clone())
            }
        };
        let mut rotations = Vec::new();
        for layer in 0..layers {
            for (param, g) in [(2 * layer + 1, &generator_zz), (2 * layer, &generator_x)] {
                for t in g.terms() {
                    rotations.push(Rotation {
                        param,
                        coefficient: t.coefficient,
                        mask: t.mask(),
                        qubits: t.support(),
                    });
                }
            }
        }
        Ok(Self {
            n_qubits,
            layers,
            generator_zz,
            generator_x,
            initial,
            noisy_preparation: false,
            prep_gates,
            initial_state,
            rotations,
        })
    }

    /// QAOA over the two term groups of the Ising chain (the shift is excluded).
    pub fn for_tfim(model: &TfimParameters, layers: usize, initial: InitialState) -> Result<Self> {
        Self::new(model.zz_part()?, model.x_part()?, layers, initial)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn n_params(&self) -> usize {
        2 * self.layers
    }

    pub fn initial(&self) -> &InitialState {
        &self.initial
    }

    pub fn initial_state(&self) -> &StateVector {
        &self.initial_state
    }

    pub fn rotations(&self) -> &[Rotation] {
        &self.rotations
    }

    /// Generator multiplying `theta[k]`.
    pub fn generator(&self, k: usize) -> Result<&PauliSumHamiltonian> {
        self.check_index(k)?;
        Ok(if k % 2 == 0 {
            &self.generator_x
        } else {
            &self.generator_zz
        })
    }

    /// Number of single-qubit noise sites per circuit execution.
    pub fn noise_site_count(&self) -> usize {
        let rot: usize = self.rotations.iter().map(|r| r.qubits.len()).sum();
        let prep: usize = if self.noisy_preparation {
            self.prep_gates.iter().map(|g| g.qubits().len()).sum()
        } else {
            0
        };
        rot + prep
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params() {
            return Err(QgfError::DimensionMismatch {
                expected: self.n_params(),
                found: theta.len(),
            });
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(QgfError::InvalidParameter(
                "non-finite circuit angle".into(),
            ));
        }
        Ok(())
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k < self.n_params() {
            Ok(())
        } else {
            Err(QgfError::IndexOutOfRange {
                index: k,
                len: self.n_params(),
            })
        }
    }

    fn start(&self, noise: &NoiseRealization) -> Vec<Complex64> {
        match noise.after_prep.iter().any(Option::is_some) {
            false => self.initial_state.amplitudes().to_vec(),
            true => {
                let mut v = StateVector::basis(self.n_qubits, 0).into_amplitudes();
                for (g, err) in self.prep_gates.iter().zip(&noise.after_prep) {
                    g.apply(self.n_qubits, &mut v);
                    if let Some(m) = err {
                        m.apply_inplace(&mut v);
                    }
                }
                v
            }
        }
    }
}

fn commutes_pairwise(g: &PauliSumHamiltonian) -> bool {
    let masks: Vec<PauliMask> = g.terms().iter().map(|t| t.mask()).collect();
    masks.iter().enumerate().all(|(i, a)| {
        masks[i + 1..]
            .iter()
            .all(|b| ((a.x & b.z).count_ones() + (a.z & b.x).count_ones()) % 2 == 0)
    })
}

/// A sampled set of Pauli errors: at most one Pauli string after each
/// preparation gate and each rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRealization {
    after_prep: Vec<Option<PauliMask>>,
    after_rotation: Vec<Option<PauliMask>>,
}

impl NoiseRealization {
    pub fn noiseless(spec: &AnsatzSpec) -> Self {
        Self {
            after_prep: vec![None; spec.prep_gates.len()],
            after_rotation: vec![None; spec.rotations.len()],
        }
    }

    /// Draws one Kraus branch per noise site.
    pub fn sample<R: Rng + ?Sized>(spec: &AnsatzSpec, model: NoiseModel, rng: &mut R) -> Self {
        let n = spec.n_qubits;
        let mut draw = |qubits: &[usize]| -> Option<PauliMask> {
            match model.mode {
                NoiseMode::PerQubit => {
                    let mut letters = vec![Pauli::I; n];
                    for &q in qubits {
                        letters[q] = noise::draw_pauli(model.p, rng);
                    }
                    let m = PauliMask::from_letters(&letters);
                    (!m.is_identity()).then_some(m)
                }
                NoiseMode::Global => noise::draw_global(n, model.p, rng)
                    .map(|letters| PauliMask::from_letters(&letters)),
            }
        };
        let after_prep = if spec.noisy_preparation {
            spec.prep_gates.iter().map(|g| draw(&g.qubits())).collect()
        } else {
            vec![None; spec.prep_gates.len()]
        };
        let after_rotation = spec.rotations.iter().map(|r| draw(&r.qubits)).collect();
        Self {
            after_prep,
            after_rotation,
        }
    }

    pub fn error_count(&self) -> usize {
        self.after_prep
            .iter()
            .chain(&self.after_rotation)
            .filter(|e| e.is_some())
            .count()
    }
}

/// `|psi(theta)>` for the noiseless circuit.
pub fn prepare_state(spec: &AnsatzSpec, theta: &[f64]) -> Result<StateVector> {
    spec.check_theta(theta)?;
    Ok(run_circuit(spec, theta, &NoiseRealization::noiseless(spec)))
}

/// `|psi(theta)>` with the Pauli errors of `noise` inserted.
pub fn prepare_state_with(
    spec: &AnsatzSpec,
    theta: &[f64],
    noise: &NoiseRealization,
) -> Result<StateVector> {
    spec.check_theta(theta)?;
    Ok(run_circuit(spec, theta, noise))
}

fn run_circuit(spec: &AnsatzSpec, theta: &[f64], noise: &NoiseRealization) -> StateVector {
    let mut v = spec.start(noise);
    for (rot, err) in spec.rotations.iter().zip(&noise.after_rotation) {
        rot.apply(theta, &mut v);
        if let Some(m) = err {
            m.apply_inplace(&mut v);
        }
    }
    StateVector::new(spec.n_qubits, v).expect("circuit preserves dimension")
}

/// `d|psi(theta)>/d theta_k`, obtained by inserting `-i c P` after every
/// rotation factor driven by `theta_k`.
pub fn differential_state(spec: &AnsatzSpec, theta: &[f64], k: usize) -> Result<StateVector> {
    spec.check_theta(theta)?;
    spec.check_index(k)?;
    let mut all = differential_states_with(spec, theta, &NoiseRealization::noiseless(spec))?;
    Ok(all.swap_remove(k))
}

/// All differential states at once, for a fixed error realization.
pub fn differential_states_with(
    spec: &AnsatzSpec,
    theta: &[f64],
    noise: &NoiseRealization,
) -> Result<Vec<StateVector>> {
    spec.check_theta(theta)?;
    let d = 1usize << spec.n_qubits;
    let mut psi = spec.start(noise);
    let mut derivs = vec![vec![ZERO; d]; spec.n_params()];
    let mut scratch = vec![ZERO; d];
    for (rot, err) in spec.rotations.iter().zip(&noise.after_rotation) {
        rot.apply(theta, &mut psi);
        for dv in derivs.iter_mut() {
            rot.apply(theta, dv);
        }
        rot.mask
            .apply_into(-I * rot.coefficient, &psi, &mut scratch);
        for (a, s) in derivs[rot.param].iter_mut().zip(&scratch) {
            *a += s;
        }
        if let Some(m) = err {
            m.apply_inplace(&mut psi);
            for dv in derivs.iter_mut() {
                m.apply_inplace(dv);
            }
        }
    }
    derivs
        .into_iter()
        .map(|v| StateVector::new(spec.n_qubits, v))
        .collect()
}

/// Returns `z = <psi(theta)|chi>` and `dz_k = <d_k psi(theta)|chi>` with one
/// forward and one reverse sweep through the circuit.
pub fn overlap_gradient(
    spec: &AnsatzSpec,
    theta: &[f64],
    noise: &NoiseRealization,
    chi: &[Complex64],
) -> Result<(Complex64, Vec<Complex64>)> {
    spec.check_theta(theta)?;
    let d = 1usize << spec.n_qubits;
    check_dim(d, chi.len())?;
    let mut phi = run_circuit(spec, theta, noise).into_amplitudes();
    let z = dot(&phi, chi);
    let mut lambda = chi.to_vec();
    let mut scratch = vec![ZERO; d];
    let mut grad = vec![ZERO; spec.n_params()];
    for (rot, err) in spec.rotations.iter().zip(&noise.after_rotation).rev() {
        if let Some(m) = err {
            m.apply_inplace(&mut phi);
            m.apply_inplace(&mut lambda);
        }
        // <(-i c P) phi | lambda> = i c <phi| P |lambda>
        rot.mask
            .apply_into(Complex64::new(1.0, 0.0), &lambda, &mut scratch);
        grad[rot.param] += I * rot.coefficient * dot(&phi, &scratch);
        rot.apply_inverse(theta, &mut phi);
        rot.apply_inverse(theta, &mut lambda);
    }
    Ok((z, grad))
}

/// Density matrix of the circuit with depolarizing noise after every rotation
/// on the qubits it touches.
pub fn prepare_state_noisy(spec: &AnsatzSpec, theta: &[f64], p: f64) -> Result<DensityMatrix> {
    prepare_state_noisy_with(spec, theta, NoiseModel::per_qubit(p)?)
}

pub fn prepare_state_noisy_with(
    spec: &AnsatzSpec,
    theta: &[f64],
    model: NoiseModel,
) -> Result<DensityMatrix> {
    spec.check_theta(theta)?;
    check_probability(model.p)?;
    let mut rho = initial_density(spec, model)?;
    for rot in &spec.rotations {
        rho.conjugate_with(|v| rot.apply(theta, v));
        apply_site_noise(&mut rho, &rot.qubits, model)?;
    }
    Ok(rho)
}

fn initial_density(spec: &AnsatzSpec, model: NoiseModel) -> Result<DensityMatrix> {
    if !(spec.noisy_preparation && model.p > 0.0) || spec.prep_gates.is_empty() {
        return Ok(spec.initial_state.projector());
    }
    let mut rho = StateVector::basis(spec.n_qubits, 0).projector();
    for g in &spec.prep_gates {
        rho.conjugate_with(|v| g.apply(spec.n_qubits, v));
        apply_site_noise(&mut rho, &g.qubits(), model)?;
    }
    Ok(rho)
}

fn apply_site_noise(rho: &mut DensityMatrix, qubits: &[usize], model: NoiseModel) -> Result<()> {
    if model.p == 0.0 {
        return Ok(());
    }
    match model.mode {
        NoiseMode::PerQubit => {
            for &q in qubits {
                noise::depolarize_inplace(rho, q, model.p)?;
            }
        }
        NoiseMode::Global => noise::global_depolarize_inplace(rho, model.p)?,
    }
    Ok(())
}

/// Heisenberg-picture adjoint of the site noise; both channels are self-dual
/// up to the trace factor of the global channel.
fn apply_site_noise_adjoint(
    obs: &mut DensityMatrix,
    qubits: &[usize],
    model: NoiseModel,
) -> Result<()> {
    if model.p == 0.0 {
        return Ok(());
    }
    match model.mode {
        NoiseMode::PerQubit => {
            for &q in qubits {
                noise::depolarize_inplace(obs, q, model.p)?;
            }
        }
        NoiseMode::Global => {
            let tr = obs.trace().re;
            let flat = DensityMatrix::maximally_mixed(obs.n_qubits());
            obs.combine(1.0 - model.p, model.p * tr, &flat);
        }
    }
    Ok(())
}

/// `Tr(H rho(theta))` and its gradient for the noisy density-matrix circuit.
pub fn noisy_energy_gradient(
    spec: &AnsatzSpec,
    h: &PauliSumHamiltonian,
    theta: &[f64],
    model: NoiseModel,
) -> Result<(f64, Vec<f64>)> {
    spec.check_theta(theta)?;
    check_dim(spec.n_qubits, h.n_qubits())?;
    check_probability(model.p)?;
    let mut rho = initial_density(spec, model)?;
    let mut after_rotation = Vec::with_capacity(spec.rotations.len());
    for rot in &spec.rotations {
        rho.conjugate_with(|v| rot.apply(theta, v));
        after_rotation.push(rho.clone());
        apply_site_noise(&mut rho, &rot.qubits, model)?;
    }
    let dense = as_dense_matrix(h)?;
    let d = dense.nrows();
    let mut entries = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            entries.push(dense[(i, j)]);
        }
    }
    let mut obs = DensityMatrix::from_entries(spec.n_qubits, entries)?;
    let energy = obs.trace_product(&rho).re;
    let mut grad = vec![0.0; spec.n_params()];
    for (rot, rho_f) in spec.rotations.iter().zip(&after_rotation).rev() {
        apply_site_noise_adjoint(&mut obs, &rot.qubits, model)?;
        // d/dtheta Tr(O R rho R^dag) = Tr(O (-i c) [P, rho])
        let mut p_rho = rho_f.clone();
        p_rho.left_apply(|v| rot.mask.apply_inplace(v));
        let mut rho_p = rho_f.clone();
        rho_p.right_apply_adjoint(|v| rot.mask.apply_inplace(v));
        let comm = obs.trace_product(&p_rho) - obs.trace_product(&rho_p);
        grad[rot.param] += (-I * rot.coefficient * comm).re;
        obs.conjugate_with(|v| rot.apply_inverse(theta, v));
    }
    Ok((energy, grad))
}

/// One pure-state trajectory of the noisy circuit.
pub fn sample_trajectory<R: Rng + ?Sized>(
    spec: &AnsatzSpec,
    theta: &[f64],
    p: f64,
    rng: &mut R,
) -> Result<StateVector> {
    let model = NoiseModel::per_qubit(p)?;
    spec.check_theta(theta)?;
    let noise = NoiseRealization::sample(spec, model, rng);
    Ok(run_circuit(spec, theta, &noise))
}
