//! Inner-loop optimizers with a best-seen return and a stall rule.

use serde::{Deserialize, Serialize};

use crate::error::{QgfError, Result};

/// A differentiable scalar function of the circuit angles.
pub trait Objective {
    fn dim(&self) -> usize;
    fn value(&mut self, x: &[f64]) -> Result<f64>;
    fn value_and_gradient(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)>;
}

/// Parameter-update rule of an evolution step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    GradientDescent,
    Adam,
    /// Quasi-Newton with an inverse-Hessian estimate and Armijo backtracking.
    Bfgs,
    /// Direct linear-system update; not an iterative minimizer.
    Mclachlan,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerSettings {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub max_iterations: usize,
    pub stall_tolerance: f64,
    pub adam: AdamParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerOutcome {
    /// Best point seen, including the start.
    pub theta: Vec<f64>,
    pub value: f64,
    pub initial_value: f64,
    pub iterations: usize,
    pub stalled: bool,
}

const ARMIJO_C: f64 = 1e-4;
const MIN_STEP: f64 = 1e-8;

/// Minimizes `obj` from `x0` for at most `settings.max_iterations` updates,
/// stopping once an update improves the value by less than the stall tolerance.
pub fn minimize<O: Objective + ?Sized>(
    obj: &mut O,
    x0: &[f64],
    settings: &InnerSettings,
) -> Result<InnerOutcome> {
    if x0.len() != obj.dim() {
        return Err(QgfError::DimensionMismatch {
            expected: obj.dim(),
            found: x0.len(),
        });
    }
    match settings.kind {
        OptimizerKind::GradientDescent | OptimizerKind::Adam => first_order(obj, x0, settings),
        OptimizerKind::Bfgs => bfgs(obj, x0, settings),
        OptimizerKind::Mclachlan => Err(QgfError::InvalidParameter(
            "mclachlan is an update rule, not an inner optimizer".into(),
        )),
    }
}

fn first_order<O: Objective + ?Sized>(
    obj: &mut O,
    x0: &[f64],
    s: &InnerSettings,
) -> Result<InnerOutcome> {
    let n = x0.len();
    let (f0, mut g) = obj.value_and_gradient(x0)?;
    let mut x = x0.to_vec();
    let mut best = (f0, x.clone());
    let mut prev = f0;
    let (mut m, mut v) = (vec![0.0; n], vec![0.0; n]);
    let mut iterations = 0;
    let mut stalled = false;
    for it in 0..s.max_iterations {
        iterations = it + 1;
        match s.kind {
            OptimizerKind::Adam => {
                let AdamParams {
                    beta1,
                    beta2,
                    epsilon,
                } = s.adam;
                let t = (it + 1) as i32;
                for k in 0..n {
                    m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
                    v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
                    let m_hat = m[k] / (1.0 - beta1.powi(t));
                    let v_hat = v[k] / (1.0 - beta2.powi(t));
                    x[k] -= s.learning_rate * m_hat / (v_hat.sqrt() + epsilon);
                }
            }
            _ => x
                .iter_mut()
                .zip(&g)
                .for_each(|(xk, gk)| *xk -= s.learning_rate * gk),
        }
        let (f, grad) = obj.value_and_gradient(&x)?;
        g = grad;
        if f < best.0 {
            best = (f, x.clone());
        }
        if prev - f < s.stall_tolerance {
            stalled = true;
            break;
        }
        prev = f;
    }
    Ok(InnerOutcome {
        theta: best.1,
        value: best.0,
        initial_value: f0,
        iterations,
        stalled,
    })
}

fn bfgs<O: Objective + ?Sized>(obj: &mut O, x0: &[f64], s: &InnerSettings) -> Result<InnerOutcome> {
    let n = x0.len();
    let identity = |n: usize| {
        let mut m = vec![0.0; n * n];
        (0..n).for_each(|i| m[i * n + i] = 1.0);
        m
    };
    let (f0, mut g) = obj.value_and_gradient(x0)?;
    let mut x = x0.to_vec();
    let mut f = f0;
    let mut hinv = identity(n);
    let mut iterations = 0;
    let mut stalled = false;
    for it in 0..s.max_iterations {
        iterations = it + 1;
        let mut d: Vec<f64> = (0..n)
            .map(|i| -(0..n).map(|j| hinv[i * n + j] * g[j]).sum::<f64>())
            .collect();
        let mut slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            hinv = identity(n);
            d = g.iter().map(|v| -v).collect();
            slope = -g.iter().map(|v| v * v).sum::<f64>();
        }
        let mut alpha = 1.0;
        let (x_new, f_new) = loop {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + alpha * b).collect();
            let ft = obj.value(&trial)?;
            if ft <= f + ARMIJO_C * alpha * slope || alpha < MIN_STEP {
                break (trial, ft);
            }
            alpha *= 0.5;
        };
        if f_new >= f {
            stalled = true;
            break;
        }
        let (_, g_new) = obj.value_and_gradient(&x_new)?;
        let step: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let dg: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = step.iter().zip(&dg).map(|(a, b)| a * b).sum();
        if sy > 1e-12 {
            // H <- (I - r s y^T) H (I - r y s^T) + r s s^T
            let r = 1.0 / sy;
            let hy: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| hinv[i * n + j] * dg[j]).sum())
                .collect();
            let yhy: f64 = dg.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..n {
                for j in 0..n {
                    hinv[i * n + j] += -r * (step[i] * hy[j] + hy[i] * step[j])
                        + (r * r * yhy + r) * step[i] * step[j];
                }
            }
        }
        let improvement = f - f_new;
        x = x_new;
        f = f_new;
        g = g_new;
        if improvement < s.stall_tolerance {
            stalled = true;
            break;
        }
    }
    Ok(InnerOutcome {
        theta: x,
        value: f,
        initial_value: f0,
        iterations,
        stalled,
    })
}
