//! Step costs, inner optimizers, the McLachlan flow and the evolution drivers.

mod cost;
mod evolution;
mod mclachlan;
mod optimizer;

pub use cost::{step_cost, step_cost_gradient, StepObjective, MODULUS_FLOOR};
pub use evolution::{
    energy_gradient, initial_parameters, optimize_step, run_baseline_vqe, run_baseline_vqe_with,
    run_qgf_evolution, run_qgf_evolution_with, EvolutionConfig, ParameterInit, StepRecord,
    TrajectoryRecord,
};
pub use mclachlan::{
    mclachlan_a, mclachlan_c, mclachlan_c_expanded, mclachlan_update, mclachlan_update_signed,
    solve_flow,
};
pub use optimizer::{minimize, AdamParams, InnerOutcome, InnerSettings, Objective, OptimizerKind};
