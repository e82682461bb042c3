//! Exact planners: relative value iteration for tabular models, Riccati
//! iteration for linear-quadratic control.

pub mod dare;
pub mod rvi;

pub use dare::{feedback_gain, riccati_map, solve_dare, LqSolution};
pub use rvi::{relative_value_iteration, relative_value_iteration_best_effort, span, AvgRewardSolution, DEFAULT_MAX_ITER, DEFAULT_TOL};

use crate::error::Result;
use crate::mdp::TabularMdp;

/// Solves with the default tolerance and iteration budget.
pub fn plan(mdp: &TabularMdp) -> Result<AvgRewardSolution> {
    relative_value_iteration(mdp, DEFAULT_TOL, DEFAULT_MAX_ITER)
}
