//! Benchmark environments and their simulators.

pub mod lq;
pub mod poi;
pub mod riverswim;

pub use lq::{lq_step, LqSystem};
pub use poi::{poi_reward, poi_transition_probs, PoiFamily, PoiModel};
pub use riverswim::{build_riverswim, build_scalar_family, RiverSwimConfig, LEFT, RIGHT};

use crate::error::Result;
use crate::mdp::TabularMdp;
use crate::rng::{sample_unchecked, SimRng};

/// How the realized reward of a tabular step is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewardKind {
    /// `r(s, a)` from the model's reward table.
    Table,
    /// 1 when the next state equals the action (recommendation followed).
    FollowIndicator,
}

/// Simulator for a tabular environment with a fixed true model.
#[derive(Debug, Clone)]
pub struct TabularEnv {
    pub model: TabularMdp,
    pub reward_kind: RewardKind,
    pub initial_state: usize,
}

impl TabularEnv {
    pub fn new(model: TabularMdp, reward_kind: RewardKind, initial_state: usize) -> Result<Self> {
        model.check_state(initial_state)?;
        Ok(Self {
            model,
            reward_kind,
            initial_state,
        })
    }

    /// Samples the next state and realized reward for `(s, a)`.
    pub fn step(&self, s: usize, a: usize, rng: &mut SimRng) -> Result<(usize, f64)> {
        self.model.check_state(s)?;
        self.model.check_action(a)?;
        let next = sample_unchecked(self.model.row(s, a), rng);
        let reward = match self.reward_kind {
            RewardKind::Table => self.model.reward(s, a),
            RewardKind::FollowIndicator => poi_reward(a, next),
        };
        Ok((next, reward))
    }
}
