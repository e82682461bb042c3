//! RiverSwim: a chain of `K` states. Swimming left always succeeds; swimming
//! right fails with a state-dependent probability, and a failed attempt either
//! stays put or slips one state to the left.

use crate::error::{Error, Result};
use crate::mdp::{ScalarParamFamily, TabularMdp};

pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct RiverSwimConfig {
    pub n_states: usize,
    /// Fail probability `P1` of the hard states.
    pub fail_high: f64,
    /// Fail probability `P2` of the easy states.
    pub fail_low: f64,
    /// Share of a failed right attempt that slips one state left; the rest stays.
    pub slip_left: f64,
    pub left_reward: f64,
    pub right_reward: f64,
    /// Number of left-end states that keep `P1` under the second parameter.
    pub contradicting_prefix: usize,
    /// Scalar values attached to the two parameters.
    pub theta_values: [f64; 2],
}

impl Default for RiverSwimConfig {
    fn default() -> Self {
        Self {
            n_states: 20,
            fail_high: 0.8,
            fail_low: 0.1,
            slip_left: 0.5,
            left_reward: 5.0,
            right_reward: 10_000.0,
            contradicting_prefix: 5,
            theta_values: [1.0, 2.0],
        }
    }
}

impl RiverSwimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_states < 2 {
            return Err(Error::validation("RiverSwim needs at least 2 states"));
        }
        if !(0.0 < self.fail_low && self.fail_low < self.fail_high && self.fail_high < 1.0) {
            return Err(Error::validation(format!(
                "need 0 < fail_low < fail_high < 1, got {} and {}",
                self.fail_low, self.fail_high
            )));
        }
        if !(0.0..=1.0).contains(&self.slip_left) {
            return Err(Error::validation(format!(
                "slip_left {} outside [0, 1]",
                self.slip_left
            )));
        }
        if self.contradicting_prefix >= self.n_states {
            return Err(Error::validation(format!(
                "contradicting_prefix {} must be below n_states {}",
                self.contradicting_prefix, self.n_states
            )));
        }
        if !self.left_reward.is_finite() || !self.right_reward.is_finite() {
            return Err(Error::validation("rewards must be finite"));
        }
        if self.theta_values[0] == self.theta_values[1] {
            return Err(Error::validation("theta values must be distinct"));
        }
        Ok(())
    }

    /// Per-state fail probability under parameter 1 or 2.
    pub fn fail_probs(&self, theta_index: usize) -> Result<Vec<f64>> {
        match theta_index {
            1 => Ok(vec![self.fail_high; self.n_states]),
            2 => Ok((0..self.n_states)
                .map(|s| {
                    if s < self.contradicting_prefix {
                        self.fail_high
                    } else {
                        self.fail_low
                    }
                })
                .collect()),
            other => Err(Error::validation(format!(
                "RiverSwim theta index must be 1 or 2, got {other}"
            ))),
        }
    }

    /// Tabular model with the given per-state fail probabilities.
    pub fn build_with_fail_probs(&self, fail: &[f64]) -> Result<TabularMdp> {
        self.validate()?;
        let k = self.n_states;
        if fail.len() != k {
            return Err(Error::dimension("one fail probability per state required"));
        }
        let mut transition = vec![0.0; k * 2 * k];
        let idx = |s: usize, a: usize, n: usize| (s * 2 + a) * k + n;
        for s in 0..k {
            transition[idx(s, LEFT, s.saturating_sub(1))] = 1.0;

            let p = fail[s];
            transition[idx(s, RIGHT, (s + 1).min(k - 1))] += 1.0 - p;
            if s == 0 {
                transition[idx(s, RIGHT, s)] += p;
            } else {
                transition[idx(s, RIGHT, s)] += p * (1.0 - self.slip_left);
                transition[idx(s, RIGHT, s - 1)] += p * self.slip_left;
            }
        }
        let mut reward = vec![0.0; k * 2];
        reward[LEFT] = self.left_reward;
        reward[(k - 1) * 2 + RIGHT] = self.right_reward;
        TabularMdp::new(k, 2, transition, reward)
    }
}

/// Builds the RiverSwim model for parameter `theta_index` (1 or 2).
pub fn build_riverswim(config: &RiverSwimConfig, theta_index: usize) -> Result<TabularMdp> {
    let fail = config.fail_probs(theta_index)?;
    config.build_with_fail_probs(&fail)
}

/// The two-point scalar family `{theta_1, theta_2}`.
pub fn build_scalar_family(config: &RiverSwimConfig) -> Result<ScalarParamFamily> {
    let models = vec![build_riverswim(config, 1)?, build_riverswim(config, 2)?];
    ScalarParamFamily::new(config.theta_values.to_vec(), models)
}
