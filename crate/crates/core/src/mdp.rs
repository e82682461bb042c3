//! Shared domain types: tabular MDPs, parameter families and run logs.

use crate::error::{Error, Result};

/// Tolerance for row-stochasticity of internally built models.
pub const STOCHASTIC_TOL: f64 = 1e-9;

/// Finite MDP with rewards. `transition` is laid out `[s][a][s']`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    n_states: usize,
    n_actions: usize,
    transition: Vec<f64>,
    reward: Vec<f64>,
}

impl TabularMdp {
    pub fn new(
        n_states: usize,
        n_actions: usize,
        transition: Vec<f64>,
        reward: Vec<f64>,
    ) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(Error::validation("MDP needs at least one state and one action"));
        }
        if transition.len() != n_states * n_actions * n_states {
            return Err(Error::dimension(format!(
                "transition has {} entries, expected {}",
                transition.len(),
                n_states * n_actions * n_states
            )));
        }
        if reward.len() != n_states * n_actions {
            return Err(Error::dimension(format!(
                "reward has {} entries, expected {}",
                reward.len(),
                n_states * n_actions
            )));
        }
        let mdp = Self {
            n_states,
            n_actions,
            transition,
            reward,
        };
        mdp.validate()?;
        Ok(mdp)
    }

    fn validate(&self) -> Result<()> {
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                let row = self.row(s, a);
                let mut sum = 0.0;
                for &p in row {
                    if !(0.0..=1.0).contains(&p) {
                        return Err(Error::validation(format!(
                            "P(.|{s},{a}) has entry {p} outside [0,1]"
                        )));
                    }
                    sum += p;
                }
                if (sum - 1.0).abs() > STOCHASTIC_TOL {
                    return Err(Error::validation(format!(
                        "P(.|{s},{a}) sums to {sum}"
                    )));
                }
                let r = self.reward(s, a);
                if !r.is_finite() {
                    return Err(Error::validation(format!("reward({s},{a}) = {r}")));
                }
            }
        }
        Ok(())
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    #[inline]
    pub fn row(&self, s: usize, a: usize) -> &[f64] {
        let start = (s * self.n_actions + a) * self.n_states;
        &self.transition[start..start + self.n_states]
    }

    #[inline]
    pub fn prob(&self, s: usize, a: usize, next: usize) -> f64 {
        self.row(s, a)[next]
    }

    #[inline]
    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.reward[s * self.n_actions + a]
    }

    pub fn rewards(&self) -> &[f64] {
        &self.reward
    }

    pub fn transitions(&self) -> &[f64] {
        &self.transition
    }

    pub fn check_state(&self, s: usize) -> Result<()> {
        if s >= self.n_states {
            return Err(Error::validation(format!(
                "state {s} out of range (n_states = {})",
                self.n_states
            )));
        }
        Ok(())
    }

    pub fn check_action(&self, a: usize) -> Result<()> {
        if a >= self.n_actions {
            return Err(Error::validation(format!(
                "action {a} out of range (n_actions = {})",
                self.n_actions
            )));
        }
        Ok(())
    }
}

/// A finite set of scalar parameters, each indexing a tabular model.
pub trait FiniteModelFamily: Send + Sync {
    fn support(&self) -> &[f64];
    fn model(&self, index: usize) -> &TabularMdp;

    fn len(&self) -> usize {
        self.support().len()
    }

    fn is_empty(&self) -> bool {
        self.support().is_empty()
    }
}

/// Scalar parameter family whose members share a reward table and differ only
/// in their dynamics.
#[derive(Debug, Clone)]
pub struct ScalarParamFamily {
    support: Vec<f64>,
    models: Vec<TabularMdp>,
}

impl ScalarParamFamily {
    pub fn new(support: Vec<f64>, models: Vec<TabularMdp>) -> Result<Self> {
        if support.is_empty() || support.len() != models.len() {
            return Err(Error::validation(format!(
                "family has {} support points and {} models",
                support.len(),
                models.len()
            )));
        }
        for (i, a) in support.iter().enumerate() {
            if !a.is_finite() {
                return Err(Error::validation(format!("support value {a} is not finite")));
            }
            if support[..i].contains(a) {
                return Err(Error::validation(format!("support value {a} repeated")));
            }
        }
        let first = &models[0];
        for m in &models[1..] {
            if m.n_states() != first.n_states() || m.n_actions() != first.n_actions() {
                return Err(Error::dimension("family members differ in shape"));
            }
            if m.rewards() != first.rewards() {
                return Err(Error::validation("family members differ in rewards"));
            }
        }
        Ok(Self { support, models })
    }

    /// The model for the parameter value `theta`, if it is in the support.
    pub fn build(&self, theta: f64) -> Option<&TabularMdp> {
        self.support
            .iter()
            .position(|&v| v == theta)
            .map(|i| &self.models[i])
    }
}

impl FiniteModelFamily for ScalarParamFamily {
    fn support(&self) -> &[f64] {
        &self.support
    }

    fn model(&self, index: usize) -> &TabularMdp {
        &self.models[index]
    }
}

/// One realized step `(x_t, a_t, x_{t+1})` with its reward.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition<S = usize, A = usize> {
    pub t: u64,
    pub state: S,
    pub action: A,
    pub next_state: S,
    pub reward: f64,
}

/// The parameter an agent adopted at a switch.
#[derive(Debug, Clone, PartialEq)]
pub enum SampledParam {
    /// A point of a finite scalar support.
    Scalar(f64),
    /// A full tabular model drawn from a Dirichlet posterior (not stored).
    TabularModel,
    /// Stacked `[A; B]` for linear systems, row-major.
    Linear(Vec<f64>),
}

impl SampledParam {
    pub fn scalar(&self) -> Option<f64> {
        match self {
            SampledParam::Scalar(v) => Some(*v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog<S = usize, A = usize> {
    pub seed: u64,
    pub transitions: Vec<Transition<S, A>>,
    pub switch_times: Vec<u64>,
    pub sampled_params: Vec<SampledParam>,
}

impl<S, A> EpisodeLog<S, A> {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            transitions: Vec::new(),
            switch_times: Vec::new(),
            sampled_params: Vec::new(),
        }
    }

    pub fn horizon(&self) -> usize {
        self.transitions.len()
    }

    pub fn rewards(&self) -> impl Iterator<Item = f64> + '_ {
        self.transitions.iter().map(|tr| tr.reward)
    }

    /// Checks the log's structural invariants.
    pub fn check(&self) -> Result<()> {
        if self.switch_times.first() != Some(&1) {
            return Err(Error::validation("first switch must happen at t = 1"));
        }
        if self.switch_times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation("switch times not strictly increasing"));
        }
        if self.switch_times.len() != self.sampled_params.len() {
            return Err(Error::validation("one sampled parameter per switch required"));
        }
        if self.transitions.windows(2).any(|w| w[0].t >= w[1].t) {
            return Err(Error::validation("transition times not strictly increasing"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> TabularMdp {
        TabularMdp::new(2, 1, vec![0.5, 0.5, 0.0, 1.0], vec![0.0, 1.0]).unwrap()
    }

    #[test]
    fn accessors() {
        let m = two_state();
        assert_eq!(m.row(1, 0), &[0.0, 1.0]);
        assert_eq!(m.reward(1, 0), 1.0);
        assert!(m.check_state(2).is_err());
        assert!(m.check_action(1).is_err());
    }

    #[test]
    fn rejects_non_stochastic() {
        assert!(TabularMdp::new(2, 1, vec![0.5, 0.6, 0.0, 1.0], vec![0.0; 2]).is_err());
        assert!(TabularMdp::new(2, 1, vec![1.5, -0.5, 0.0, 1.0], vec![0.0; 2]).is_err());
        assert!(TabularMdp::new(2, 1, vec![1.0, 0.0, 0.0, 1.0], vec![f64::NAN, 0.0]).is_err());
        assert!(TabularMdp::new(2, 1, vec![1.0, 0.0], vec![0.0; 2]).is_err());
    }

    #[test]
    fn family_rejects_duplicate_support_and_reward_mismatch() {
        let m = two_state();
        assert!(ScalarParamFamily::new(vec![1.0, 1.0], vec![m.clone(), m.clone()]).is_err());
        let other = TabularMdp::new(2, 1, vec![0.5, 0.5, 0.0, 1.0], vec![0.0, 2.0]).unwrap();
        assert!(ScalarParamFamily::new(vec![1.0, 2.0], vec![m.clone(), other]).is_err());
        let fam = ScalarParamFamily::new(vec![1.0, 2.0], vec![m.clone(), m]).unwrap();
        assert!(fam.build(2.0).is_some());
        assert!(fam.build(3.0).is_none());
    }

    #[test]
    fn log_invariants() {
        let mut log: EpisodeLog = EpisodeLog::new(0);
        assert!(log.check().is_err());
        log.switch_times = vec![1, 2, 4];
        log.sampled_params = vec![SampledParam::Scalar(1.0); 3];
        assert!(log.check().is_ok());
        log.switch_times = vec![1, 4, 2];
        assert!(log.check().is_err());
    }
}
