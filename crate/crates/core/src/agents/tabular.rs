use std::sync::Arc;

use super::schedule::{DoublingSchedule, TsdeSchedule};
use super::{Agent, AgentKind, Decision};
use crate::error::{Error, Result};
use crate::mdp::{FiniteModelFamily, SampledParam, TabularMdp, Transition};
use crate::planners::{relative_value_iteration, relative_value_iteration_best_effort, AvgRewardSolution, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::posteriors::{DirichletBelief, FiniteBelief};
use crate::rng::SimRng;

/// Belief over tabular models plus whatever the agent needs to plan for a draw.
pub enum TabularPosterior {
    /// Finite scalar support; solutions are memoized per support point.
    Finite {
        belief: FiniteBelief,
        family: Arc<dyn FiniteModelFamily>,
        cache: Vec<Option<Arc<AvgRewardSolution>>>,
    },
    /// Dirichlet rows with a known reward table.
    Dirichlet {
        belief: DirichletBelief,
        reward: Vec<f64>,
    },
}

impl TabularPosterior {
    pub fn finite(belief: FiniteBelief, family: Arc<dyn FiniteModelFamily>) -> Result<Self> {
        if belief.support() != family.support() {
            return Err(Error::validation("belief and family supports differ"));
        }
        let cache = vec![None; family.len()];
        Ok(TabularPosterior::Finite { belief, family, cache })
    }

    pub fn dirichlet(belief: DirichletBelief, reward: Vec<f64>) -> Self {
        TabularPosterior::Dirichlet { belief, reward }
    }

    pub fn finite_belief(&self) -> Option<&FiniteBelief> {
        match self {
            TabularPosterior::Finite { belief, .. } => Some(belief),
            TabularPosterior::Dirichlet { .. } => None,
        }
    }

    pub fn dirichlet_belief(&self) -> Option<&DirichletBelief> {
        match self {
            TabularPosterior::Dirichlet { belief, .. } => Some(belief),
            TabularPosterior::Finite { .. } => None,
        }
    }

    fn update(&mut self, obs: &Transition) -> Result<()> {
        match self {
            TabularPosterior::Finite { belief, family, .. } => belief.update_in_place(family.as_ref(), obs),
            TabularPosterior::Dirichlet { belief, .. } => belief.update_in_place(obs),
        }
    }
}

enum TabularSchedule {
    Doubling(DoublingSchedule),
    Tsde(TsdeSchedule),
    EveryStep,
}

/// Posterior-sampling agent for tabular models; the schedule decides when a
/// new model is drawn and planned for.
pub struct TabularAgent {
    kind: AgentKind,
    posterior: TabularPosterior,
    schedule: TabularSchedule,
    policy: Option<Arc<AvgRewardSolution>>,
    current_param: Option<SampledParam>,
    planner_calls: usize,
    tol: f64,
    max_iter: usize,
}

impl TabularAgent {
    /// `kind` must be one of the sampling agents (not the oracle).
    pub fn new(kind: AgentKind, posterior: TabularPosterior, n_states: usize, n_actions: usize) -> Result<Self> {
        let schedule = match kind {
            AgentKind::DsPsrl => TabularSchedule::Doubling(DoublingSchedule::default()),
            AgentKind::Tsde => TabularSchedule::Tsde(TsdeSchedule::new(n_states, n_actions)),
            AgentKind::EveryStep => TabularSchedule::EveryStep,
            AgentKind::Oracle => {
                return Err(Error::validation("the oracle is built with TabularOracle"))
            }
        };
        Ok(Self {
            kind,
            posterior,
            schedule,
            policy: None,
            current_param: None,
            planner_calls: 0,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        })
    }

    pub fn with_planner_tolerance(mut self, tol: f64, max_iter: usize) -> Self {
        self.tol = tol;
        self.max_iter = max_iter;
        self
    }

    pub fn kind(&self) -> AgentKind {
        self.kind
    }

    pub fn posterior(&self) -> &TabularPosterior {
        &self.posterior
    }

    pub fn current_policy(&self) -> Option<&Arc<AvgRewardSolution>> {
        self.policy.as_ref()
    }

    pub fn current_param(&self) -> Option<&SampledParam> {
        self.current_param.as_ref()
    }

    /// Number of times the planner actually ran (cache hits excluded).
    pub fn planner_calls(&self) -> usize {
        self.planner_calls
    }

    /// Next DS-PSRL resampling step, if this agent uses the doubling schedule.
    pub fn next_doubling_switch(&self) -> Option<u64> {
        match &self.schedule {
            TabularSchedule::Doubling(d) => Some(d.next_switch()),
            _ => None,
        }
    }

    pub fn tsde_schedule(&self) -> Option<&TsdeSchedule> {
        match &self.schedule {
            TabularSchedule::Tsde(s) => Some(s),
            _ => None,
        }
    }

    fn switch_due(&mut self, t: u64) -> bool {
        match &mut self.schedule {
            TabularSchedule::Doubling(d) => d.due(t),
            TabularSchedule::Tsde(s) => {
                if s.should_switch(t) {
                    s.begin_episode(t);
                    true
                } else {
                    false
                }
            }
            TabularSchedule::EveryStep => true,
        }
    }

    fn solve(&mut self, mdp: &TabularMdp) -> Result<Arc<AvgRewardSolution>> {
        self.planner_calls += 1;
        Ok(Arc::new(relative_value_iteration_best_effort(mdp, self.tol, self.max_iter)?))
    }

    fn resample(&mut self, rng: &mut SimRng) -> Result<()> {
        let (solution, param) = match &mut self.posterior {
            TabularPosterior::Finite { belief, family, cache } => {
                let i = belief.sample_index(rng);
                let theta = family.support()[i];
                let solution = match &cache[i] {
                    Some(sol) => sol.clone(),
                    None => {
                        self.planner_calls += 1;
                        let sol = Arc::new(relative_value_iteration(family.model(i), self.tol, self.max_iter)?);
                        cache[i] = Some(sol.clone());
                        sol
                    }
                };
                (solution, SampledParam::Scalar(theta))
            }
            TabularPosterior::Dirichlet { belief, reward } => {
                let mdp = belief.sample(reward, rng)?;
                (self.solve(&mdp)?, SampledParam::TabularModel)
            }
        };
        self.policy = Some(solution);
        self.current_param = Some(param);
        Ok(())
    }
}

impl Agent<usize, usize> for TabularAgent {
    fn name(&self) -> &str {
        self.kind.as_str()
    }

    fn act(&mut self, t: u64, state: &usize, rng: &mut SimRng) -> Result<Decision<usize>> {
        if t == 0 {
            return Err(Error::validation("steps are numbered from 1"));
        }
        let switched = if self.switch_due(t) {
            self.resample(rng)?;
            self.current_param.clone()
        } else {
            None
        };
        let policy = self
            .policy
            .as_ref()
            .ok_or_else(|| Error::Internal("no policy before the first switch".into()))?;
        let action = *policy
            .policy
            .get(*state)
            .ok_or_else(|| Error::validation(format!("state {state} out of range")))?;
        Ok(Decision { action, switched })
    }

    fn observe(&mut self, obs: &Transition) -> Result<()> {
        self.posterior.update(obs)?;
        if let TabularSchedule::Tsde(s) = &mut self.schedule {
            s.record_visit(obs.state, obs.action);
        }
        Ok(())
    }
}

/// Plays the optimal stationary policy of the true model.
pub struct TabularOracle {
    solution: AvgRewardSolution,
    param: SampledParam,
}

impl TabularOracle {
    pub fn new(true_model: &TabularMdp, param: SampledParam) -> Result<Self> {
        Ok(Self {
            solution: relative_value_iteration(true_model, DEFAULT_TOL, DEFAULT_MAX_ITER)?,
            param,
        })
    }

    pub fn from_solution(solution: AvgRewardSolution, param: SampledParam) -> Self {
        Self { solution, param }
    }

    pub fn solution(&self) -> &AvgRewardSolution {
        &self.solution
    }
}

impl Agent<usize, usize> for TabularOracle {
    fn name(&self) -> &str {
        AgentKind::Oracle.as_str()
    }

    fn act(&mut self, t: u64, state: &usize, _rng: &mut SimRng) -> Result<Decision<usize>> {
        let action = *self
            .solution
            .policy
            .get(*state)
            .ok_or_else(|| Error::validation(format!("state {state} out of range")))?;
        Ok(Decision {
            action,
            switched: (t == 1).then(|| self.param.clone()),
        })
    }

    fn observe(&mut self, _obs: &Transition) -> Result<()> {
        Ok(())
    }
}

/// A fixed stationary policy, for baselines and diagnostics.
pub struct FixedPolicyAgent {
    name: String,
    policy: Vec<usize>,
}

impl FixedPolicyAgent {
    pub fn new(name: impl Into<String>, policy: Vec<usize>) -> Self {
        Self {
            name: name.into(),
            policy,
        }
    }
}

impl Agent<usize, usize> for FixedPolicyAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn act(&mut self, t: u64, state: &usize, _rng: &mut SimRng) -> Result<Decision<usize>> {
        let action = *self
            .policy
            .get(*state)
            .ok_or_else(|| Error::validation(format!("state {state} out of range")))?;
        Ok(Decision {
            action,
            switched: (t == 1).then_some(SampledParam::TabularModel),
        })
    }

    fn observe(&mut self, _obs: &Transition) -> Result<()> {
        Ok(())
    }
}
