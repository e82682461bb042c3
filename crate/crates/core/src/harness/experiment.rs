use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::config::{EnvSpec, ExperimentConfig, LqSettings, PoiSettings, RiverSwimSettings};
use super::run::{run_single, run_single_with};
use crate::agents::{AgentKind, LqAgent, LqOracle, TabularAgent, TabularOracle, TabularPosterior};
use crate::environments::{build_riverswim, build_scalar_family, LqSystem, PoiModel, RewardKind, TabularEnv};
use crate::error::{Error, Result};
use crate::mdp::{EpisodeLog, FiniteModelFamily, SampledParam, TabularMdp};
use crate::planners::{plan, AvgRewardSolution};
use crate::posteriors::{DirichletBelief, FiniteBelief, GaussianLinearBelief};
use crate::rng::{categorical_sample, substream, seeded_rng};

/// Outcome of one (agent, seed) run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub agent: AgentKind,
    pub run_index: u64,
    /// Index of the true parameter in a finite support; `None` otherwise.
    pub true_index: Option<usize>,
    pub true_param: SampledParam,
    pub j_star: f64,
    pub rewards: Vec<f64>,
    pub switch_times: Vec<u64>,
    pub sampled_params: Vec<SampledParam>,
    /// Posterior mass on the true parameter at each switch (finite supports).
    pub posterior_true_at_switch: Vec<f64>,
    /// Bias span of the policy adopted at each switch (tabular environments).
    pub span_at_switch: Vec<f64>,
    /// Full trajectory; kept only when requested.
    pub log: Option<EpisodeLog>,
}

enum Setup {
    Finite {
        family: Arc<dyn FiniteModelFamily>,
        prior: Vec<f64>,
        default_true: usize,
        reward_kind: RewardKind,
        solutions: Vec<Arc<AvgRewardSolution>>,
    },
    Dirichlet {
        true_model: TabularMdp,
        alpha: f64,
        solution: Arc<AvgRewardSolution>,
    },
    Lq {
        sys: LqSystem,
        /// Scale of the isotropic prior precision.
        prior_precision: f64,
        j_star: f64,
    },
}

/// A validated configuration with its environment built and the true gains solved.
pub struct Experiment {
    pub config: ExperimentConfig,
    setup: Setup,
}

fn riverswim_family(s: &RiverSwimSettings) -> Result<Arc<dyn FiniteModelFamily>> {
    Ok(Arc::new(build_scalar_family(&s.model)?))
}

fn poi_model(s: &PoiSettings) -> Result<PoiModel> {
    match &s.passive {
        Some(p) => PoiModel::new(s.n_pois, p.clone(), s.thetas.clone(), s.clamp),
        None => PoiModel::random(s.n_pois, s.thetas.clone(), s.clamp, &mut seeded_rng(s.passive_seed)),
    }
}

fn lq_system(s: &LqSettings) -> Result<LqSystem> {
    match (&s.a, &s.b) {
        (None, None) => LqSystem::random(s.n, s.d, s.spectral_radius, s.noise, s.system_seed),
        _ => {
            let base = LqSystem::random(s.n, s.d, s.spectral_radius, s.noise, s.system_seed)?;
            let a = s.a.as_ref().map(|v| DMatrix::from_row_slice(s.n, s.n, v)).unwrap_or(base.a);
            let b = s.b.as_ref().map(|v| DMatrix::from_row_slice(s.n, s.d, v)).unwrap_or(base.b);
            LqSystem::new(a, b, base.q, base.r, base.noise_cov)
        }
    }
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        let finite = |family: Arc<dyn FiniteModelFamily>, prior: Vec<f64>, default_true, reward_kind| {
            let solutions = (0..family.len())
                .map(|i| plan(family.model(i)).map(Arc::new))
                .collect::<Result<Vec<_>>>()?;
            Ok::<_, Error>(Setup::Finite {
                family,
                prior,
                default_true,
                reward_kind,
                solutions,
            })
        };
        let setup = match &config.env {
            EnvSpec::RiverSwim(s) => finite(
                riverswim_family(s)?,
                s.prior.to_vec(),
                s.true_theta_index - 1,
                RewardKind::Table,
            )?,
            EnvSpec::RiverSwimDirichlet(s) => {
                if config.true_param_from_prior {
                    return Err(Error::Config(
                        "true_param_from_prior needs a finite support".into(),
                    ));
                }
                let true_model = build_riverswim(&s.model, s.true_theta_index)?;
                let solution = Arc::new(plan(&true_model)?);
                Setup::Dirichlet {
                    true_model,
                    alpha: s.dirichlet_alpha,
                    solution,
                }
            }
            EnvSpec::Poi(s) => {
                let model = poi_model(s)?;
                let n = s.thetas.len();
                let prior = s.prior.clone().unwrap_or_else(|| vec![1.0 / n as f64; n]);
                let default_true = s.thetas.iter().position(|&t| t == s.true_theta).unwrap();
                finite(Arc::new(model.family()?), prior, default_true, RewardKind::FollowIndicator)?
            }
            EnvSpec::Lq(s) => {
                if config.true_param_from_prior {
                    return Err(Error::Config(
                        "true_param_from_prior needs a finite support".into(),
                    ));
                }
                let sys = lq_system(s)?;
                let j_star = -sys.optimal()?.avg_cost;
                Setup::Lq {
                    sys,
                    // coefficient covariance is noise * precision^-1
                    prior_precision: s.noise / s.prior_variance,
                    j_star,
                }
            }
        };
        Ok(Self { config, setup })
    }

    /// Optimal average reward of the default true parameter.
    pub fn default_j_star(&self) -> f64 {
        match &self.setup {
            Setup::Finite {
                solutions, default_true, ..
            } => solutions[*default_true].gain,
            Setup::Dirichlet { solution, .. } => solution.gain,
            Setup::Lq { j_star, .. } => *j_star,
        }
    }

    /// The finite model family, when the environment has one.
    pub fn family(&self) -> Option<&Arc<dyn FiniteModelFamily>> {
        match &self.setup {
            Setup::Finite { family, .. } => Some(family),
            _ => None,
        }
    }

    /// Planner solution of family member `i`.
    pub fn member_solution(&self, i: usize) -> Option<&AvgRewardSolution> {
        match &self.setup {
            Setup::Finite { solutions, .. } => solutions.get(i).map(|s| s.as_ref()),
            _ => None,
        }
    }

    pub fn lq_system(&self) -> Option<&LqSystem> {
        match &self.setup {
            Setup::Lq { sys, .. } => Some(sys),
            _ => None,
        }
    }

    /// True-parameter index of run `run_index`: drawn from the prior when
    /// configured, shared by every agent of that run.
    pub fn true_index(&self, run_index: u64) -> Result<Option<usize>> {
        match &self.setup {
            Setup::Finite {
                prior, default_true, ..
            } => {
                if self.config.true_param_from_prior {
                    let mut rng = substream(self.config.base_seed, run_index, "truth");
                    Ok(Some(categorical_sample(prior, &mut rng)?))
                } else {
                    Ok(Some(*default_true))
                }
            }
            _ => Ok(None),
        }
    }

    /// Runs one agent for one seed.
    pub fn run(&self, agent: AgentKind, run_index: u64, keep_log: bool) -> Result<RunRecord> {
        let horizon = self.config.horizon;
        let seed = self.config.base_seed;
        match &self.setup {
            Setup::Finite {
                family,
                prior,
                reward_kind,
                solutions,
                ..
            } => {
                let idx = self.true_index(run_index)?.unwrap();
                let theta = family.support()[idx];
                let env = TabularEnv::new(family.model(idx).clone(), *reward_kind, 0)?;
                let mut post_true = Vec::new();
                let mut spans = Vec::new();
                let log = if agent == AgentKind::Oracle {
                    let mut oracle =
                        TabularOracle::from_solution((*solutions[idx]).clone(), SampledParam::Scalar(theta));
                    spans.push(solutions[idx].span);
                    run_single(&env, &mut oracle, horizon, seed, run_index)?
                } else {
                    let belief = FiniteBelief::from_weights(family.support().to_vec(), prior.clone())?;
                    let posterior = TabularPosterior::finite(belief, family.clone())?;
                    let n_s = family.model(0).n_states();
                    let n_a = family.model(0).n_actions();
                    let mut ag = TabularAgent::new(agent, posterior, n_s, n_a)?;
                    run_single_with(&env, &mut ag, horizon, seed, run_index, |_, a: &TabularAgent| {
                        if let Some(b) = a.posterior().finite_belief() {
                            post_true.push(b.probability(idx));
                        }
                        if let Some(p) = a.current_policy() {
                            spans.push(p.span);
                        }
                    })?
                };
                Ok(self.record(agent, run_index, Some(idx), SampledParam::Scalar(theta), solutions[idx].gain, log, post_true, spans, keep_log))
            }
            Setup::Dirichlet {
                true_model,
                alpha,
                solution,
            } => {
                let env = TabularEnv::new(true_model.clone(), RewardKind::Table, 0)?;
                let mut spans = Vec::new();
                let log = if agent == AgentKind::Oracle {
                    let mut oracle = TabularOracle::from_solution((**solution).clone(), SampledParam::TabularModel);
                    spans.push(solution.span);
                    run_single(&env, &mut oracle, horizon, seed, run_index)?
                } else {
                    let belief = DirichletBelief::from_structure(true_model, *alpha)?;
                    let posterior = TabularPosterior::dirichlet(belief, true_model.rewards().to_vec());
                    let mut ag = TabularAgent::new(agent, posterior, true_model.n_states(), true_model.n_actions())?;
                    run_single_with(&env, &mut ag, horizon, seed, run_index, |_, a: &TabularAgent| {
                        if let Some(p) = a.current_policy() {
                            spans.push(p.span);
                        }
                    })?
                };
                Ok(self.record(agent, run_index, None, SampledParam::TabularModel, solution.gain, log, Vec::new(), spans, keep_log))
            }
            Setup::Lq {
                sys,
                prior_precision,
                j_star,
            } => {
                let log = if agent == AgentKind::Oracle {
                    let mut oracle = LqOracle::new(sys)?;
                    run_single(sys, &mut oracle, horizon, seed, run_index)?
                } else {
                    let belief = GaussianLinearBelief::isotropic(sys.n(), sys.d(), *prior_precision, sys.noise_cov.clone())?;
                    let mut ag = LqAgent::new(agent, belief, sys.q.clone(), sys.r.clone())?;
                    run_single(sys, &mut ag, horizon, seed, run_index)?
                };
                let truth = LqOracle::new(sys)?.param().clone();
                Ok(RunRecord {
                    agent,
                    run_index,
                    true_index: None,
                    true_param: truth,
                    j_star: *j_star,
                    rewards: log.rewards().collect(),
                    switch_times: log.switch_times,
                    sampled_params: log.sampled_params,
                    posterior_true_at_switch: Vec::new(),
                    span_at_switch: Vec::new(),
                    log: None,
                })
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn record(
        &self,
        agent: AgentKind,
        run_index: u64,
        true_index: Option<usize>,
        true_param: SampledParam,
        j_star: f64,
        log: EpisodeLog,
        posterior_true_at_switch: Vec<f64>,
        span_at_switch: Vec<f64>,
        keep_log: bool,
    ) -> RunRecord {
        RunRecord {
            agent,
            run_index,
            true_index,
            true_param,
            j_star,
            rewards: log.rewards().collect(),
            switch_times: log.switch_times.clone(),
            sampled_params: log.sampled_params.clone(),
            posterior_true_at_switch,
            span_at_switch,
            log: keep_log.then_some(log),
        }
    }

    /// Every configured agent over every seed, parallel across runs.
    /// Results are grouped per agent in configuration order and sorted by
    /// run index; the first failing run of an agent is reported instead.
    pub fn run_grid(&self, keep_logs: bool) -> Vec<AgentResult> {
        let jobs: Vec<(AgentKind, u64)> = self
            .config
            .agents
            .iter()
            .flat_map(|&a| (0..self.config.n_seeds).map(move |i| (a, i)))
            .collect();
        let results: Vec<Result<RunRecord>> = jobs
            .par_iter()
            .map(|&(a, i)| self.run(a, i, keep_logs))
            .collect();
        let mut out = Vec::new();
        let mut it = jobs.into_iter().zip(results).peekable();
        for &agent in &self.config.agents {
            let mut runs = Vec::new();
            let mut failure = None;
            while let Some(((a, i), _)) = it.peek() {
                if *a != agent {
                    break;
                }
                let i = *i;
                let (_, res) = it.next().unwrap();
                match res {
                    Ok(r) => runs.push(r),
                    Err(e) => {
                        if failure.is_none() {
                            failure = Some((i, e));
                        }
                    }
                }
            }
            out.push(AgentResult { agent, runs, failure });
        }
        out
    }
}

/// All runs of one agent.
#[derive(Debug)]
pub struct AgentResult {
    pub agent: AgentKind,
    pub runs: Vec<RunRecord>,
    /// First failed run index and its error.
    pub failure: Option<(u64, Error)>,
}

impl AgentResult {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }
}
