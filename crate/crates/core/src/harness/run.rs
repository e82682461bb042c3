use nalgebra::DVector;

use crate::agents::Agent;
use crate::environments::{lq_step, LqSystem, TabularEnv};
use crate::error::Result;
use crate::mdp::{EpisodeLog, Transition};
use crate::rng::{substream, SimRng};

/// Simulator interface used by the run loop.
pub trait Environment {
    type State: Clone;
    type Action: Clone;

    fn initial_state(&self) -> Self::State;

    /// Samples `(next_state, reward)`.
    fn step(&self, state: &Self::State, action: &Self::Action, rng: &mut SimRng) -> Result<(Self::State, f64)>;
}

impl Environment for TabularEnv {
    type State = usize;
    type Action = usize;

    fn initial_state(&self) -> usize {
        self.initial_state
    }

    fn step(&self, state: &usize, action: &usize, rng: &mut SimRng) -> Result<(usize, f64)> {
        TabularEnv::step(self, *state, *action, rng)
    }
}

/// Linear system started at the origin; the reward is the negated stage cost.
impl Environment for LqSystem {
    type State = DVector<f64>;
    type Action = DVector<f64>;

    fn initial_state(&self) -> DVector<f64> {
        DVector::zeros(self.n())
    }

    fn step(&self, state: &DVector<f64>, action: &DVector<f64>, rng: &mut SimRng) -> Result<(DVector<f64>, f64)> {
        let (next, cost) = lq_step(self, state, action, rng)?;
        Ok((next, -cost))
    }
}

/// Stream for the environment's transition noise in run `run_index`.
pub fn env_stream(seed: u64, run_index: u64) -> SimRng {
    substream(seed, run_index, "env")
}

/// Stream for an agent's posterior draws in run `run_index`.
pub fn agent_stream(seed: u64, run_index: u64, agent: &str) -> SimRng {
    substream(seed, run_index, &format!("agent/{agent}"))
}

/// Runs `agent` on `env` for `horizon` steps; see [`run_single_with`].
pub fn run_single<E, Ag>(env: &E, agent: &mut Ag, horizon: u64, seed: u64, run_index: u64) -> Result<EpisodeLog<E::State, E::Action>>
where
    E: Environment,
    Ag: Agent<E::State, E::Action> + ?Sized,
{
    run_single_with(env, agent, horizon, seed, run_index, |_, _| {})
}

/// The online loop: act, step the environment, observe. `on_switch(t, agent)`
/// is called right after the agent adopts a new parameter at step `t`.
/// Failures carry the step at which they happened.
pub fn run_single_with<E, Ag, F>(
    env: &E,
    agent: &mut Ag,
    horizon: u64,
    seed: u64,
    run_index: u64,
    mut on_switch: F,
) -> Result<EpisodeLog<E::State, E::Action>>
where
    E: Environment,
    Ag: Agent<E::State, E::Action> + ?Sized,
    F: FnMut(u64, &Ag),
{
    let mut env_rng = env_stream(seed, run_index);
    let mut agent_rng = agent_stream(seed, run_index, agent.name());
    let mut log = EpisodeLog::new(seed);
    log.transitions.reserve(horizon as usize);
    let mut state = env.initial_state();
    for t in 1..=horizon {
        let decision = agent.act(t, &state, &mut agent_rng).map_err(|e| e.at_step(t))?;
        if let Some(param) = decision.switched {
            log.switch_times.push(t);
            log.sampled_params.push(param);
            on_switch(t, agent);
        }
        let (next, reward) = env.step(&state, &decision.action, &mut env_rng).map_err(|e| e.at_step(t))?;
        let tr = Transition {
            t,
            state,
            action: decision.action,
            next_state: next.clone(),
            reward,
        };
        agent.observe(&tr).map_err(|e| e.at_step(t))?;
        log.transitions.push(tr);
        state = next;
    }
    Ok(log)
}
