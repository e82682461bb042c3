use nalgebra::{DMatrix, DVector};

use super::schedule::{DoublingSchedule, TsdeLqSchedule};
use super::{Agent, AgentKind, Decision};
use crate::environments::LqSystem;
use crate::error::{Error, Result};
use crate::mdp::{SampledParam, Transition};
use crate::planners::solve_dare;
use crate::posteriors::GaussianLinearBelief;
use crate::rng::SimRng;

/// Draws per switch before giving up on finding a stabilizable sample.
const MAX_DRAWS: usize = 100;

enum LqSchedule {
    Doubling(DoublingSchedule),
    Tsde(TsdeLqSchedule),
    EveryStep,
}

/// Posterior sampling for linear-quadratic control: sample `(A, B)`, solve
/// the Riccati equation for it, and play `u = -K x` until the next switch.
pub struct LqAgent {
    kind: AgentKind,
    belief: GaussianLinearBelief,
    schedule: LqSchedule,
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    gain: DMatrix<f64>,
    rejected_draws: usize,
}

impl LqAgent {
    pub fn new(kind: AgentKind, belief: GaussianLinearBelief, q: DMatrix<f64>, r: DMatrix<f64>) -> Result<Self> {
        let schedule = match kind {
            AgentKind::DsPsrl => LqSchedule::Doubling(DoublingSchedule::default()),
            AgentKind::Tsde => LqSchedule::Tsde(TsdeLqSchedule::default()),
            AgentKind::EveryStep => LqSchedule::EveryStep,
            AgentKind::Oracle => return Err(Error::validation("the oracle is built with LqOracle")),
        };
        let (n, d) = (belief.n(), belief.d());
        if q.shape() != (n, n) || r.shape() != (d, d) {
            return Err(Error::dimension("cost matrices do not match the belief"));
        }
        Ok(Self {
            kind,
            belief,
            schedule,
            q,
            r,
            gain: DMatrix::zeros(d, n),
            rejected_draws: 0,
        })
    }

    pub fn belief(&self) -> &GaussianLinearBelief {
        &self.belief
    }

    pub fn gain(&self) -> &DMatrix<f64> {
        &self.gain
    }

    /// Posterior draws discarded because their Riccati equation had no
    /// stabilizing solution.
    pub fn rejected_draws(&self) -> usize {
        self.rejected_draws
    }

    fn switch_due(&mut self, t: u64) -> bool {
        match &mut self.schedule {
            LqSchedule::Doubling(d) => d.due(t),
            LqSchedule::Tsde(s) => {
                let log_det = self.belief.log_det_precision();
                if s.should_switch(t, log_det) {
                    s.begin_episode(t, log_det);
                    true
                } else {
                    false
                }
            }
            LqSchedule::EveryStep => true,
        }
    }

    /// Samples until the draw is stabilizable; keeps the previous gain if none is.
    fn resample(&mut self, rng: &mut SimRng) -> Result<SampledParam> {
        let mut last = None;
        for _ in 0..MAX_DRAWS {
            let (a, b) = self.belief.sample(rng)?;
            match solve_dare(&a, &b, &self.q, &self.r, self.belief.noise_cov()) {
                Ok(sol) => {
                    self.gain = sol.gain;
                    return Ok(stacked(&a, &b));
                }
                Err(_) => {
                    self.rejected_draws += 1;
                    last = Some((a, b));
                }
            }
        }
        let (a, b) = last.expect("at least one draw");
        Ok(stacked(&a, &b))
    }
}

fn stacked(a: &DMatrix<f64>, b: &DMatrix<f64>) -> SampledParam {
    let mut v: Vec<f64> = Vec::with_capacity(a.len() + b.len());
    for i in 0..a.nrows() {
        v.extend(a.row(i).iter());
        v.extend(b.row(i).iter());
    }
    SampledParam::Linear(v)
}

impl Agent<DVector<f64>, DVector<f64>> for LqAgent {
    fn name(&self) -> &str {
        self.kind.as_str()
    }

    fn act(&mut self, t: u64, state: &DVector<f64>, rng: &mut SimRng) -> Result<Decision<DVector<f64>>> {
        if t == 0 {
            return Err(Error::validation("steps are numbered from 1"));
        }
        if state.len() != self.belief.n() {
            return Err(Error::dimension("state dimension does not match the belief"));
        }
        let switched = if self.switch_due(t) {
            Some(self.resample(rng)?)
        } else {
            None
        };
        Ok(Decision {
            action: -(&self.gain * state),
            switched,
        })
    }

    fn observe(&mut self, obs: &Transition<DVector<f64>, DVector<f64>>) -> Result<()> {
        self.belief.update_in_place(&obs.state, &obs.action, &obs.next_state)
    }
}

/// Plays the optimal gain of the true system.
pub struct LqOracle {
    gain: DMatrix<f64>,
    param: SampledParam,
}

impl LqOracle {
    pub fn new(sys: &LqSystem) -> Result<Self> {
        Ok(Self {
            gain: sys.optimal()?.gain,
            param: stacked(&sys.a, &sys.b),
        })
    }

    pub fn gain(&self) -> &DMatrix<f64> {
        &self.gain
    }

    /// The true `[A B]`, row-major.
    pub fn param(&self) -> &SampledParam {
        &self.param
    }
}

impl Agent<DVector<f64>, DVector<f64>> for LqOracle {
    fn name(&self) -> &str {
        AgentKind::Oracle.as_str()
    }

    fn act(&mut self, t: u64, state: &DVector<f64>, _rng: &mut SimRng) -> Result<Decision<DVector<f64>>> {
        Ok(Decision {
            action: -(&self.gain * state),
            switched: (t == 1).then(|| self.param.clone()),
        })
    }

    fn observe(&mut self, _obs: &Transition<DVector<f64>, DVector<f64>>) -> Result<()> {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::lq_step;
    use crate::rng::seeded_rng;

    fn system() -> LqSystem {
        LqSystem::random(2, 2, 0.95, 0.01, 7).unwrap()
    }

    fn agent(kind: AgentKind, sys: &LqSystem) -> LqAgent {
        let belief = GaussianLinearBelief::isotropic(2, 2, 1.0, sys.noise_cov.clone()).unwrap();
        LqAgent::new(kind, belief, sys.q.clone(), sys.r.clone()).unwrap()
    }

    fn switch_times(kind: AgentKind, seed: u64, horizon: u64) -> Vec<u64> {
        let sys = system();
        let mut ag = agent(kind, &sys);
        let mut rng = seeded_rng(seed);
        let mut env_rng = crate::rng::substream(seed, 0, "env");
        let mut x = DVector::zeros(2);
        let mut out = Vec::new();
        for t in 1..=horizon {
            let d = ag.act(t, &x, &mut rng).unwrap();
            if d.switched.is_some() {
                out.push(t);
            }
            let (next, cost) = lq_step(&sys, &x, &d.action, &mut env_rng).unwrap();
            ag.observe(&Transition { t, state: x.clone(), action: d.action, next_state: next.clone(), reward: -cost })
                .unwrap();
            x = next;
        }
        out
    }

    #[test]
    fn oracle_uses_the_dare_gain() {
        let sys = system();
        let mut oracle = LqOracle::new(&sys).unwrap();
        let x = DVector::from_vec(vec![1.0, -2.0]);
        let d = oracle.act(1, &x, &mut seeded_rng(0)).unwrap();
        let expected = -(sys.optimal().unwrap().gain * &x);
        assert!((d.action - expected).amax() < 1e-12);
        assert!(oracle.act(2, &x, &mut seeded_rng(0)).unwrap().switched.is_none());
    }

    #[test]
    fn ds_psrl_lq_uses_doubling_times() {
        assert_eq!(switch_times(AgentKind::DsPsrl, 1, 300), DoublingSchedule::switch_times(300));
    }

    #[test]
    fn tsde_lq_switching_is_reproducible() {
        let a = switch_times(AgentKind::Tsde, 3, 400);
        let b = switch_times(AgentKind::Tsde, 3, 400);
        assert_eq!(a, b);
        assert!(a.len() > 5);
    }

    #[test]
    fn static_covariance_short_episode_does_not_switch() {
        let sys = system();
        let mut ag = agent(AgentKind::Tsde, &sys);
        let mut rng = seeded_rng(2);
        let zero = DVector::zeros(2);
        assert!(ag.act(1, &zero, &mut rng).unwrap().switched.is_some());
        // z = 0 leaves the covariance unchanged
        ag.observe(&Transition { t: 1, state: zero.clone(), action: zero.clone(), next_state: zero.clone(), reward: 0.0 })
            .unwrap();
        // t - start = 1 > prev_len = 0 fires the length rule at t = 2,
        // so check the determinant rule directly at t = 1 instead
        if let LqSchedule::Tsde(s) = &ag.schedule {
            assert!(!s.should_switch(1, ag.belief.log_det_precision()));
        } else {
            unreachable!();
        }
    }

    #[test]
    fn every_step_resamples_each_step() {
        let times = switch_times(AgentKind::EveryStep, 4, 50);
        assert_eq!(times, (1..=50).collect::<Vec<_>>());
    }
}
