//! Controllers: posterior sampling under the doubling schedule (DS-PSRL), the
//! dynamic-episode baseline (TSDE), every-step resampling (t-mod-1), and the
//! clairvoyant oracle.

pub mod lq;
pub mod schedule;
pub mod tabular;

use std::fmt;
use std::str::FromStr;

pub use lq::{LqAgent, LqOracle};
pub use schedule::{DoublingSchedule, TsdeLqSchedule, TsdeSchedule};
pub use tabular::{FixedPolicyAgent, TabularAgent, TabularOracle, TabularPosterior};

use crate::error::{Error, Result};
use crate::mdp::{SampledParam, Transition};
use crate::rng::SimRng;

/// What the agent did at a step.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision<A> {
    pub action: A,
    /// The newly adopted parameter when the agent switched policy at this step.
    pub switched: Option<SampledParam>,
}

pub trait Agent<S, A> {
    fn name(&self) -> &str;

    /// Chooses the action for `state` at step `t` (1-based).
    fn act(&mut self, t: u64, state: &S, rng: &mut SimRng) -> Result<Decision<A>>;

    /// Folds the realized transition into the agent's belief.
    fn observe(&mut self, obs: &Transition<S, A>) -> Result<()>;
}

/// Registered agent names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgentKind {
    DsPsrl,
    Tsde,
    EveryStep,
    Oracle,
}

impl AgentKind {
    pub const ALL: [AgentKind; 4] = [
        AgentKind::DsPsrl,
        AgentKind::Tsde,
        AgentKind::EveryStep,
        AgentKind::Oracle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::DsPsrl => "ds_psrl",
            AgentKind::Tsde => "tsde",
            AgentKind::EveryStep => "t_mod_1",
            AgentKind::Oracle => "oracle",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AgentKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown agent '{s}' (expected one of ds_psrl, tsde, t_mod_1, oracle)"
                ))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in AgentKind::ALL {
            assert_eq!(k.as_str().parse::<AgentKind>().unwrap(), k);
        }
        assert!("ucrl2".parse::<AgentKind>().is_err());
    }
}
