//! Posterior sampling reinforcement learning with a deterministic, model-independent
//! doubling schedule of policy updates (DS-PSRL), together with the TSDE and
//! every-step baselines, the benchmark environments they are evaluated on, exact
//! planners, and numerical checks of the regret analysis assumptions.

pub mod agents;
pub mod environments;
pub mod error;
pub mod harness;
pub mod mdp;
pub mod planners;
pub mod posteriors;
pub mod rng;
pub mod verify;

pub use error::{Error, Result};
pub use mdp::{EpisodeLog, SampledParam, ScalarParamFamily, TabularMdp, Transition};
