//! Experiment configuration: a flat `key = value` file (TOML syntax).
//!
//! ```text
//! environment = "riverswim"        # riverswim | riverswim_dirichlet | lq | poi
//! agents = ["ds_psrl", "tsde", "t_mod_1"]
//! horizon = 5000
//! seeds = 50
//! base_seed = 1
//! out = "results/exp2"
//! ```
//!
//! Environment parameters use the `rs_`, `lq_` and `poi_` prefixes; every key
//! except `environment` has a default. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::agents::AgentKind;
use crate::environments::RiverSwimConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvironmentKind {
    /// Two-point scalar RiverSwim family.
    Riverswim,
    /// RiverSwim with a Dirichlet prior on every transition row.
    RiverswimDirichlet,
    /// Linear-quadratic control.
    Lq,
    /// Points-of-interest recommendation with a finite propensity support.
    Poi,
}

impl EnvironmentKind {
    pub const ALL: [(EnvironmentKind, &'static str, &'static str); 4] = [
        (
            EnvironmentKind::Riverswim,
            "riverswim",
            "RiverSwim chain, two-point scalar parameter family",
        ),
        (
            EnvironmentKind::RiverswimDirichlet,
            "riverswim_dirichlet",
            "RiverSwim chain, Dirichlet prior per state-action row",
        ),
        (EnvironmentKind::Lq, "lq", "linear-quadratic control, Gaussian regression prior"),
        (
            EnvironmentKind::Poi,
            "poi",
            "POI recommendation, finite propensity-to-listen support",
        ),
    ];

    pub fn as_str(self) -> &'static str {
        Self::ALL.iter().find(|(k, ..)| *k == self).map(|(_, n, _)| *n).unwrap()
    }
}

fn default_agents() -> Vec<String> {
    vec!["ds_psrl".into(), "tsde".into(), "t_mod_1".into()]
}

/// Raw file contents; see [`ExperimentConfig`] for the validated form.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    environment: EnvironmentKind,
    #[serde(default = "default_agents")]
    agents: Vec<String>,
    #[serde(default = "d_horizon")]
    horizon: u64,
    #[serde(default = "d_seeds")]
    seeds: u64,
    #[serde(default = "d_base_seed")]
    base_seed: u64,
    #[serde(default)]
    out: Option<PathBuf>,
    #[serde(default)]
    record_diagnostics: bool,
    #[serde(default)]
    per_seed_columns: bool,
    /// Draw the true parameter from the prior independently per seed.
    #[serde(default)]
    true_param_from_prior: bool,

    rs_states: Option<usize>,
    rs_fail_high: Option<f64>,
    rs_fail_low: Option<f64>,
    rs_slip_left: Option<f64>,
    rs_left_reward: Option<f64>,
    rs_right_reward: Option<f64>,
    rs_prefix: Option<usize>,
    rs_theta: Option<[f64; 2]>,
    rs_true_theta_index: Option<usize>,
    rs_prior: Option<[f64; 2]>,
    rs_dirichlet_alpha: Option<f64>,

    lq_n: Option<usize>,
    lq_d: Option<usize>,
    lq_spectral_radius: Option<f64>,
    lq_noise: Option<f64>,
    lq_system_seed: Option<u64>,
    lq_prior_variance: Option<f64>,
    lq_a: Option<Vec<f64>>,
    lq_b: Option<Vec<f64>>,

    poi_n: Option<usize>,
    poi_thetas: Option<Vec<f64>>,
    poi_true_theta: Option<f64>,
    poi_clamp: Option<f64>,
    poi_passive_seed: Option<u64>,
    poi_passive: Option<Vec<f64>>,
    poi_prior: Option<Vec<f64>>,
}

fn d_horizon() -> u64 {
    1000
}
fn d_seeds() -> u64 {
    10
}
fn d_base_seed() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiverSwimSettings {
    pub model: RiverSwimConfig,
    /// 1 or 2.
    pub true_theta_index: usize,
    pub prior: [f64; 2],
    pub dirichlet_alpha: f64,
}

impl Default for RiverSwimSettings {
    fn default() -> Self {
        Self {
            model: RiverSwimConfig::default(),
            true_theta_index: 2,
            prior: [0.5, 0.5],
            dirichlet_alpha: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LqSettings {
    pub n: usize,
    pub d: usize,
    pub spectral_radius: f64,
    pub noise: f64,
    pub system_seed: u64,
    /// Prior variance of each coefficient of `[A B]`.
    pub prior_variance: f64,
    /// Row-major overrides for `A` (n x n) and `B` (n x d).
    pub a: Option<Vec<f64>>,
    pub b: Option<Vec<f64>>,
}

impl Default for LqSettings {
    fn default() -> Self {
        Self {
            n: 2,
            d: 2,
            spectral_radius: 0.95,
            noise: 0.01,
            system_seed: 7,
            prior_variance: 1.0,
            a: None,
            b: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoiSettings {
    pub n_pois: usize,
    pub thetas: Vec<f64>,
    pub true_theta: f64,
    pub clamp: f64,
    pub passive_seed: u64,
    /// Row-major passive matrix; drawn from `passive_seed` when absent.
    pub passive: Option<Vec<f64>>,
    /// Prior weights over `thetas`; uniform when absent.
    pub prior: Option<Vec<f64>>,
}

impl Default for PoiSettings {
    fn default() -> Self {
        Self {
            n_pois: 4,
            thetas: vec![1.0, 2.0, 3.0, 4.0],
            true_theta: 3.0,
            clamp: 0.05,
            passive_seed: 11,
            passive: None,
            prior: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnvSpec {
    RiverSwim(RiverSwimSettings),
    RiverSwimDirichlet(RiverSwimSettings),
    Lq(LqSettings),
    Poi(PoiSettings),
}

impl EnvSpec {
    pub fn kind(&self) -> EnvironmentKind {
        match self {
            EnvSpec::RiverSwim(_) => EnvironmentKind::Riverswim,
            EnvSpec::RiverSwimDirichlet(_) => EnvironmentKind::RiverswimDirichlet,
            EnvSpec::Lq(_) => EnvironmentKind::Lq,
            EnvSpec::Poi(_) => EnvironmentKind::Poi,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub env: EnvSpec,
    pub agents: Vec<AgentKind>,
    pub horizon: u64,
    pub n_seeds: u64,
    pub base_seed: u64,
    pub out: Option<PathBuf>,
    pub record_diagnostics: bool,
    pub per_seed_columns: bool,
    pub true_param_from_prior: bool,
    /// The text the config was parsed from (echoed into the run manifest).
    pub source: String,
}

/// 1-based line of the first `key =` assignment in `text`.
fn line_of(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        let l = l.trim_start();
        l.strip_prefix(key)
            .map(|rest| rest.trim_start().starts_with('='))
            .unwrap_or(false)
    })
    .map(|i| i + 1)
}

fn at_key(text: &str, key: &str, msg: impl std::fmt::Display) -> Error {
    match line_of(text, key) {
        Some(line) => Error::Config(format!("line {line}: {key}: {msg}")),
        None => Error::Config(format!("{key}: {msg}")),
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            match e.span() {
                Some(span) => {
                    let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
                    Error::Config(format!("line {line}: {msg}"))
                }
                None => Error::Config(msg),
            }
        })?;

        let agents = raw
            .agents
            .iter()
            .map(|a| a.parse::<AgentKind>().map_err(|e| at_key(text, "agents", e)))
            .collect::<Result<Vec<_>>>()?;
        if agents.is_empty() {
            return Err(at_key(text, "agents", "at least one agent required"));
        }
        if raw.horizon < 1 {
            return Err(at_key(text, "horizon", "must be at least 1"));
        }
        if raw.seeds < 1 {
            return Err(at_key(text, "seeds", "must be at least 1"));
        }

        let rs = || {
            let d = RiverSwimSettings::default();
            let model = RiverSwimConfig {
                n_states: raw.rs_states.unwrap_or(d.model.n_states),
                fail_high: raw.rs_fail_high.unwrap_or(d.model.fail_high),
                fail_low: raw.rs_fail_low.unwrap_or(d.model.fail_low),
                slip_left: raw.rs_slip_left.unwrap_or(d.model.slip_left),
                left_reward: raw.rs_left_reward.unwrap_or(d.model.left_reward),
                right_reward: raw.rs_right_reward.unwrap_or(d.model.right_reward),
                contradicting_prefix: raw.rs_prefix.unwrap_or(d.model.contradicting_prefix),
                theta_values: raw.rs_theta.unwrap_or(d.model.theta_values),
            };
            model.validate().map_err(|e| at_key(text, first_present(text, RS_KEYS), e))?;
            let settings = RiverSwimSettings {
                model,
                true_theta_index: raw.rs_true_theta_index.unwrap_or(d.true_theta_index),
                prior: raw.rs_prior.unwrap_or(d.prior),
                dirichlet_alpha: raw.rs_dirichlet_alpha.unwrap_or(d.dirichlet_alpha),
            };
            if !(1..=2).contains(&settings.true_theta_index) {
                return Err(at_key(text, "rs_true_theta_index", "must be 1 or 2"));
            }
            crate::rng::validate_row(&settings.prior, crate::rng::INPUT_PROB_TOL)
                .map_err(|e| at_key(text, "rs_prior", e))?;
            if !(settings.dirichlet_alpha > 0.0) {
                return Err(at_key(text, "rs_dirichlet_alpha", "must be positive"));
            }
            Ok(settings)
        };

        let env = match raw.environment {
            EnvironmentKind::Riverswim => EnvSpec::RiverSwim(rs()?),
            EnvironmentKind::RiverswimDirichlet => EnvSpec::RiverSwimDirichlet(rs()?),
            EnvironmentKind::Lq => {
                let d = LqSettings::default();
                let s = LqSettings {
                    n: raw.lq_n.unwrap_or(d.n),
                    d: raw.lq_d.unwrap_or(d.d),
                    spectral_radius: raw.lq_spectral_radius.unwrap_or(d.spectral_radius),
                    noise: raw.lq_noise.unwrap_or(d.noise),
                    system_seed: raw.lq_system_seed.unwrap_or(d.system_seed),
                    prior_variance: raw.lq_prior_variance.unwrap_or(d.prior_variance),
                    a: raw.lq_a.clone(),
                    b: raw.lq_b.clone(),
                };
                if s.n == 0 || s.d == 0 {
                    return Err(at_key(text, "lq_n", "dimensions must be positive"));
                }
                if !(s.noise > 0.0 && s.noise.is_finite()) {
                    return Err(at_key(text, "lq_noise", "must be positive"));
                }
                if !(s.prior_variance > 0.0 && s.prior_variance.is_finite()) {
                    return Err(at_key(text, "lq_prior_variance", "must be positive"));
                }
                if let Some(a) = &s.a {
                    if a.len() != s.n * s.n {
                        return Err(at_key(text, "lq_a", format!("needs {} entries", s.n * s.n)));
                    }
                }
                if let Some(b) = &s.b {
                    if b.len() != s.n * s.d {
                        return Err(at_key(text, "lq_b", format!("needs {} entries", s.n * s.d)));
                    }
                }
                EnvSpec::Lq(s)
            }
            EnvironmentKind::Poi => {
                let d = PoiSettings::default();
                let s = PoiSettings {
                    n_pois: raw.poi_n.unwrap_or(d.n_pois),
                    thetas: raw.poi_thetas.clone().unwrap_or(d.thetas),
                    true_theta: raw.poi_true_theta.unwrap_or(d.true_theta),
                    clamp: raw.poi_clamp.unwrap_or(d.clamp),
                    passive_seed: raw.poi_passive_seed.unwrap_or(d.passive_seed),
                    passive: raw.poi_passive.clone(),
                    prior: raw.poi_prior.clone(),
                };
                if !s.thetas.contains(&s.true_theta) {
                    return Err(at_key(text, "poi_true_theta", "must be one of poi_thetas"));
                }
                if let Some(p) = &s.prior {
                    if p.len() != s.thetas.len() {
                        return Err(at_key(text, "poi_prior", "needs one weight per theta"));
                    }
                    crate::rng::validate_row(p, crate::rng::INPUT_PROB_TOL)
                        .map_err(|e| at_key(text, "poi_prior", e))?;
                }
                EnvSpec::Poi(s)
            }
        };

        let prefix_ok = |prefix: &str, allowed: bool| -> Result<()> {
            if allowed {
                return Ok(());
            }
            for line in text.lines() {
                let l = line.trim_start();
                if l.starts_with(prefix) && l.contains('=') {
                    let key = l.split('=').next().unwrap().trim();
                    return Err(at_key(
                        text,
                        key,
                        format!("not used by environment '{}'", env.kind().as_str()),
                    ));
                }
            }
            Ok(())
        };
        let kind = env.kind();
        prefix_ok(
            "rs_",
            matches!(kind, EnvironmentKind::Riverswim | EnvironmentKind::RiverswimDirichlet),
        )?;
        prefix_ok("lq_", kind == EnvironmentKind::Lq)?;
        prefix_ok("poi_", kind == EnvironmentKind::Poi)?;

        Ok(Self {
            env,
            agents,
            horizon: raw.horizon,
            n_seeds: raw.seeds,
            base_seed: raw.base_seed,
            out: raw.out,
            record_diagnostics: raw.record_diagnostics,
            per_seed_columns: raw.per_seed_columns,
            true_param_from_prior: raw.true_param_from_prior,
            source: text.to_string(),
        })
    }
}

const RS_KEYS: &[&str] = &[
    "rs_fail_low",
    "rs_fail_high",
    "rs_prefix",
    "rs_states",
    "rs_slip_left",
    "rs_theta",
    "rs_left_reward",
    "rs_right_reward",
];

fn first_present(text: &str, keys: &[&'static str]) -> &'static str {
    keys.iter()
        .copied()
        .find(|k| line_of(text, k).is_some())
        .unwrap_or("environment")
}
