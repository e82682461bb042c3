//! Points-of-interest recommendation model with a scalar "propensity to
//! listen". The passive model gives `P(s'|s)`; recommending `a` lifts the
//! probability of visiting `a` from `p` to `p^(1/theta)` and rescales the
//! remaining mass.

use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::mdp::{FiniteModelFamily, TabularMdp};
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq)]
pub struct PoiModel {
    n_pois: usize,
    passive: Vec<f64>,
    theta_support: Vec<f64>,
    clamp: f64,
}

impl PoiModel {
    /// Clamps every passive row into `[clamp, 1 - clamp]` (renormalizing) and
    /// validates the propensity support.
    pub fn new(n_pois: usize, passive: Vec<f64>, theta_support: Vec<f64>, clamp: f64) -> Result<Self> {
        if n_pois < 2 {
            return Err(Error::validation("POI model needs at least 2 POIs"));
        }
        if passive.len() != n_pois * n_pois {
            return Err(Error::dimension(format!(
                "passive matrix has {} entries, expected {}",
                passive.len(),
                n_pois * n_pois
            )));
        }
        if !(clamp > 0.0 && clamp < 0.5) {
            return Err(Error::validation(format!("clamp {clamp} outside (0, 0.5)")));
        }
        if clamp * n_pois as f64 > 1.0 {
            return Err(Error::validation(format!(
                "clamp {clamp} too large for {n_pois} POIs"
            )));
        }
        if theta_support.is_empty() {
            return Err(Error::validation("empty propensity support"));
        }
        for (i, &t) in theta_support.iter().enumerate() {
            if !(t >= 1.0) || !t.is_finite() {
                return Err(Error::domain(format!("propensity {t} must be >= 1")));
            }
            if theta_support[..i].contains(&t) {
                return Err(Error::validation(format!("propensity {t} repeated")));
            }
        }
        let mut clamped = Vec::with_capacity(passive.len());
        for row in passive.chunks(n_pois) {
            crate::rng::validate_row(row, crate::rng::INPUT_PROB_TOL)?;
            clamped.extend(clamp_row(row, clamp));
        }
        Ok(Self {
            n_pois,
            passive: clamped,
            theta_support,
            clamp,
        })
    }

    /// Passive rows drawn from a flat Dirichlet, then clamped.
    pub fn random(n_pois: usize, theta_support: Vec<f64>, clamp: f64, rng: &mut SimRng) -> Result<Self> {
        let gamma = Gamma::new(1.0, 1.0).expect("unit gamma");
        let mut passive = Vec::with_capacity(n_pois * n_pois);
        for _ in 0..n_pois {
            let draws: Vec<f64> = (0..n_pois).map(|_| gamma.sample(rng)).collect();
            let sum: f64 = draws.iter().sum();
            passive.extend(draws.iter().map(|g| g / sum));
        }
        Self::new(n_pois, passive, theta_support, clamp)
    }

    pub fn n_pois(&self) -> usize {
        self.n_pois
    }

    pub fn clamp(&self) -> f64 {
        self.clamp
    }

    pub fn theta_support(&self) -> &[f64] {
        &self.theta_support
    }

    pub fn passive_row(&self, s: usize) -> &[f64] {
        &self.passive[s * self.n_pois..(s + 1) * self.n_pois]
    }

    pub fn passive(&self, s: usize, next: usize) -> f64 {
        self.passive[s * self.n_pois + next]
    }

    fn check_index(&self, i: usize, what: &str) -> Result<()> {
        if i >= self.n_pois {
            return Err(Error::validation(format!(
                "{what} {i} out of range (n_pois = {})",
                self.n_pois
            )));
        }
        Ok(())
    }

    /// Tabular model for propensity `theta`; reward is the probability the
    /// recommendation is followed.
    pub fn build_mdp(&self, theta: f64) -> Result<TabularMdp> {
        let n = self.n_pois;
        let mut transition = Vec::with_capacity(n * n * n);
        let mut reward = Vec::with_capacity(n * n);
        for s in 0..n {
            for a in 0..n {
                let row = poi_transition_probs(self, s, a, theta)?;
                reward.push(row[a]);
                transition.extend(row);
            }
        }
        TabularMdp::new(n, n, transition, reward)
    }

    pub fn family(&self) -> Result<PoiFamily> {
        let models = self
            .theta_support
            .iter()
            .map(|&t| self.build_mdp(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(PoiFamily {
            support: self.theta_support.clone(),
            models,
        })
    }
}

/// Smallest-change projection of a probability row into `[lo, 1 - lo]`:
/// finds the scale `c` with `sum(clamp(c * row)) = 1` by bisection.
fn clamp_row(row: &[f64], lo: f64) -> Vec<f64> {
    let hi = 1.0 - lo;
    let total = |c: f64| row.iter().map(|&p| (c * p).clamp(lo, hi)).sum::<f64>();
    let (mut a, mut b) = (0.0_f64, 1.0_f64);
    while total(b) < 1.0 {
        b *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if total(mid) < 1.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let mut out: Vec<f64> = row.iter().map(|&p| (b * p).clamp(lo, hi)).collect();
    let sum: f64 = out.iter().sum();
    for v in &mut out {
        *v /= sum;
    }
    out
}

/// `P(.|s, a, theta)` for the perturbed passive model.
pub fn poi_transition_probs(model: &PoiModel, current_poi: usize, action: usize, theta: f64) -> Result<Vec<f64>> {
    if !(theta >= 1.0) {
        return Err(Error::domain(format!("propensity {theta} must be >= 1")));
    }
    model.check_index(current_poi, "POI")?;
    model.check_index(action, "action")?;
    let passive = model.passive_row(current_poi);
    let p = passive[action];
    let lifted = p.powf(1.0 / theta);
    let scale = (1.0 - lifted) / (1.0 - p);
    Ok(passive
        .iter()
        .enumerate()
        .map(|(s, &q)| if s == action { lifted } else { q * scale })
        .collect())
}

/// 1 when the user went where we recommended.
pub fn poi_reward(action: usize, realized_next: usize) -> f64 {
    if action == realized_next {
        1.0
    } else {
        0.0
    }
}

/// Prebuilt tabular models over the propensity support. Rewards differ by
/// member since the follow probability depends on the propensity.
#[derive(Debug, Clone)]
pub struct PoiFamily {
    support: Vec<f64>,
    models: Vec<TabularMdp>,
}

impl FiniteModelFamily for PoiFamily {
    fn support(&self) -> &[f64] {
        &self.support
    }

    fn model(&self, index: usize) -> &TabularMdp {
        &self.models[index]
    }
}
