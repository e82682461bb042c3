use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::mdp::{TabularMdp, Transition};

/// Independent Dirichlet posterior over every transition row `P(.|s,a)`,
/// restricted to a structural support mask.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletBelief {
    n_states: usize,
    n_actions: usize,
    alpha: Vec<f64>,
    support_mask: Vec<bool>,
}

impl DirichletBelief {
    pub fn new(n_states: usize, n_actions: usize, alpha: Vec<f64>, support_mask: Vec<bool>) -> Result<Self> {
        let len = n_states * n_actions * n_states;
        if alpha.len() != len || support_mask.len() != len {
            return Err(Error::dimension(format!(
                "alpha/mask need {len} entries, got {} and {}",
                alpha.len(),
                support_mask.len()
            )));
        }
        for (i, (&a, &m)) in alpha.iter().zip(&support_mask).enumerate() {
            let ok = if m { a > 0.0 && a.is_finite() } else { a == 0.0 };
            if !ok {
                return Err(Error::validation(format!(
                    "alpha[{i}] = {a} inconsistent with mask {m}"
                )));
            }
        }
        for row in support_mask.chunks(n_states) {
            if !row.iter().any(|&m| m) {
                return Err(Error::validation("a transition row has no allowed successor"));
            }
        }
        Ok(Self {
            n_states,
            n_actions,
            alpha,
            support_mask,
        })
    }

    /// Prior with concentration `prior_alpha` on every transition the model
    /// `structure` can make, zero elsewhere.
    pub fn from_structure(structure: &TabularMdp, prior_alpha: f64) -> Result<Self> {
        let mask: Vec<bool> = structure.transitions().iter().map(|&p| p > 0.0).collect();
        let alpha = mask.iter().map(|&m| if m { prior_alpha } else { 0.0 }).collect();
        Self::new(structure.n_states(), structure.n_actions(), alpha, mask)
    }

    fn offset(&self, s: usize, a: usize) -> usize {
        (s * self.n_actions + a) * self.n_states
    }

    pub fn alpha_row(&self, s: usize, a: usize) -> &[f64] {
        let o = self.offset(s, a);
        &self.alpha[o..o + self.n_states]
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn mean_row(&self, s: usize, a: usize) -> Vec<f64> {
        let row = self.alpha_row(s, a);
        let total: f64 = row.iter().sum();
        row.iter().map(|v| v / total).collect()
    }

    pub fn update(&self, obs: &Transition) -> Result<Self> {
        let mut next = self.clone();
        next.update_in_place(obs)?;
        Ok(next)
    }

    pub fn update_in_place(&mut self, obs: &Transition) -> Result<()> {
        if obs.state >= self.n_states || obs.next_state >= self.n_states || obs.action >= self.n_actions {
            return Err(Error::validation("observation index out of range"));
        }
        let idx = self.offset(obs.state, obs.action) + obs.next_state;
        if !self.support_mask[idx] {
            return Err(Error::ImpossibleObservation(format!(
                "transition {} -[{}]-> {} is outside the prior support",
                obs.state, obs.action, obs.next_state
            )));
        }
        self.alpha[idx] += 1.0;
        Ok(())
    }

    /// Draws every row independently and attaches `reward` (`[s][a]` layout).
    pub fn sample<R: Rng + ?Sized>(&self, reward: &[f64], rng: &mut R) -> Result<TabularMdp> {
        let mut transition = vec![0.0; self.alpha.len()];
        for (row_alpha, out) in self.alpha.chunks(self.n_states).zip(transition.chunks_mut(self.n_states)) {
            let mut total = 0.0;
            for (a, o) in row_alpha.iter().zip(out.iter_mut()) {
                if *a > 0.0 {
                    let g = Gamma::new(*a, 1.0)
                        .map_err(|e| Error::Internal(format!("gamma({a}): {e}")))?
                        .sample(rng);
                    *o = g;
                    total += g;
                }
            }
            if total > 0.0 {
                for o in out.iter_mut() {
                    *o /= total;
                }
            } else {
                // every gamma draw underflowed; fall back to the mean
                let sum: f64 = row_alpha.iter().sum();
                for (a, o) in row_alpha.iter().zip(out.iter_mut()) {
                    *o = a / sum;
                }
            }
        }
        TabularMdp::new(self.n_states, self.n_actions, transition, reward.to_vec())
    }
}
