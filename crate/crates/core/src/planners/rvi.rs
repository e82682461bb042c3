//! Relative value iteration for average-reward tabular MDPs.
//!
//! Iterates on the aperiodic transform `P' = tau P + (1 - tau) I`, which has
//! the same gain and optimal policies and a bias scaled by `1 / tau`, so the
//! iteration converges on periodic chains as well.

use crate::error::{Error, Result};
use crate::mdp::TabularMdp;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

const APERIODICITY: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct AvgRewardSolution {
    /// Optimal average reward per step.
    pub gain: f64,
    /// Differential value function, normalized so `min = 0`.
    pub bias: Vec<f64>,
    pub policy: Vec<usize>,
    pub span: f64,
    pub iterations: usize,
    /// Span of the last Bellman residual; the greedy policy is within this
    /// much of the optimal gain.
    pub residual: f64,
}

impl AvgRewardSolution {
    pub fn action(&self, s: usize) -> usize {
        self.policy[s]
    }
}

pub fn span(h: &[f64]) -> f64 {
    let (lo, hi) = h
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if h.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

/// Solves the average-reward Bellman equation `J + h(s) = max_a r(s,a) + P h`.
///
/// `tol` bounds the span of the Bellman residual relative to the reward
/// scale `max(1, max |r|)`. Argmax ties go to the lowest action index.
pub fn relative_value_iteration(mdp: &TabularMdp, tol: f64, max_iter: usize) -> Result<AvgRewardSolution> {
    let (sol, threshold) = iterate(mdp, tol, max_iter)?;
    if sol.residual > threshold {
        return Err(Error::planner(format!(
            "relative value iteration did not converge in {max_iter} iterations \
             (residual span {:e}, threshold {threshold:e})",
            sol.residual
        )));
    }
    Ok(sol)
}

/// Like [`relative_value_iteration`], but returns the greedy solution of the
/// last iterate when the budget runs out. Sampled models can have transition
/// probabilities so small that the iteration stalls before reaching `tol`;
/// the returned `residual` still bounds the policy's suboptimality.
pub fn relative_value_iteration_best_effort(mdp: &TabularMdp, tol: f64, max_iter: usize) -> Result<AvgRewardSolution> {
    iterate(mdp, tol, max_iter).map(|(sol, _)| sol)
}

fn iterate(mdp: &TabularMdp, tol: f64, max_iter: usize) -> Result<(AvgRewardSolution, f64)> {
    let ns = mdp.n_states();
    let na = mdp.n_actions();
    let scale = mdp.rewards().iter().fold(1.0_f64, |m, r| m.max(r.abs()));
    let threshold = tol * scale;

    let mut h = vec![0.0; ns];
    let mut next = vec![0.0; ns];
    for iter in 1..=max_iter {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in 0..ns {
            let best = (0..na)
                .map(|a| q_value(mdp, &h, s, a))
                .fold(f64::NEG_INFINITY, f64::max);
            next[s] = best + (1.0 - APERIODICITY) * h[s];
            let d = next[s] - h[s];
            lo = lo.min(d);
            hi = hi.max(d);
        }
        if !(hi.is_finite() && lo.is_finite()) {
            return Err(Error::planner("value iteration produced non-finite values"));
        }
        let residual_span = hi - lo;
        if residual_span <= threshold || iter == max_iter {
            let min_h = h.iter().cloned().fold(f64::INFINITY, f64::min);
            let bias: Vec<f64> = h.iter().map(|v| APERIODICITY * (v - min_h)).collect();
            let policy = (0..ns).map(|s| greedy_action(mdp, &h, s)).collect();
            let sol = AvgRewardSolution {
                gain: 0.5 * (hi + lo),
                span: span(&bias),
                bias,
                policy,
                iterations: iter,
                residual: residual_span,
            };
            return Ok((sol, threshold));
        }
        let offset = next[0];
        for (hs, &ns_val) in h.iter_mut().zip(&next) {
            *hs = ns_val - offset;
        }
    }
    Err(Error::planner("relative value iteration needs max_iter >= 1"))
}

/// `r(s,a) + tau * sum_s' P(s'|s,a) h(s')`.
#[inline]
fn q_value(mdp: &TabularMdp, h: &[f64], s: usize, a: usize) -> f64 {
    let row = mdp.row(s, a);
    let expect: f64 = row.iter().zip(h).map(|(p, v)| p * v).sum();
    mdp.reward(s, a) + APERIODICITY * expect
}

fn greedy_action(mdp: &TabularMdp, h: &[f64], s: usize) -> usize {
    let qs: Vec<f64> = (0..mdp.n_actions()).map(|a| q_value(mdp, h, s, a)).collect();
    let best = qs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let eps = 1e-12 * (1.0 + best.abs());
    qs.iter().position(|&q| q >= best - eps).unwrap_or(0)
}
