use crate::error::{Error, Result};

/// Cumulative regret `j_star * t - sum_{tau <= t} reward_tau` for `t = 1..=T`.
pub fn compute_regret(rewards: &[f64], j_star: f64) -> Vec<f64> {
    let mut total = 0.0;
    rewards
        .iter()
        .enumerate()
        .map(|(i, r)| {
            total += r;
            j_star * (i + 1) as f64 - total
        })
        .collect()
}

/// Regret curves of several seeds with their pointwise mean and standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretCurve {
    pub per_seed: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    /// Sample standard deviation over `sqrt(n_seeds)`; zero for one seed.
    pub stderr: Vec<f64>,
}

impl RegretCurve {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn n_seeds(&self) -> usize {
        self.per_seed.len()
    }

    /// Mean regret at step `t` (1-based); `regret(0) = 0`.
    pub fn mean_at(&self, t: usize) -> f64 {
        if t == 0 {
            0.0
        } else {
            self.mean[t - 1]
        }
    }

    pub fn stderr_at(&self, t: usize) -> f64 {
        if t == 0 {
            0.0
        } else {
            self.stderr[t - 1]
        }
    }
}

/// Pointwise mean and standard error across equally long curves.
pub fn aggregate(curves: Vec<Vec<f64>>) -> Result<RegretCurve> {
    let n = curves.len();
    if n == 0 {
        return Err(Error::validation("no curves to aggregate"));
    }
    let len = curves[0].len();
    if let Some(bad) = curves.iter().position(|c| c.len() != len) {
        return Err(Error::dimension(format!(
            "curve {bad} has length {}, expected {len}",
            curves[bad].len()
        )));
    }
    let mut mean = vec![0.0; len];
    let mut stderr = vec![0.0; len];
    for t in 0..len {
        let m = curves.iter().map(|c| c[t]).sum::<f64>() / n as f64;
        mean[t] = m;
        if n > 1 {
            let var = curves.iter().map(|c| (c[t] - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            stderr[t] = (var / n as f64).sqrt();
        }
    }
    Ok(RegretCurve {
        per_seed: curves,
        mean,
        stderr,
    })
}
