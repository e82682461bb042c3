#![allow(dead_code)]

use std::path::PathBuf;

use dspsrl::harness::ExperimentConfig;
use dspsrl::TabularMdp;
use nalgebra::{DMatrix, DVector};

pub fn config(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ExperimentConfig::from_file(&path).unwrap()
}

/// Stationary distribution of a chain with a single recurrent class, from
/// `mu (P - I) = 0` with one balance equation replaced by `sum mu = 1`.
pub fn stationary(p: &DMatrix<f64>) -> DVector<f64> {
    let n = p.nrows();
    let mut m = p.transpose() - DMatrix::identity(n, n);
    for j in 0..n {
        m[(n - 1, j)] = 1.0;
    }
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    m.lu().solve(&rhs).expect("single recurrent class")
}

/// Long-run average reward of a deterministic stationary policy.
pub fn policy_gain(mdp: &TabularMdp, policy: &[usize]) -> f64 {
    let n = mdp.n_states();
    let p = DMatrix::from_fn(n, n, |s, x| mdp.prob(s, policy[s], x));
    let mu = stationary(&p);
    (0..n).map(|s| mu[s] * mdp.reward(s, policy[s])).sum()
}

/// Best gain over all `A^S` deterministic policies.
pub fn best_gain_by_enumeration(mdp: &TabularMdp) -> (f64, Vec<usize>) {
    let (n, a) = (mdp.n_states(), mdp.n_actions());
    let mut best = (f64::NEG_INFINITY, vec![]);
    let total = a.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let policy: Vec<usize> = (0..n)
            .map(|_| {
                let act = c % a;
                c /= a;
                act
            })
            .collect();
        let g = policy_gain(mdp, &policy);
        if g > best.0 {
            best = (g, policy);
        }
    }
    best
}
