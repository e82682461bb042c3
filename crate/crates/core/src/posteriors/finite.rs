use rand::Rng;

use crate::error::{Error, Result};
use crate::mdp::{FiniteModelFamily, Transition};

/// Posterior over a finite scalar support, kept as normalized log-weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteBelief {
    support: Vec<f64>,
    log_weights: Vec<f64>,
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

impl FiniteBelief {
    pub fn uniform(support: Vec<f64>) -> Result<Self> {
        let n = support.len();
        Self::from_weights(support, vec![1.0 / n.max(1) as f64; n])
    }

    pub fn from_weights(support: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != weights.len() {
            return Err(Error::validation("belief needs one weight per support point"));
        }
        crate::rng::validate_row(&weights, crate::rng::INPUT_PROB_TOL)?;
        let mut belief = Self {
            support,
            log_weights: weights.iter().map(|w| w.ln()).collect(),
        };
        belief.normalize();
        Ok(belief)
    }

    pub fn point_mass(support: Vec<f64>, index: usize) -> Result<Self> {
        let mut w = vec![0.0; support.len()];
        *w.get_mut(index)
            .ok_or_else(|| Error::validation(format!("support index {index} out of range")))? = 1.0;
        Self::from_weights(support, w)
    }

    fn normalize(&mut self) {
        let lse = log_sum_exp(&self.log_weights);
        for w in &mut self.log_weights {
            *w -= lse;
        }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.log_weights.iter().map(|w| w.exp()).collect()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.log_weights[index].exp()
    }

    /// Distance of the log-weights from normalization.
    pub fn normalization_error(&self) -> f64 {
        log_sum_exp(&self.log_weights).abs()
    }

    /// Bayes rule with the likelihood of `obs` under each family member.
    pub fn update(&self, family: &dyn FiniteModelFamily, obs: &Transition) -> Result<Self> {
        let mut next = self.clone();
        next.update_in_place(family, obs)?;
        Ok(next)
    }

    pub fn update_in_place(&mut self, family: &dyn FiniteModelFamily, obs: &Transition) -> Result<()> {
        if family.len() != self.support.len() {
            return Err(Error::dimension("family and belief supports differ in size"));
        }
        let likelihoods: Vec<f64> = (0..family.len())
            .map(|i| {
                let m = family.model(i);
                m.check_state(obs.state)?;
                m.check_action(obs.action)?;
                m.check_state(obs.next_state)?;
                Ok(m.prob(obs.state, obs.action, obs.next_state))
            })
            .collect::<Result<_>>()?;
        let feasible = likelihoods
            .iter()
            .zip(&self.log_weights)
            .any(|(&l, &w)| l > 0.0 && w > f64::NEG_INFINITY);
        if !feasible {
            return Err(Error::ImpossibleObservation(format!(
                "transition {} -[{}]-> {} has zero likelihood under every supported parameter",
                obs.state, obs.action, obs.next_state
            )));
        }
        if likelihoods.iter().all(|&l| l == likelihoods[0]) {
            return Ok(());
        }
        for (w, l) in self.log_weights.iter_mut().zip(&likelihoods) {
            *w += l.ln();
        }
        self.normalize();
        Ok(())
    }

    /// Index of a support point drawn with its posterior probability.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = 0;
        for (i, w) in self.log_weights.iter().enumerate() {
            let p = w.exp();
            if p > 0.0 {
                acc += p;
                last = i;
                if u < acc {
                    return i;
                }
            }
        }
        last
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.support[self.sample_index(rng)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::{build_scalar_family, RiverSwimConfig, RIGHT};
    use crate::mdp::{ScalarParamFamily, TabularMdp};
    use crate::rng::seeded_rng;

    fn obs(s: usize, a: usize, n: usize) -> Transition {
        Transition {
            t: 1,
            state: s,
            action: a,
            next_state: n,
            reward: 0.0,
        }
    }

    fn coin_family(p: f64, q: f64) -> ScalarParamFamily {
        let m = |x: f64| TabularMdp::new(2, 1, vec![1.0 - x, x, 1.0 - x, x], vec![0.0; 2]).unwrap();
        ScalarParamFamily::new(vec![1.0, 2.0], vec![m(p), m(q)]).unwrap()
    }

    #[test]
    fn constant_likelihood_leaves_prior() {
        let fam = coin_family(0.3, 0.3);
        let prior = FiniteBelief::from_weights(vec![1.0, 2.0], vec![0.25, 0.75]).unwrap();
        let post = prior.update(&fam, &obs(0, 0, 1)).unwrap();
        assert_eq!(post, prior);
    }

    #[test]
    fn one_step_bayes() {
        let fam = coin_family(0.2, 0.8);
        let post = FiniteBelief::uniform(vec![1.0, 2.0])
            .unwrap()
            .update(&fam, &obs(0, 0, 1))
            .unwrap();
        let p = post.probabilities();
        assert!((p[0] - 0.2).abs() < 1e-12);
        assert!((p[1] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn riverswim_evidence_concentrates() {
        let cfg = RiverSwimConfig {
            contradicting_prefix: 0,
            ..RiverSwimConfig::default()
        };
        let fam = build_scalar_family(&cfg).unwrap();
        let truth = fam.model(1);
        let mut rng = seeded_rng(17);
        let mut belief = FiniteBelief::uniform(fam.support().to_vec()).unwrap();
        // likelihood-ratio oracle accumulated independently
        let mut log_ratio = 0.0;
        for t in 0..50 {
            let s = 2;
            let next = crate::rng::sample_unchecked(truth.row(s, RIGHT), &mut rng);
            let o = Transition { t, state: s, action: RIGHT, next_state: next, reward: 0.0 };
            log_ratio += (fam.model(1).prob(s, RIGHT, next) / fam.model(0).prob(s, RIGHT, next)).ln();
            belief.update_in_place(&fam, &o).unwrap();
        }
        let expected = 1.0 / (1.0 + (-log_ratio).exp());
        assert!((belief.probability(1) - expected).abs() < 1e-12);
        assert!(belief.probability(1) >= 0.99);
    }

    #[test]
    fn impossible_observation() {
        let m = TabularMdp::new(2, 1, vec![1.0, 0.0, 1.0, 0.0], vec![0.0; 2]).unwrap();
        let fam = ScalarParamFamily::new(vec![1.0], vec![m]).unwrap();
        let err = FiniteBelief::uniform(vec![1.0]).unwrap().update(&fam, &obs(0, 0, 1));
        assert!(matches!(err, Err(Error::ImpossibleObservation(_))));
    }

    #[test]
    fn sampling_frequencies_and_purity() {
        let belief = FiniteBelief::uniform(vec![1.0, 2.0]).unwrap();
        let snapshot = belief.clone();
        let mut rng = seeded_rng(8);
        let n = 100_000;
        let ones = (0..n).filter(|_| belief.sample(&mut rng) == 1.0).count();
        assert!((ones as f64 / n as f64 - 0.5).abs() < 0.01);
        assert_eq!(belief, snapshot);

        let point = FiniteBelief::point_mass(vec![1.0, 2.0, 3.0], 2).unwrap();
        assert!((0..1000).all(|_| point.sample(&mut rng) == 3.0));
    }

    #[test]
    fn stays_normalized_over_long_runs() {
        let fam = coin_family(0.45, 0.55);
        let mut belief = FiniteBelief::uniform(vec![1.0, 2.0]).unwrap();
        let mut rng = seeded_rng(5);
        for t in 0..100_000u64 {
            let next = usize::from(rng.random::<f64>() < 0.55);
            belief
                .update_in_place(&fam, &Transition { t, state: 0, action: 0, next_state: next, reward: 0.0 })
                .unwrap();
            assert!(belief.normalization_error() < 1e-9);
        }
        assert!(belief.probability(1) > 0.999);
    }
}
