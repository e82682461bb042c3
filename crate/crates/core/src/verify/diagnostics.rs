use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::agents::AgentKind;
use crate::error::{Error, Result};
use crate::harness::{Experiment, ExperimentConfig, RunRecord};
use crate::mdp::{EpisodeLog, TabularMdp};

/// Cross-seed mean of `N_{j-1} |theta* - theta_j|^2` per episode `j`, where
/// `N_{j-1}` is one plus the number of steps before episode `j` starts
/// (the switch time itself).
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationTrack {
    /// Mean statistic of episode `j` (index `j - 1`).
    pub per_episode: Vec<f64>,
    /// Mean `N_{j-1}` of episode `j`.
    pub n_prev: Vec<f64>,
    /// Runs contributing to episode `j`.
    pub runs: Vec<usize>,
    pub max: f64,
    /// 1-based episode attaining `max`.
    pub argmax: usize,
    /// Least-squares slope of the statistic against `N_{j-1}`; a clearly
    /// positive slope flags a non-concentrating posterior.
    pub slope_vs_n: f64,
}

pub fn track_concentration(records: &[RunRecord]) -> Result<ConcentrationTrack> {
    let mut sums: Vec<f64> = Vec::new();
    let mut n_sums: Vec<f64> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for r in records {
        let theta_star = r
            .true_param
            .scalar()
            .ok_or_else(|| Error::Validation("concentration needs scalar parameters".into()))?;
        for (j, (t, p)) in r.switch_times.iter().zip(&r.sampled_params).enumerate() {
            let theta = p
                .scalar()
                .ok_or_else(|| Error::Validation("concentration needs scalar parameters".into()))?;
            if sums.len() <= j {
                sums.push(0.0);
                n_sums.push(0.0);
                counts.push(0);
            }
            sums[j] += *t as f64 * (theta_star - theta).powi(2);
            n_sums[j] += *t as f64;
            counts[j] += 1;
        }
    }
    let per_episode: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    let n_prev: Vec<f64> = n_sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    let (argmax, max) = per_episode
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |best, (j, v)| if v > best.1 { (j + 1, v) } else { best });
    Ok(ConcentrationTrack {
        slope_vs_n: slope(&n_prev, &per_episode),
        per_episode,
        n_prev,
        runs: counts,
        max,
        argmax,
    })
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    if x.len() < 2 {
        return 0.0;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Model and bias adopted from step `start` on.
#[derive(Debug, Clone, Copy)]
pub struct SampledEpisode<'a> {
    pub start: u64,
    pub model: &'a TabularMdp,
    pub bias: &'a [f64],
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSeries {
    /// `sum_x (P(x|s_t,a_t,theta*) - P(x|s_t,a_t,theta_t)) h_t(x)`.
    pub delta: Vec<f64>,
    /// L1 distance of the two transition rows at `(s_t, a_t)`.
    pub l1: Vec<f64>,
    /// `max_x |h_t(x)|`.
    pub h_sup: Vec<f64>,
    pub total: f64,
}

/// Per-step `Delta_t` of a tabular run.
pub fn delta_t_diagnostic(log: &EpisodeLog, true_model: &TabularMdp, episodes: &[SampledEpisode<'_>]) -> Result<DeltaSeries> {
    if episodes.is_empty() || episodes[0].start != 1 {
        return Err(Error::Validation("episodes must start at t = 1".into()));
    }
    let mut out = DeltaSeries {
        delta: Vec::with_capacity(log.transitions.len()),
        l1: Vec::with_capacity(log.transitions.len()),
        h_sup: Vec::with_capacity(log.transitions.len()),
        total: 0.0,
    };
    let mut e = 0;
    for tr in &log.transitions {
        while e + 1 < episodes.len() && episodes[e + 1].start <= tr.t {
            e += 1;
        }
        let ep = &episodes[e];
        if ep.bias.len() != true_model.n_states() || ep.model.n_states() != true_model.n_states() {
            return Err(Error::Dimension("sampled model does not match the true model".into()));
        }
        let p = true_model.row(tr.state, tr.action);
        let q = ep.model.row(tr.state, tr.action);
        let mut d = 0.0;
        let mut l1 = 0.0;
        for x in 0..p.len() {
            d += (p[x] - q[x]) * ep.bias[x];
            l1 += (p[x] - q[x]).abs();
        }
        out.delta.push(d);
        out.l1.push(l1);
        out.h_sup.push(ep.bias.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        out.total += d;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestStatus {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingIdentityReport {
    pub switch_index: usize,
    pub n_runs: usize,
    pub true_counts: Vec<usize>,
    pub sampled_counts: Vec<usize>,
    pub chi2: f64,
    pub dof: usize,
    pub p_value: f64,
    pub status: TestStatus,
}

/// Minimum runs per support atom with positive prior mass.
pub const IDENTITY_MIN_PER_ATOM: usize = 30;

/// Two-sample chi-square statistic, degrees of freedom and p-value for two
/// count vectors over the same categories. Empty categories are dropped.
pub fn chi2_two_sample(a: &[usize], b: &[usize]) -> (f64, usize, f64) {
    let na: f64 = a.iter().sum::<usize>() as f64;
    let nb: f64 = b.iter().sum::<usize>() as f64;
    let total = na + nb;
    let mut stat = 0.0;
    let mut cats = 0;
    for (&x, &y) in a.iter().zip(b) {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        cats += 1;
        let ea = na * col / total;
        let eb = nb * col / total;
        stat += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    if cats < 2 {
        return (0.0, 0, 1.0);
    }
    let dof = cats - 1;
    let p = ChiSquared::new(dof as f64).map(|d| d.sf(stat)).unwrap_or(f64::NAN);
    (stat, dof, p)
}

/// Compares the marginal of the true parameter with the marginal of the
/// parameter DS-PSRL samples at its `switch_index`-th switch, over `n_runs`
/// runs whose true parameter is drawn from the prior.
pub fn sampling_identity_test(config: &ExperimentConfig, switch_index: usize, n_runs: u64) -> Result<SamplingIdentityReport> {
    if switch_index == 0 {
        return Err(Error::Validation("switch_index is 1-based".into()));
    }
    let mut cfg = config.clone();
    cfg.true_param_from_prior = true;
    cfg.horizon = 1u64 << (switch_index - 1);
    cfg.n_seeds = n_runs;
    cfg.agents = vec![AgentKind::DsPsrl];
    let exp = Experiment::new(cfg)?;
    let family = exp
        .family()
        .ok_or_else(|| Error::Validation("the test needs a finite parameter support".into()))?
        .clone();
    let support = family.support().to_vec();
    let pairs: Vec<(usize, usize)> = (0..n_runs)
        .into_par_iter()
        .map(|i| {
            let r = exp.run(AgentKind::DsPsrl, i, false)?;
            let sampled = r.sampled_params[switch_index - 1].scalar().unwrap();
            let j = support.iter().position(|&s| s == sampled).unwrap();
            Ok((r.true_index.unwrap(), j))
        })
        .collect::<Result<_>>()?;
    let k = support.len();
    let mut true_counts = vec![0; k];
    let mut sampled_counts = vec![0; k];
    for (t, s) in pairs {
        true_counts[t] += 1;
        sampled_counts[s] += 1;
    }
    let (chi2, dof, p_value) = chi2_two_sample(&true_counts, &sampled_counts);
    let prior = match &exp.config.env {
        crate::harness::EnvSpec::RiverSwim(s) => s.prior.to_vec(),
        crate::harness::EnvSpec::Poi(s) => s.prior.clone().unwrap_or_else(|| vec![1.0; k]),
        _ => unreachable!("finite families only"),
    };
    let thin = prior
        .iter()
        .zip(&true_counts)
        .any(|(&w, &c)| w > 0.0 && c < IDENTITY_MIN_PER_ATOM);
    let status = if thin {
        TestStatus::Inconclusive
    } else if p_value > 0.001 {
        TestStatus::Pass
    } else {
        TestStatus::Fail
    };
    Ok(SamplingIdentityReport {
        switch_index,
        n_runs: n_runs as usize,
        true_counts,
        sampled_counts,
        chi2,
        dof,
        p_value,
        status,
    })
}

/// Median across runs of the posterior mass on the true parameter at each
/// switch index, and whether the medians are non-decreasing.
pub fn posterior_median_trend(records: &[RunRecord]) -> (Vec<f64>, bool) {
    let len = records.iter().map(|r| r.posterior_true_at_switch.len()).min().unwrap_or(0);
    let medians: Vec<f64> = (0..len)
        .map(|j| {
            let mut v: Vec<f64> = records.iter().map(|r| r.posterior_true_at_switch[j]).collect();
            v.sort_by(f64::total_cmp);
            let m = v.len();
            if m % 2 == 1 {
                v[m / 2]
            } else {
                0.5 * (v[m / 2 - 1] + v[m / 2])
            }
        })
        .collect();
    let monotone = medians.windows(2).all(|w| w[1] >= w[0]);
    (medians, monotone)
}

/// Every DS-PSRL run switched exactly `floor(log2 T) + 1` times.
pub fn switch_count_identity(records: &[RunRecord], horizon: u64) -> bool {
    let expected = horizon.ilog2() as usize + 1;
    records
        .iter()
        .filter(|r| r.agent == AgentKind::DsPsrl)
        .all(|r| r.switch_times.len() == expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::SampledParam;

    fn record(theta_star: f64, switches: &[(u64, f64)]) -> RunRecord {
        RunRecord {
            agent: AgentKind::DsPsrl,
            run_index: 0,
            true_index: None,
            true_param: SampledParam::Scalar(theta_star),
            j_star: 0.0,
            rewards: vec![],
            switch_times: switches.iter().map(|s| s.0).collect(),
            sampled_params: switches.iter().map(|s| SampledParam::Scalar(s.1)).collect(),
            posterior_true_at_switch: vec![],
            span_at_switch: vec![],
            log: None,
        }
    }

    #[test]
    fn known_parameter_gives_zero() {
        let r = record(2.0, &[(1, 2.0), (2, 2.0), (4, 2.0)]);
        let c = track_concentration(&[r.clone(), r]).unwrap();
        assert_eq!(c.per_episode, vec![0.0; 3]);
        assert_eq!(c.n_prev, vec![1.0, 2.0, 4.0]);
        assert_eq!(c.max, 0.0);
    }

    #[test]
    fn statistic_by_hand() {
        let a = record(1.0, &[(1, 2.0), (2, 1.0)]);
        let b = record(1.0, &[(1, 1.0), (2, 3.0)]);
        let c = track_concentration(&[a, b]).unwrap();
        // episode 1: (1*1 + 0)/2, episode 2: (0 + 2*4)/2
        assert_eq!(c.per_episode, vec![0.5, 4.0]);
        assert_eq!((c.max, c.argmax), (4.0, 2));
        assert!(c.slope_vs_n > 0.0);
    }

    #[test]
    fn chi2_identical_counts() {
        let (stat, dof, p) = chi2_two_sample(&[50, 50], &[50, 50]);
        assert_eq!((stat, dof), (0.0, 1));
        assert!((p - 1.0).abs() < 1e-12);
        assert_eq!(chi2_two_sample(&[10, 0], &[10, 0]).2, 1.0);
    }

    #[test]
    fn chi2_hand_value() {
        // 2x2 table [[30, 70], [50, 50]]: expected 40/60 per row
        let (stat, dof, p) = chi2_two_sample(&[30, 70], &[50, 50]);
        let expected = 2.0 * (100.0 / 40.0 + 100.0 / 60.0);
        assert!((stat - expected).abs() < 1e-12);
        assert_eq!(dof, 1);
        assert!(p < 0.01);
    }

    #[test]
    fn median_trend() {
        let mut a = record(1.0, &[]);
        a.posterior_true_at_switch = vec![0.5, 0.6, 0.9];
        let mut b = record(1.0, &[]);
        b.posterior_true_at_switch = vec![0.5, 0.4, 0.95];
        let mut c = record(1.0, &[]);
        c.posterior_true_at_switch = vec![0.5, 0.7, 0.99];
        let (m, ok) = posterior_median_trend(&[a, b, c]);
        assert_eq!(m, vec![0.5, 0.6, 0.95]);
        assert!(ok);
    }
}
