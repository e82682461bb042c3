use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;

use super::constants::concentration_constants;
use super::diagnostics::{
    delta_t_diagnostic, sampling_identity_test, posterior_median_trend, switch_count_identity, track_concentration,
    SampledEpisode, TestStatus,
};
use super::poi_checks::{check_lipschitz, check_pinsker, LIPSCHITZ_BOUND};
use crate::agents::AgentKind;
use crate::environments::PoiModel;
use crate::error::Result;
use crate::harness::{EnvSpec, Experiment, ExperimentConfig, PoiSettings, RiverSwimSettings};
use crate::rng::substream;

pub type Status = TestStatus;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub value: f64,
    pub detail: String,
}

impl Check {
    fn new(name: &str, ok: bool, value: f64, detail: String) -> Self {
        Self {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            value,
            detail,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

fn status_str(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Inconclusive => "inconclusive",
    }
}

impl VerifyReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(s, "{:<13} {:<28} {:>14.6}  {}", status_str(c.status).to_uppercase(), c.name, c.value, c.detail);
        }
        let fails = self.checks.iter().filter(|c| c.status == Status::Fail).count();
        let _ = writeln!(s, "{} checks, {} failed", self.checks.len(), fails);
        s
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join("report.csv"))?;
        w.write_record(["check", "status", "value", "detail"])?;
        for c in &self.checks {
            w.write_record([c.name.as_str(), status_str(c.status), &c.value.to_string(), c.detail.as_str()])?;
        }
        w.flush()?;
        fs::write(dir.join("summary.txt"), self.summary())?;
        Ok(())
    }
}

/// Run counts and horizons for the suite.
#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub seed: u64,
    pub pinsker_tuples: usize,
    pub identity_runs: u64,
    pub concentration_seeds: u64,
    pub concentration_horizons: (u64, u64),
    pub monotone_seeds: u64,
    pub monotone_horizon: u64,
    pub delta_seeds: u64,
    pub delta_horizon: u64,
}

impl SuiteOptions {
    pub fn full(seed: u64) -> Self {
        Self {
            seed,
            pinsker_tuples: 10_000,
            identity_runs: 2000,
            concentration_seeds: 200,
            concentration_horizons: (1024, 4096),
            monotone_seeds: 100,
            monotone_horizon: 4096,
            delta_seeds: 50,
            delta_horizon: 2500,
        }
    }

    pub fn quick(seed: u64) -> Self {
        Self {
            seed,
            pinsker_tuples: 10_000,
            identity_runs: 200,
            concentration_seeds: 30,
            concentration_horizons: (256, 1024),
            monotone_seeds: 100,
            monotone_horizon: 512,
            delta_seeds: 10,
            delta_horizon: 500,
        }
    }
}

fn base_config(env: EnvSpec, seed: u64, horizon: u64, seeds: u64) -> ExperimentConfig {
    ExperimentConfig {
        env,
        agents: vec![AgentKind::DsPsrl],
        horizon,
        n_seeds: seeds,
        base_seed: seed,
        out: None,
        record_diagnostics: false,
        per_seed_columns: false,
        true_param_from_prior: false,
        source: String::new(),
    }
}

/// Lipschitz bound on a random clamped model over `theta in {1, 1.5, ..., 5}`.
pub fn lipschitz_grid_check(seed: u64) -> Result<Check> {
    let thetas: Vec<f64> = (0..9).map(|i| 1.0 + 0.5 * i as f64).collect();
    let s = PoiSettings::default();
    let model = PoiModel::random(4, thetas.clone(), s.clamp, &mut substream(seed, 0, "verify/poi"))?;
    let r = check_lipschitz(&model, &thetas)?;
    let at = r
        .argmax
        .map(|p| format!("argmax s={} a={} theta={} theta'={} p={:.4}", p.s, p.a, p.theta, p.theta_prime, p.p))
        .unwrap_or_default();
    let detail = match r.violation {
        Some(v) => format!("violation at s={} a={} theta={} theta'={} ratio={}", v.s, v.a, v.theta, v.theta_prime, v.ratio),
        None => format!("{} comparisons, bound {:.6}; {at}", r.comparisons, LIPSCHITZ_BOUND),
    };
    Ok(Check::new(
        "lipschitz_grid",
        r.passed() && r.max_ratio <= LIPSCHITZ_BOUND + 1e-12,
        r.max_ratio,
        detail,
    ))
}

/// The bound is approached at `p = e^{-theta}` as `theta, theta' -> 1`.
pub fn lipschitz_extremal_check() -> Result<Check> {
    let p = (-1.0f64).exp();
    let rest = (1.0 - p) / 3.0;
    let row = [p, rest, rest, rest];
    let passive: Vec<f64> = (0..4).flat_map(|_| row).collect();
    let thetas = vec![1.0, 1.001];
    let model = PoiModel::new(4, passive, thetas.clone(), 0.05)?;
    let r = check_lipschitz(&model, &thetas)?;
    let arg_p = r.argmax.map(|a| a.p).unwrap_or(f64::NAN);
    let ok = r.passed() && r.max_ratio >= 0.9 * LIPSCHITZ_BOUND && r.max_ratio <= LIPSCHITZ_BOUND + 1e-12;
    Ok(Check::new(
        "lipschitz_extremal",
        ok && (arg_p - p).abs() < 1e-12,
        r.max_ratio,
        format!("ratio/bound = {:.6} at p = {arg_p:.6}", r.max_ratio / LIPSCHITZ_BOUND),
    ))
}

/// Pinsker bound on random `(p, theta*, theta)` tuples.
pub fn pinsker_grid_check(seed: u64, n: usize) -> Result<Check> {
    let mut rng = substream(seed, 0, "verify/pinsker");
    let mut ok = 0;
    for _ in 0..n {
        let p = rng.random_range(1e-3..1.0 - 1e-3);
        let t1 = rng.random_range(1.0..5.0);
        let t2 = rng.random_range(1.0..5.0);
        if check_pinsker(p, t1, t2)?.ok {
            ok += 1;
        }
    }
    let frac = ok as f64 / n as f64;
    Ok(Check::new("pinsker_grid", ok == n, frac, format!("{ok}/{n} tuples satisfy the bound")))
}

pub fn constants_check() -> Result<Vec<Check>> {
    let s = PoiSettings::default();
    let coarse = concentration_constants(&s.thetas, s.true_theta, s.clamp, 1e-4)?;
    let fine = concentration_constants(&s.thetas, s.true_theta, s.clamp, 1e-5)?;
    let all_positive = fine.b > 0.0 && fine.c0 > 0.0 && fine.kappa > 0.0 && fine.delta_theta > 0.0;
    Ok(vec![
        Check::new(
            "constants_b_refinement",
            (coarse.b - fine.b).abs() < 1e-3,
            fine.b,
            format!("B at 1e-4: {:.6}, at 1e-5: {:.6}", coarse.b, fine.b),
        ),
        Check::new(
            "constants_positive",
            all_positive,
            fine.c0,
            format!("c0 = {:.6}, kappa = {}, delta_theta = {}", fine.c0, fine.kappa, fine.delta_theta),
        ),
    ])
}

pub fn sampling_identity_checks(seed: u64, runs: u64) -> Result<Vec<Check>> {
    let cfg = base_config(EnvSpec::RiverSwim(RiverSwimSettings::default()), seed, 1, runs);
    (1..=3)
        .map(|k| {
            let r = sampling_identity_test(&cfg, k, runs)?;
            Ok(Check {
                name: format!("sampling_identity_switch_{k}"),
                status: r.status,
                value: r.p_value,
                detail: format!(
                    "true {:?} sampled {:?} chi2 = {:.4} dof = {}",
                    r.true_counts, r.sampled_counts, r.chi2, r.dof
                ),
            })
        })
        .collect()
}

/// Max over episodes of the concentration statistic at two horizons.
pub fn concentration_ratio(seed: u64, seeds: u64, horizons: (u64, u64)) -> Result<(f64, f64)> {
    let max_at = |horizon| -> Result<f64> {
        let mut cfg = base_config(EnvSpec::Poi(PoiSettings::default()), seed, horizon, seeds);
        cfg.agents = vec![AgentKind::DsPsrl];
        let exp = Experiment::new(cfg)?;
        let res = exp.run_grid(false).remove(0);
        if let Some((_, e)) = res.failure {
            return Err(e);
        }
        Ok(track_concentration(&res.runs)?.max)
    };
    Ok((max_at(horizons.0)?, max_at(horizons.1)?))
}

pub fn concentration_check(opts: &SuiteOptions) -> Result<Check> {
    let (short, long) = concentration_ratio(opts.seed, opts.concentration_seeds, opts.concentration_horizons)?;
    let ratio = if short > 0.0 { long / short } else if long == 0.0 { 1.0 } else { f64::INFINITY };
    Ok(Check::new(
        "concentration_poi",
        ratio <= 1.5,
        ratio,
        format!(
            "max statistic {short:.4} at T={}, {long:.4} at T={}",
            opts.concentration_horizons.0, opts.concentration_horizons.1
        ),
    ))
}

pub fn monotone_and_switch_checks(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let cfg = base_config(
        EnvSpec::RiverSwim(RiverSwimSettings::default()),
        opts.seed,
        opts.monotone_horizon,
        opts.monotone_seeds,
    );
    let exp = Experiment::new(cfg)?;
    let res = exp.run_grid(false).remove(0);
    if let Some((_, e)) = res.failure {
        return Err(e);
    }
    let (medians, monotone) = posterior_median_trend(&res.runs);
    let medians_txt: Vec<String> = medians.iter().map(|m| format!("{m:.3}")).collect();
    Ok(vec![
        Check::new(
            "posterior_median_monotone",
            monotone,
            *medians.last().unwrap_or(&f64::NAN),
            format!("medians at switches: {}", medians_txt.join(" ")),
        ),
        Check::new(
            "switch_count_identity",
            switch_count_identity(&res.runs, opts.monotone_horizon),
            res.runs[0].switch_times.len() as f64,
            format!("{} runs at T={}", res.runs.len(), opts.monotone_horizon),
        ),
    ])
}

/// `Delta_t` on scalar RiverSwim: Hölder bound per step, and the summed
/// mean against the bound built from empirically measured constants.
pub fn delta_t_checks(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let t = opts.delta_horizon;
    let cfg = base_config(EnvSpec::RiverSwim(RiverSwimSettings::default()), opts.seed, t, opts.delta_seeds);
    let exp = Experiment::new(cfg)?;
    let family = exp.family().unwrap().clone();
    let support = family.support().to_vec();
    let res = exp.run_grid(true).remove(0);
    if let Some((_, e)) = res.failure {
        return Err(e);
    }

    let mut holder_ok = true;
    let mut sum_delta = 0.0;
    let mut h_emp = 0.0f64;
    for r in &res.runs {
        let idx = r.true_index.unwrap();
        let episodes: Vec<SampledEpisode> = r
            .switch_times
            .iter()
            .zip(&r.sampled_params)
            .map(|(&start, p)| {
                let j = support.iter().position(|&s| Some(s) == p.scalar()).unwrap();
                let sol = exp.member_solution(j).unwrap();
                SampledEpisode {
                    start,
                    model: family.model(j),
                    bias: &sol.bias,
                }
            })
            .collect();
        let series = delta_t_diagnostic(r.log.as_ref().unwrap(), family.model(idx), &episodes)?;
        for i in 0..series.delta.len() {
            if series.delta[i].abs() > series.l1[i] * series.h_sup[i] + 1e-12 {
                holder_ok = false;
            }
            h_emp = h_emp.max(series.h_sup[i]);
        }
        sum_delta += series.total;
    }
    let mean_sum = sum_delta / res.runs.len() as f64;

    // C: largest L1 distance per unit parameter gap over all (s, a)
    let mut c_emp = 0.0f64;
    for i in 0..support.len() {
        for j in 0..support.len() {
            if i == j {
                continue;
            }
            let (a, b) = (family.model(i), family.model(j));
            for s in 0..a.n_states() {
                for act in 0..a.n_actions() {
                    let l1: f64 = a.row(s, act).iter().zip(b.row(s, act)).map(|(x, y)| (x - y).abs()).sum();
                    c_emp = c_emp.max(l1 / (support[i] - support[j]).abs());
                }
            }
        }
    }
    let track = track_concentration(&res.runs)?;
    let ln_t = (t as f64).ln();
    let c_prime = track.max / ln_t;
    let bound = c_emp * h_emp * (2.0 * c_prime * t as f64 * ln_t * ln_t).sqrt();
    Ok(vec![
        Check::new("delta_t_holder", holder_ok, h_emp, "|Delta_t| <= L1 * max|h| at every step".into()),
        Check::new(
            "delta_t_sum",
            mean_sum <= bound,
            mean_sum,
            format!("bound {bound:.3} from C = {c_emp:.4}, H = {h_emp:.3}, C' = {c_prime:.4}"),
        ),
    ])
}

/// Runs every check and writes `report.csv` and `summary.txt` into `out`.
pub fn run_suite(opts: &SuiteOptions, out: &Path) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    report.checks.push(lipschitz_grid_check(opts.seed)?);
    report.checks.push(lipschitz_extremal_check()?);
    report.checks.push(pinsker_grid_check(opts.seed, opts.pinsker_tuples)?);
    report.checks.extend(constants_check()?);
    report.checks.extend(sampling_identity_checks(opts.seed, opts.identity_runs)?);
    report.checks.push(concentration_check(opts)?);
    report.checks.extend(monotone_and_switch_checks(opts)?);
    report.checks.extend(delta_t_checks(opts)?);
    report.write(out)?;
    Ok(report)
}
