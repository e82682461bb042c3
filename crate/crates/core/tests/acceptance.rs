//! Acceptance suite: one PASS/FAIL line per criterion; exits non-zero if any fails.

mod common;

use std::fs;
use std::path::Path;
use std::time::Instant;

use dspsrl::agents::{AgentKind, DoublingSchedule, TabularAgent, TabularPosterior};
use dspsrl::environments::{build_riverswim, build_scalar_family, RewardKind, RiverSwimConfig, TabularEnv};
use dspsrl::harness::{execute, regret_curve, run_single, AgentResult, EnvSpec, Experiment, ExperimentConfig, RegretCurve};
use dspsrl::planners::plan;
use dspsrl::posteriors::FiniteBelief;
use dspsrl::rng::substream;
use dspsrl::verify::suite::{concentration_ratio, lipschitz_extremal_check, lipschitz_grid_check, pinsker_grid_check};
use dspsrl::verify::{sampling_identity_test, TestStatus, LIPSCHITZ_BOUND};
use dspsrl::TabularMdp;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use std::sync::Arc;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn grid(cfg: ExperimentConfig) -> Vec<AgentResult> {
    let results = Experiment::new(cfg).unwrap().run_grid(false);
    for r in &results {
        if let Some((i, e)) = &r.failure {
            panic!("{} run {i} failed: {e}", r.agent);
        }
    }
    results
}

fn curve_of(results: &[AgentResult], agent: AgentKind) -> RegretCurve {
    regret_curve(results.iter().find(|r| r.agent == agent).unwrap()).unwrap()
}

/// Mean over runs of the average reward in the last `window` steps.
fn tail_mean(results: &[AgentResult], agent: AgentKind, window: usize) -> f64 {
    let r = results.iter().find(|r| r.agent == agent).unwrap();
    let per_run = r.runs.iter().map(|run| {
        let n = run.rewards.len();
        run.rewards[n - window..].iter().sum::<f64>() / window as f64
    });
    per_run.sum::<f64>() / r.runs.len() as f64
}

fn a1_schedule() -> Outcome {
    let cfg = RiverSwimConfig::default();
    let family = Arc::new(build_scalar_family(&cfg).unwrap());
    let env = TabularEnv::new(build_riverswim(&cfg, 2).unwrap(), RewardKind::Table, 0).unwrap();
    let mut details = Vec::new();
    let mut pass = true;
    for horizon in [10u64, 100, 1000, 100_000] {
        let belief = FiniteBelief::uniform(cfg.theta_values.to_vec()).unwrap();
        let posterior = TabularPosterior::finite(belief, family.clone()).unwrap();
        let mut agent = TabularAgent::new(AgentKind::DsPsrl, posterior, cfg.n_states, 2).unwrap();
        let log = run_single(&env, &mut agent, horizon, 1, 0).unwrap();
        let powers: Vec<u64> = (0..64).map(|k| 1u64 << k).take_while(|&p| p <= horizon).collect();
        let ok = log.switch_times == powers
            && DoublingSchedule::switch_times(horizon) == powers
            && log.switch_times.len() == horizon.ilog2() as usize + 1;
        pass &= ok;
        details.push(format!("T={horizon}: {} switches", log.switch_times.len()));
    }
    outcome(pass, details.join(", "))
}

fn random_mdp(rng: &mut impl Rng) -> TabularMdp {
    let n = rng.random_range(1..=4);
    let a = rng.random_range(1..=3);
    let gamma = Gamma::new(1.0, 1.0).unwrap();
    let mut transition = Vec::new();
    for _ in 0..n * a {
        let row: Vec<f64> = (0..n).map(|_| gamma.sample(rng) + 1e-3).collect();
        let sum: f64 = row.iter().sum();
        transition.extend(row.iter().map(|v| v / sum));
    }
    let reward = (0..n * a).map(|_| rng.random_range(0.0..1.0)).collect();
    TabularMdp::new(n, a, transition, reward).unwrap()
}

fn a2_planner() -> Outcome {
    let mut rng = substream(2024, 0, "acceptance/a2");
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let mdp = random_mdp(&mut rng);
        let (best, _) = common::best_gain_by_enumeration(&mdp);
        let sol = plan(&mdp).unwrap();
        worst = worst.max((sol.gain - best).abs());
    }
    outcome(worst <= 1e-6, format!("max |gain - enumeration| = {worst:.2e} over 100 MDPs"))
}

fn a3_exp2_ordering() -> Outcome {
    let cfg = common::config("riverswim_exp2.toml");
    let (t, seeds) = (cfg.horizon as usize, cfg.n_seeds);
    let res = grid(cfg);
    let ds = curve_of(&res, AgentKind::DsPsrl);
    let tsde = curve_of(&res, AgentKind::Tsde);
    let t1 = curve_of(&res, AgentKind::EveryStep);
    // equal J* for all agents, so cumulative reward ordering is the reverse of regret
    let gap = tsde.mean_at(t) - ds.mean_at(t);
    let se = (ds.stderr_at(t).powi(2) + tsde.stderr_at(t).powi(2)).sqrt();
    let pass = ds.mean_at(t) < t1.mean_at(t) && gap > 2.0 * se;
    outcome(
        pass,
        format!(
            "T={t}, {seeds} seeds: regret ds={:.4e}±{:.2e} tsde={:.4e}±{:.2e} t_mod_1={:.4e}±{:.2e}; gap/se={:.2}",
            ds.mean_at(t),
            ds.stderr_at(t),
            tsde.mean_at(t),
            tsde.stderr_at(t),
            t1.mean_at(t),
            t1.stderr_at(t),
            gap / se
        ),
    )
}

fn a4_exp1_parity() -> Outcome {
    let cfg = common::config("riverswim_exp1.toml");
    let res = grid(cfg);
    let oracle = tail_mean(&res, AgentKind::Oracle, 1000);
    let mut pass = true;
    let mut parts = Vec::new();
    for agent in [AgentKind::DsPsrl, AgentKind::Tsde, AgentKind::EveryStep] {
        let frac = tail_mean(&res, agent, 1000) / oracle;
        pass &= frac >= 0.9;
        parts.push(format!("{agent}={frac:.4}"));
    }
    outcome(pass, format!("final-1000 reward / oracle: {}", parts.join(" ")))
}

fn a5_multi_param() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (k, file) in [(6, "riverswim_dirichlet_k6.toml"), (10, "riverswim_dirichlet_k10.toml")] {
        let cfg = common::config(file);
        let t = cfg.horizon as usize;
        let res = grid(cfg);
        let ds = curve_of(&res, AgentKind::DsPsrl);
        let tsde = curve_of(&res, AgentKind::Tsde);
        if k == 10 {
            pass = ds.mean_at(t) <= tsde.mean_at(t);
        }
        parts.push(format!(
            "K={k}: ds={:.4e}±{:.2e} tsde={:.4e}±{:.2e}",
            ds.mean_at(t),
            ds.stderr_at(t),
            tsde.mean_at(t),
            tsde.stderr_at(t)
        ));
    }
    outcome(pass, parts.join("; "))
}

fn a6_lq() -> Outcome {
    let cfg = common::config("lq.toml");
    let exp = Experiment::new(cfg.clone()).unwrap();
    let optimal_cost = exp.lq_system().unwrap().optimal().unwrap().avg_cost;
    let res = grid(cfg);
    let mut pass = true;
    let mut parts = vec![format!("optimal {optimal_cost:.5}")];
    for agent in [AgentKind::DsPsrl, AgentKind::Tsde, AgentKind::EveryStep] {
        let cost = -tail_mean(&res, agent, 500);
        let rel = (cost - optimal_cost).abs() / optimal_cost;
        pass &= rel <= 0.1;
        parts.push(format!("{agent}={cost:.5} ({:+.1}%)", 100.0 * (cost / optimal_cost - 1.0)));
    }
    outcome(pass, parts.join(" "))
}

fn a7_lipschitz() -> Outcome {
    let g = lipschitz_grid_check(1).unwrap();
    let e = lipschitz_extremal_check().unwrap();
    outcome(
        g.status == TestStatus::Pass && e.status == TestStatus::Pass && g.value <= LIPSCHITZ_BOUND + 1e-12,
        format!("grid max ratio {:.6} ({}); extremal {:.6} ({})", g.value, g.detail, e.value, e.detail),
    )
}

fn a8_pinsker() -> Outcome {
    let c = pinsker_grid_check(1, 10_000).unwrap();
    outcome(c.status == TestStatus::Pass, c.detail)
}

fn a9_sampling_identity() -> Outcome {
    let cfg = common::config("riverswim_exp2.toml");
    let mut pass = true;
    let mut parts = Vec::new();
    for k in 1..=3 {
        let r = sampling_identity_test(&cfg, k, 2000).unwrap();
        pass &= r.status == TestStatus::Pass && r.p_value > 0.001;
        parts.push(format!("switch {k}: p={:.4} true={:?} sampled={:?}", r.p_value, r.true_counts, r.sampled_counts));
    }
    outcome(pass, parts.join("; "))
}

fn a10_concentration() -> Outcome {
    let cfg = common::config("poi.toml");
    assert!(matches!(cfg.env, EnvSpec::Poi(_)));
    let (short, long) = concentration_ratio(cfg.base_seed, cfg.n_seeds, (1024, 4096)).unwrap();
    let ratio = long / short;
    outcome(
        ratio <= 1.5,
        format!("max_j statistic {short:.4} at T=1024, {long:.4} at T=4096, ratio {ratio:.3}"),
    )
}

fn a11_sublinear() -> Outcome {
    let mut cfg = common::config("riverswim_exp2.toml");
    cfg.agents = vec![AgentKind::DsPsrl];
    cfg.n_seeds = 50;
    cfg.horizon = 10_000;
    let res = grid(cfg);
    let c = curve_of(&res, AgentKind::DsPsrl);
    let ratio = c.mean_at(10_000) / c.mean_at(2500);
    outcome(
        ratio <= 3.0,
        format!("regret(2500)={:.4e} regret(10000)={:.4e} ratio {ratio:.3}", c.mean_at(2500), c.mean_at(10_000)),
    )
}

fn csv_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn a12_determinism() -> Outcome {
    let mut compared = 0;
    let mut pass = true;
    for (file, horizon) in [
        ("riverswim_exp2.toml", 2000),
        ("riverswim_dirichlet_k6.toml", 1000),
        ("lq.toml", 500),
        ("poi.toml", 1000),
    ] {
        let mut cfg = common::config(file);
        cfg.horizon = horizon;
        cfg.n_seeds = 8;
        cfg.per_seed_columns = true;
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        execute(cfg.clone(), a.path()).unwrap();
        execute(cfg, b.path()).unwrap();
        let (fa, fb) = (csv_bytes(a.path()), csv_bytes(b.path()));
        pass &= !fa.is_empty() && fa == fb;
        pass &= fs::read(a.path().join("manifest.txt")).unwrap() == fs::read(b.path().join("manifest.txt")).unwrap();
        compared += fa.len();
    }
    outcome(pass, format!("{compared} CSV files byte-identical across reruns"))
}

type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("A1", "schedule identity", a1_schedule),
        ("A2", "planner vs policy enumeration", a2_planner),
        ("A3", "experiment 2 ordering", a3_exp2_ordering),
        ("A4", "experiment 1 parity", a4_exp1_parity),
        ("A5", "multi-parameter trend", a5_multi_param),
        ("A6", "LQ convergence", a6_lq),
        ("A7", "Lipschitz bound", a7_lipschitz),
        ("A8", "Pinsker bound", a8_pinsker),
        ("A9", "posterior sampling identity", a9_sampling_identity),
        ("A10", "concentration", a10_concentration),
        ("A11", "sublinear regret", a11_sublinear),
        ("A12", "determinism", a12_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == id) {
            continue;
        }
        let start = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{id:<4} {} {name} [{:.1}s]: {}",
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
