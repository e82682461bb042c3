mod common;

use std::fs;

use dspsrl::agents::{AgentKind, FixedPolicyAgent, TabularOracle};
use dspsrl::environments::riverswim::LEFT;
use dspsrl::environments::{build_riverswim, RewardKind, RiverSwimConfig, TabularEnv};
use dspsrl::harness::{aggregate, compute_regret, execute, run_single};
use dspsrl::planners::plan;
use dspsrl::SampledParam;

fn river() -> (TabularEnv, f64) {
    let cfg = RiverSwimConfig::default();
    let model = build_riverswim(&cfg, 1).unwrap();
    let j_star = plan(&model).unwrap().gain;
    (TabularEnv::new(model, RewardKind::Table, 0).unwrap(), j_star)
}

#[test]
fn always_left_regret_grows_at_the_gain_gap() {
    let (env, j_star) = river();
    let policy = vec![LEFT; env.model.n_states()];
    let j_left = common::policy_gain(&env.model, &policy);
    let horizon = 5000;
    let log = run_single(&env, &mut FixedPolicyAgent::new("left", policy), horizon, 3, 0).unwrap();
    let rewards: Vec<f64> = log.rewards().collect();
    let regret = compute_regret(&rewards, j_star);
    let slope = (regret[horizon as usize - 1] - regret[999]) / (horizon as f64 - 1000.0);
    assert!((slope - (j_star - j_left)).abs() <= 1e-6 * j_star, "{slope} vs {}", j_star - j_left);
}

#[test]
fn oracle_regret_is_within_noise_of_zero() {
    let (env, j_star) = river();
    let sol = plan(&env.model).unwrap();
    let horizon = 10_000u64;
    let finals: Vec<f64> = (0..20)
        .map(|i| {
            let mut oracle = TabularOracle::from_solution(sol.clone(), SampledParam::TabularModel);
            let log = run_single(&env, &mut oracle, horizon, 5, i).unwrap();
            let rewards: Vec<f64> = log.rewards().collect();
            compute_regret(&rewards, j_star)[horizon as usize - 1] / horizon as f64
        })
        .collect();
    let curve = aggregate(finals.iter().map(|&v| vec![v]).collect()).unwrap();
    // the transient from the start state contributes at most span(h)/T
    let slack = 3.0 * curve.stderr_at(1) + sol.span / horizon as f64;
    assert!(curve.mean_at(1).abs() <= slack, "mean {} slack {slack}", curve.mean_at(1));
}

#[test]
fn execute_writes_one_curve_per_agent_and_a_manifest() {
    let mut cfg = common::config("riverswim_exp2.toml");
    cfg.horizon = 300;
    cfg.n_seeds = 3;
    cfg.per_seed_columns = true;
    let dir = tempfile::tempdir().unwrap();
    let outcome = execute(cfg.clone(), dir.path()).unwrap();
    assert!(outcome.is_complete());
    for agent in &cfg.agents {
        let text = fs::read_to_string(dir.path().join(format!("{agent}.csv"))).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,mean_regret,stderr,seed_0,seed_1,seed_2");
        assert_eq!(lines.len(), 301);
        assert!(lines[300].starts_with("300,"));
    }
    let manifest = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.lines().any(|l| l == "status = complete"));
    assert!(manifest.contains("horizon"));
    assert!(outcome.curve(AgentKind::DsPsrl).is_some());
}
