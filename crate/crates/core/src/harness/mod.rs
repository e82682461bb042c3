//! Experiment orchestration: configuration, the online run loop, regret
//! curves and their aggregation, and CSV output.

pub mod config;
pub mod experiment;
pub mod output;
pub mod regret;
pub mod run;

use std::fs;
use std::path::{Path, PathBuf};

pub use config::{EnvSpec, EnvironmentKind, ExperimentConfig, LqSettings, PoiSettings, RiverSwimSettings};
pub use experiment::{AgentResult, Experiment, RunRecord};
pub use output::{sha256_hex, write_curve_csv, Manifest};
pub use regret::{aggregate, compute_regret, RegretCurve};
pub use run::{agent_stream, env_stream, run_single, run_single_with, Environment};

use crate::agents::AgentKind;
use crate::error::Result;

/// Regret curve of one agent's runs.
pub fn regret_curve(result: &AgentResult) -> Result<RegretCurve> {
    aggregate(
        result
            .runs
            .iter()
            .map(|r| compute_regret(&r.rewards, r.j_star))
            .collect(),
    )
}

/// What [`execute`] produced.
#[derive(Debug)]
pub struct GridOutcome {
    pub results: Vec<AgentResult>,
    pub curves: Vec<(AgentKind, RegretCurve)>,
    pub files: Vec<PathBuf>,
    pub manifest: Manifest,
}

impl GridOutcome {
    pub fn is_complete(&self) -> bool {
        self.results.iter().all(AgentResult::is_complete)
    }

    pub fn curve(&self, agent: AgentKind) -> Option<&RegretCurve> {
        self.curves.iter().find(|(a, _)| *a == agent).map(|(_, c)| c)
    }
}

/// Runs the grid and writes one `<agent>.csv` per agent plus `manifest.txt`
/// into `out_dir`. Agents with a failed run get no CSV and the manifest
/// status is `partial`.
pub fn execute(config: ExperimentConfig, out_dir: &Path) -> Result<GridOutcome> {
    let experiment = Experiment::new(config)?;
    let cfg = &experiment.config;
    fs::create_dir_all(out_dir)?;
    let results = experiment.run_grid(false);

    let mut manifest = Manifest::default();
    manifest.push("config_sha256", sha256_hex(cfg.source.as_bytes()));
    manifest.push("environment", cfg.env.kind().as_str());
    manifest.push("horizon", cfg.horizon);
    manifest.push("n_seeds", cfg.n_seeds);
    manifest.push("base_seed", cfg.base_seed);
    manifest.push(
        "run_indices",
        format!("0..{}", cfg.n_seeds),
    );
    manifest.push("j_star", experiment.default_j_star());

    let mut files = Vec::new();
    let mut curves = Vec::new();
    for result in &results {
        let name = result.agent.as_str();
        if let Some((i, e)) = &result.failure {
            manifest.push(format!("failed.{name}"), format!("run {i}: {e}"));
            continue;
        }
        let curve = regret_curve(result)?;
        let indices: Vec<u64> = result.runs.iter().map(|r| r.run_index).collect();
        let path = out_dir.join(format!("{name}.csv"));
        write_curve_csv(&path, &curve, &indices, cfg.per_seed_columns)?;
        manifest.push(format!("sha256.{name}.csv"), sha256_hex(&fs::read(&path)?));
        files.push(path);
        if cfg.record_diagnostics {
            let path = out_dir.join(format!("{name}_diagnostics.csv"));
            output::write_diagnostics_csv(&path, result)?;
            files.push(path);
        }
        curves.push((result.agent, curve));
    }
    let complete = results.iter().all(AgentResult::is_complete);
    manifest.push("status", if complete { "complete" } else { "partial" });
    manifest.push("config", cfg.source.trim_end());
    files.push(manifest.write(&out_dir.join("manifest.txt"))?);

    Ok(GridOutcome {
        results,
        curves,
        files,
        manifest,
    })
}
