use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::experiment::AgentResult;
use super::regret::RegretCurve;
use crate::error::Result;

/// Writes `t, mean_regret, stderr` rows for `t = 1..=T`, plus one
/// `seed_<i>` column per run when `per_seed` is set.
pub fn write_curve_csv(path: &Path, curve: &RegretCurve, run_indices: &[u64], per_seed: bool) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["t".to_string(), "mean_regret".into(), "stderr".into()];
    if per_seed {
        header.extend(run_indices.iter().map(|i| format!("seed_{i}")));
    }
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(header.len());
    for t in 0..curve.len() {
        row.clear();
        row.push((t + 1).to_string());
        row.push(curve.mean[t].to_string());
        row.push(curve.stderr[t].to_string());
        if per_seed {
            row.extend(curve.per_seed.iter().map(|c| c[t].to_string()));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Per-run summary: switch count, the true parameter and the posterior
/// mass on it at the last switch (finite supports), and the largest bias
/// span among adopted policies.
pub fn write_diagnostics_csv(path: &Path, result: &AgentResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["run", "switches", "true_index", "final_posterior_true", "max_span", "total_reward"])?;
    for r in &result.runs {
        let opt = |v: Option<String>| v.unwrap_or_default();
        w.write_record([
            r.run_index.to_string(),
            r.switch_times.len().to_string(),
            opt(r.true_index.map(|i| i.to_string())),
            opt(r.posterior_true_at_switch.last().map(|p| p.to_string())),
            opt(r.span_at_switch.iter().copied().reduce(f64::max).map(|s| s.to_string())),
            r.rewards.iter().sum::<f64>().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Key-value manifest describing a grid run.
#[derive(Debug, Clone, Default)]
pub struct Manifest {
    pub entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let v = v.replace('\\', "\\\\").replace('\n', "\\n");
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<PathBuf> {
        fs::write(path, self.render())?;
        Ok(path.to_path_buf())
    }
}
