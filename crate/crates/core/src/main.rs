use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dspsrl::harness::{execute, EnvironmentKind, ExperimentConfig};
use dspsrl::verify::{run_suite, SuiteOptions, Status};

#[derive(Parser)]
#[command(name = "dspsrl", version, about = "Posterior sampling with a doubling policy-update schedule")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an (agent x seed) grid and write regret curves.
    Run {
        /// Experiment config file.
        #[arg(long)]
        config: PathBuf,
        /// Base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Steps per run.
        #[arg(long)]
        horizon: Option<u64>,
        /// Number of seeds.
        #[arg(long)]
        seeds: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the numerical assumption checks.
    Verify {
        /// Directory for report.csv and summary.txt.
        #[arg(long, default_value = "verify_out")]
        out: PathBuf,
        /// Smaller run counts for a fast smoke check.
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// List the available environments.
    ListEnvs,
}

fn run(
    config: PathBuf,
    seed: Option<u64>,
    horizon: Option<u64>,
    seeds: Option<u64>,
    out: Option<PathBuf>,
) -> Result<bool, dspsrl::Error> {
    let mut cfg = ExperimentConfig::from_file(&config)?;
    if let Some(s) = seed {
        cfg.base_seed = s;
    }
    if let Some(h) = horizon {
        if h == 0 {
            return Err(dspsrl::Error::Config("--horizon must be at least 1".into()));
        }
        cfg.horizon = h;
    }
    if let Some(n) = seeds {
        if n == 0 {
            return Err(dspsrl::Error::Config("--seeds must be at least 1".into()));
        }
        cfg.n_seeds = n;
    }
    let out_dir = out
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("results"));
    let outcome = execute(cfg, &out_dir)?;
    for (agent, curve) in &outcome.curves {
        let t = curve.len();
        println!(
            "{agent:>8}  regret(T={t}) = {:.3} +- {:.3}",
            curve.mean_at(t),
            curve.stderr_at(t)
        );
    }
    for r in &outcome.results {
        if let Some((i, e)) = &r.failure {
            eprintln!("{}: run {i} failed: {e}", r.agent);
        }
    }
    println!("wrote {} files to {}", outcome.files.len(), out_dir.display());
    Ok(outcome.is_complete())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            seed,
            horizon,
            seeds,
            out,
        } => match run(config, seed, horizon, seeds, out) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(1),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Command::Verify { out, quick, seed } => {
            let opts = if quick { SuiteOptions::quick(seed) } else { SuiteOptions::full(seed) };
            match run_suite(&opts, &out) {
                Ok(report) => {
                    print!("{}", report.summary());
                    if report.checks.iter().any(|c| c.status == Status::Fail) {
                        ExitCode::from(1)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Command::ListEnvs => {
            for (_, name, description) in EnvironmentKind::ALL {
                println!("{name:<20} {description}");
            }
            ExitCode::SUCCESS
        }
    }
}
