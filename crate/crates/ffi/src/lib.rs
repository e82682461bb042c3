//! C ABI over the `dspsrl` library.
//!
//! Every fallible function returns a [`DspsrlStatus`]; on failure the message
//! is available from [`dspsrl_last_error`] on the same thread. Handles are
//! opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use dspsrl::harness::{execute, regret_curve, Experiment, ExperimentConfig, RegretCurve};
use dspsrl::planners::{plan, solve_dare};
use dspsrl::{Error, TabularMdp};
use nalgebra::DMatrix;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DspsrlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    OutOfRange = 3,
    Validation = 4,
    Domain = 5,
    Dimension = 6,
    Planner = 7,
    ImpossibleObservation = 8,
    Config = 9,
    RunFailed = 10,
    Io = 11,
    Internal = 12,
    Panic = 13,
}

impl From<&Error> for DspsrlStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Validation(_) => DspsrlStatus::Validation,
            Error::Domain(_) => DspsrlStatus::Domain,
            Error::Dimension(_) => DspsrlStatus::Dimension,
            Error::Planner(_) => DspsrlStatus::Planner,
            Error::ImpossibleObservation(_) => DspsrlStatus::ImpossibleObservation,
            Error::Config(_) => DspsrlStatus::Config,
            Error::RunFailed { .. } => DspsrlStatus::RunFailed,
            Error::Io(_) | Error::Csv(_) => DspsrlStatus::Io,
            Error::Internal(_) => DspsrlStatus::Internal,
        }
    }
}

/// A parsed experiment configuration.
pub struct DspsrlConfig {
    inner: ExperimentConfig,
}

struct AgentCurve {
    name: CString,
    curve: Option<RegretCurve>,
}

/// Regret curves of a finished grid, one per agent.
pub struct DspsrlOutcome {
    agents: Vec<AgentCurve>,
    horizon: usize,
}

/// A tabular MDP.
pub struct DspsrlMdp {
    inner: TabularMdp,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: DspsrlStatus, msg: impl Into<String>) -> DspsrlStatus {
    set_error(msg.into());
    status
}

fn fail_with(e: Error) -> DspsrlStatus {
    let status = DspsrlStatus::from(&e);
    fail(status, e.to_string())
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), DspsrlStatus>) -> DspsrlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DspsrlStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(DspsrlStatus::Panic, msg)
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, DspsrlStatus> {
    if p.is_null() {
        return Err(fail(DspsrlStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(DspsrlStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), DspsrlStatus> {
    if p.is_null() {
        Err(fail(DspsrlStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn matrix(p: *const f64, rows: usize, cols: usize, what: &str) -> Result<DMatrix<f64>, DspsrlStatus> {
    non_null(p, what)?;
    Ok(DMatrix::from_row_slice(rows, cols, slice::from_raw_parts(p, rows * cols)))
}

/// Message of the last failure on this thread; empty if none. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dspsrl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dspsrl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a configuration from TOML text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dspsrl_config_parse(text: *const c_char, out: *mut *mut DspsrlConfig) -> DspsrlStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let text = str_arg(text, "text")?;
        let inner = ExperimentConfig::parse(text).map_err(fail_with)?;
        *out = Box::into_raw(Box::new(DspsrlConfig { inner }));
        Ok(())
    })
}

/// Reads and parses a configuration file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dspsrl_config_from_file(path: *const c_char, out: *mut *mut DspsrlConfig) -> DspsrlStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let path = str_arg(path, "path")?;
        let inner = ExperimentConfig::from_file(Path::new(path)).map_err(fail_with)?;
        *out = Box::into_raw(Box::new(DspsrlConfig { inner }));
        Ok(())
    })
}

/// Overrides the horizon, seed count and base seed. Zero leaves a field as is.
///
/// # Safety
/// `config` must come from `dspsrl_config_parse` or `dspsrl_config_from_file`.
#[no_mangle]
pub unsafe extern "C" fn dspsrl_config_override(
    config: *mut DspsrlConfig,
    horizon: u64,
    seeds: u64,
    base_seed: u64,
) -> DspsrlStatus {
    guard(|| {
        non_null(config, "config")?;
        let cfg = &mut (*config).inner;
        if horizon > 0 {
            cfg.horizon = horizon;
        }
        if seeds > 0 {
            cfg.n_seeds = seeds;
        }
        if base_seed > 0 {
            cfg.base_seed = base_seed;
        }
        Ok(())
    })
}

/// # Safety
/// `config` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dspsrl_config_free(config: *mut DspsrlConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

fn outcome_from(results: &[dspsrl::harness::AgentResult], horizon: usize) -> Result<DspsrlOutcome, DspsrlStatus> {
    let mut agents = Vec::new();
    let mut first_failure = None;
    for r in results {
        let curve = match &r.failure {
            Some((i, e)) => {
                first_failure.get_or_insert_with(|| format!("{} run {i}: {e}", r.agent));
                None
            }
            None => Some(regret_curve(r).map_err(fail_with)?),
        };
        agents.push(AgentCurve {
            name: CString::new(r.agent.as_str()).expect("agent names have no NUL"),
            curve,
        });
    }
    if let Some(msg) = first_failure {
        set_error(msg);
    }
    Ok(DspsrlOutcome { agents, horizon })
}

/// Runs the (agent x seed) grid in memory. Agents with a failed run have no
/// curve; the first failure is reported through `dspsrl_last_error` while the
/// status stays `Ok`.
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dspsrl_run(config: *const DspsrlConfig, out: *mut *mut DspsrlOutcome) -> DspsrlStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        non_null(config, "config")?;
        let cfg = (*config).inner.clone();
        let horizon = cfg.horizon as usize;
        let results = Experiment::new(cfg).map_err(fail_with)?.run_grid(false);
        *out = Box::into_raw(Box::new(outcome_from(&results, horizon)?));
        Ok(())
    })
}

/// Runs the grid and writes the CSV files and manifest into `out_dir`.
/// `out` may be null when the curves are not needed.
///
/// # Safety
/// `config` must be a live handle, `out_dir` a NUL-terminated string and
/// `out` null or a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dspsrl_execute(
    config: *const DspsrlConfig,
    out_dir: *const c_char,
    out: *mut *mut DspsrlOutcome,
) -> DspsrlStatus {
    guard(|| {
        if !out.is_null() {
            *out = ptr::null_mut();
        }
        non_null(config, "config")?;
        let dir = str_arg(out_dir, "out_dir")?;
        let cfg = (*config).inner.clone();
        let horizon = cfg.horizon as usize;
        let grid = execute(cfg, Path::new(dir)).map_err(fail_with)?;
        if !out.is_null() {
            *out = Box::into_raw(Box::new(outcome_from(&grid.results, horizon)?));
        }
        Ok(())
    })
}

/// Number of agents in the outcome; 0 for a null handle.
///
/// # Safety
/// `outcome` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dspsrl_outcome_agent_count(outcome: *const DspsrlOutcome) -> usize {
    outcome.as_ref().map_or(0, |o| o.agents.len())
}

/// Steps per run; 0 for a null handle.
///
/// # Safety
/// `outcome` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dspsrl_outcome_horizon(outcome: *const DspsrlOutcome) -> usize {
    outcome.as_ref().map_or(0, |o| o.horizon)
}

/// Name of agent `index`, owned by the outcome; null when out of range.
///
/// # Safety
/// `outcome` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dspsrl_outcome_agent_name(outcome: *const DspsrlOutcome, index: usize) -> *const c_char {
    outcome
        .as_ref()
        .and_then(|o| o.agents.get(index))
        .map_or(ptr::null(), |a| a.name.as_ptr())
}

unsafe fn curve<'a>(outcome: *const DspsrlOutcome, index: usize) -> Result<&'a RegretCurve, DspsrlStatus> {
    non_null(outcome, "outcome")?;
    let agents = &(*outcome).agents;
    let agent = agents
        .get(index)
        .ok_or_else(|| fail(DspsrlStatus::OutOfRange, format!("agent index {index} out of range")))?;
    agent.curve.as_ref().ok_or_else(|| {
        fail(
            DspsrlStatus::RunFailed,
            format!("agent {} has no curve because a run failed", agent.name.to_string_lossy()),
        )
    })
}

/// Mean regret and its standard error after `t` steps (`0 <= t <= horizon`).
///
/// # Safety
/// `outcome` must be a live handle; `mean` and `stderr` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn dspsrl_outcome_regret_at(
    outcome: *const DspsrlOutcome,
    agent: usize,
    t: usize,
    mean: *mut f64,
    stderr: *mut f64,
) -> DspsrlStatus {
    guard(|| {
        non_null(mean, "mean")?;
        non_null(stderr, "stderr")?;
        let c = curve(outcome, agent)?;
        if t > c.len() {
            return Err(fail(DspsrlStatus::OutOfRange, format!("t = {t} exceeds horizon {}", c.len())));
        }
        *mean = c.mean_at(t);
        *stderr = c.stderr_at(t);
        Ok(())
    })
}

/// Copies the mean regret curve for steps `1..=horizon` into `buf`, which
/// must hold `len >= horizon` values.
///
/// # Safety
/// `outcome` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn dspsrl_outcome_copy_mean(
    outcome: *const DspsrlOutcome,
    agent: usize,
    buf: *mut f64,
    len: usize,
) -> DspsrlStatus {
    guard(|| {
        non_null(buf, "buf")?;
        let c = curve(outcome, agent)?;
        if len < c.len() {
            return Err(fail(DspsrlStatus::OutOfRange, format!("buffer holds {len}, need {}", c.len())));
        }
        slice::from_raw_parts_mut(buf, c.len()).copy_from_slice(&c.mean);
        Ok(())
    })
}

/// # Safety
/// `outcome` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dspsrl_outcome_free(outcome: *mut DspsrlOutcome) {
    if !outcome.is_null() {
        drop(Box::from_raw(outcome));
    }
}

/// Builds an MDP from a row-major `[s][a][s']` transition array and a
/// `[s][a]` reward array.
///
/// # Safety
/// `transition` must hold `n_states^2 * n_actions` values, `reward`
/// `n_states * n_actions`, and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dspsrl_mdp_new(
    n_states: usize,
    n_actions: usize,
    transition: *const f64,
    reward: *const f64,
    out: *mut *mut DspsrlMdp,
) -> DspsrlStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        non_null(transition, "transition")?;
        non_null(reward, "reward")?;
        let cells = n_states
            .checked_mul(n_actions)
            .and_then(|c| c.checked_mul(n_states).map(|t| (c, t)));
        let (n_sa, n_sas) = cells.ok_or_else(|| fail(DspsrlStatus::OutOfRange, "MDP size overflows"))?;
        let p = slice::from_raw_parts(transition, n_sas).to_vec();
        let r = slice::from_raw_parts(reward, n_sa).to_vec();
        let inner = TabularMdp::new(n_states, n_actions, p, r).map_err(fail_with)?;
        *out = Box::into_raw(Box::new(DspsrlMdp { inner }));
        Ok(())
    })
}

/// Solves for the optimal average reward. `policy` may be null; otherwise it
/// receives one action per state and must hold `n_states` entries.
///
/// # Safety
/// `mdp` must be a live handle, `gain` a valid pointer and `policy` null or
/// valid for `n_states` writes.
#[no_mangle]
pub unsafe extern "C" fn dspsrl_mdp_solve(mdp: *const DspsrlMdp, gain: *mut f64, policy: *mut usize) -> DspsrlStatus {
    guard(|| {
        non_null(mdp, "mdp")?;
        non_null(gain, "gain")?;
        let sol = plan(&(*mdp).inner).map_err(fail_with)?;
        *gain = sol.gain;
        if !policy.is_null() {
            slice::from_raw_parts_mut(policy, sol.policy.len()).copy_from_slice(&sol.policy);
        }
        Ok(())
    })
}

/// # Safety
/// `mdp` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dspsrl_mdp_free(mdp: *mut DspsrlMdp) {
    if !mdp.is_null() {
        drop(Box::from_raw(mdp));
    }
}

/// Solves the discrete algebraic Riccati equation for `x' = Ax + Bu + w` with
/// stage cost `x'Qx + u'Ru` and noise covariance `W`. Matrices are row-major:
/// `A`, `Q`, `W` are `n x n`, `B` is `n x d`, `R` is `d x d`. Writes `P`
/// (`n x n`), the gain `K` (`d x n`, `u = -Kx`) and the optimal average cost;
/// `p_out` and `gain_out` may be null.
///
/// # Safety
/// Every non-null pointer must be valid for the sizes above.
#[no_mangle]
pub unsafe extern "C" fn dspsrl_solve_dare(
    n: usize,
    d: usize,
    a: *const f64,
    b: *const f64,
    q: *const f64,
    r: *const f64,
    w: *const f64,
    p_out: *mut f64,
    gain_out: *mut f64,
    avg_cost: *mut f64,
) -> DspsrlStatus {
    guard(|| {
        non_null(avg_cost, "avg_cost")?;
        if n == 0 || d == 0 {
            return Err(fail(DspsrlStatus::Dimension, "n and d must be positive"));
        }
        let sol = solve_dare(
            &matrix(a, n, n, "A")?,
            &matrix(b, n, d, "B")?,
            &matrix(q, n, n, "Q")?,
            &matrix(r, d, d, "R")?,
            &matrix(w, n, n, "W")?,
        )
        .map_err(fail_with)?;
        *avg_cost = sol.avg_cost;
        if !p_out.is_null() {
            copy_row_major(&sol.p, p_out);
        }
        if !gain_out.is_null() {
            copy_row_major(&sol.gain, gain_out);
        }
        Ok(())
    })
}

unsafe fn copy_row_major(m: &DMatrix<f64>, out: *mut f64) {
    let dst = slice::from_raw_parts_mut(out, m.len());
    for (i, row) in m.row_iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            dst[i * m.ncols() + j] = *v;
        }
    }
}
