#ifndef DSPSRL_H
#define DSPSRL_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes.
 */
typedef enum DspsrlStatus {
  DSPSRL_STATUS_OK = 0,
  DSPSRL_STATUS_NULL_POINTER = 1,
  DSPSRL_STATUS_INVALID_UTF8 = 2,
  DSPSRL_STATUS_OUT_OF_RANGE = 3,
  DSPSRL_STATUS_VALIDATION = 4,
  DSPSRL_STATUS_DOMAIN = 5,
  DSPSRL_STATUS_DIMENSION = 6,
  DSPSRL_STATUS_PLANNER = 7,
  DSPSRL_STATUS_IMPOSSIBLE_OBSERVATION = 8,
  DSPSRL_STATUS_CONFIG = 9,
  DSPSRL_STATUS_RUN_FAILED = 10,
  DSPSRL_STATUS_IO = 11,
  DSPSRL_STATUS_INTERNAL = 12,
  DSPSRL_STATUS_PANIC = 13,
} DspsrlStatus;

/*
 A parsed experiment configuration.
 */
typedef struct DspsrlConfig DspsrlConfig;

/*
 A tabular MDP.
 */
typedef struct DspsrlMdp DspsrlMdp;

/*
 Regret curves of a finished grid, one per agent.
 */
typedef struct DspsrlOutcome DspsrlOutcome;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failure on this thread; empty if none. The pointer is
 valid until the next failing call on the same thread.
 */
const char *dspsrl_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *dspsrl_version(void);

/*
 Parses a configuration from TOML text.

 # Safety
 `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum DspsrlStatus dspsrl_config_parse(const char *text, struct DspsrlConfig **out);

/*
 Reads and parses a configuration file.

 # Safety
 `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum DspsrlStatus dspsrl_config_from_file(const char *path, struct DspsrlConfig **out);

/*
 Overrides the horizon, seed count and base seed. Zero leaves a field as is.

 # Safety
 `config` must come from `dspsrl_config_parse` or `dspsrl_config_from_file`.
 */
enum DspsrlStatus dspsrl_config_override(struct DspsrlConfig *config,
                                         uint64_t horizon,
                                         uint64_t seeds,
                                         uint64_t base_seed);

/*
 # Safety
 `config` must be null or a handle not yet freed.
 */
void dspsrl_config_free(struct DspsrlConfig *config);

/*
 Runs the (agent x seed) grid in memory. Agents with a failed run have no
 curve; the first failure is reported through `dspsrl_last_error` while the
 status stays `Ok`.

 # Safety
 `config` must be a live handle and `out` a valid pointer.
 */
enum DspsrlStatus dspsrl_run(const struct DspsrlConfig *config, struct DspsrlOutcome **out);

/*
 Runs the grid and writes the CSV files and manifest into `out_dir`.
 `out` may be null when the curves are not needed.

 # Safety
 `config` must be a live handle, `out_dir` a NUL-terminated string and
 `out` null or a valid pointer.
 */
enum DspsrlStatus dspsrl_execute(const struct DspsrlConfig *config,
                                 const char *out_dir,
                                 struct DspsrlOutcome **out);

/*
 Number of agents in the outcome; 0 for a null handle.

 # Safety
 `outcome` must be null or a live handle.
 */
size_t dspsrl_outcome_agent_count(const struct DspsrlOutcome *outcome);

/*
 Steps per run; 0 for a null handle.

 # Safety
 `outcome` must be null or a live handle.
 */
size_t dspsrl_outcome_horizon(const struct DspsrlOutcome *outcome);

/*
 Name of agent `index`, owned by the outcome; null when out of range.

 # Safety
 `outcome` must be null or a live handle.
 */
const char *dspsrl_outcome_agent_name(const struct DspsrlOutcome *outcome, size_t index);

/*
 Mean regret and its standard error after `t` steps (`0 <= t <= horizon`).

 # Safety
 `outcome` must be a live handle; `mean` and `stderr` valid pointers.
 */
enum DspsrlStatus dspsrl_outcome_regret_at(const struct DspsrlOutcome *outcome,
                                           size_t agent,
                                           size_t t,
                                           double *mean,
                                           double *stderr);

/*
 Copies the mean regret curve for steps `1..=horizon` into `buf`, which
 must hold `len >= horizon` values.

 # Safety
 `outcome` must be a live handle and `buf` valid for `len` writes.
 */
enum DspsrlStatus dspsrl_outcome_copy_mean(const struct DspsrlOutcome *outcome,
                                           size_t agent,
                                           double *buf,
                                           size_t len);

/*
 # Safety
 `outcome` must be null or a handle not yet freed.
 */
void dspsrl_outcome_free(struct DspsrlOutcome *outcome);

/*
 Builds an MDP from a row-major `[s][a][s']` transition array and a
 `[s][a]` reward array.

 # Safety
 `transition` must hold `n_states^2 * n_actions` values, `reward`
 `n_states * n_actions`, and `out` must be a valid pointer.
 */
enum DspsrlStatus dspsrl_mdp_new(size_t n_states,
                                 size_t n_actions,
                                 const double *transition,
                                 const double *reward,
                                 struct DspsrlMdp **out);

/*
 Solves for the optimal average reward. `policy` may be null; otherwise it
 receives one action per state and must hold `n_states` entries.

 # Safety
 `mdp` must be a live handle, `gain` a valid pointer and `policy` null or
 valid for `n_states` writes.
 */
enum DspsrlStatus dspsrl_mdp_solve(const struct DspsrlMdp *mdp, double *gain, size_t *policy);

/*
 # Safety
 `mdp` must be null or a handle not yet freed.
 */
void dspsrl_mdp_free(struct DspsrlMdp *mdp);

/*
 Solves the discrete algebraic Riccati equation for `x' = Ax + Bu + w` with
 stage cost `x'Qx + u'Ru` and noise covariance `W`. Matrices are row-major:
 `A`, `Q`, `W` are `n x n`, `B` is `n x d`, `R` is `d x d`. Writes `P`
 (`n x n`), the gain `K` (`d x n`, `u = -Kx`) and the optimal average cost;
 `p_out` and `gain_out` may be null.

 # Safety
 Every non-null pointer must be valid for the sizes above.
 */
enum DspsrlStatus dspsrl_solve_dare(size_t n,
                                    size_t d,
                                    const double *a,
                                    const double *b,
                                    const double *q,
                                    const double *r,
                                    const double *w,
                                    double *p_out,
                                    double *gain_out,
                                    double *avg_cost);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DSPSRL_H */
