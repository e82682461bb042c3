#include <stdio.h>
#include <string.h>

#include "dspsrl.h"

#define CHECK(cond)                                                       \
  do {                                                                    \
    if (!(cond)) {                                                        \
      fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #cond,      \
              dspsrl_last_error());                                       \
      return 1;                                                           \
    }                                                                     \
  } while (0)

int main(void) {
  const char *text =
      "environment = \"riverswim\"\n"
      "agents = [\"ds_psrl\", \"oracle\"]\n"
      "horizon = 64\n"
      "seeds = 2\n";
  DspsrlConfig *cfg = NULL;
  CHECK(dspsrl_config_parse(text, &cfg) == DSPSRL_STATUS_OK);

  DspsrlOutcome *out = NULL;
  CHECK(dspsrl_run(cfg, &out) == DSPSRL_STATUS_OK);
  CHECK(dspsrl_outcome_agent_count(out) == 2);
  CHECK(strcmp(dspsrl_outcome_agent_name(out, 0), "ds_psrl") == 0);
  double mean = -1, se = -1;
  CHECK(dspsrl_outcome_regret_at(out, 0, 0, &mean, &se) == DSPSRL_STATUS_OK);
  CHECK(mean == 0.0 && se == 0.0);
  CHECK(dspsrl_outcome_regret_at(out, 0, 65, &mean, &se) == DSPSRL_STATUS_OUT_OF_RANGE);
  dspsrl_outcome_free(out);
  dspsrl_config_free(cfg);

  /* two states; action 1 moves to the rewarding state 1 */
  double p[] = {1, 0, 0, 1, 0, 1, 1, 0};
  double r[] = {0, 0, 1, 1};
  DspsrlMdp *mdp = NULL;
  CHECK(dspsrl_mdp_new(2, 2, p, r, &mdp) == DSPSRL_STATUS_OK);
  double gain = 0;
  size_t policy[2];
  CHECK(dspsrl_mdp_solve(mdp, &gain, policy) == DSPSRL_STATUS_OK);
  CHECK(gain > 1 - 1e-9 && gain < 1 + 1e-9);
  CHECK(policy[0] == 1 && policy[1] == 0);
  dspsrl_mdp_free(mdp);

  CHECK(dspsrl_config_parse("horizon = \"x\"\n", &cfg) == DSPSRL_STATUS_CONFIG);
  CHECK(cfg == NULL);
  CHECK(strstr(dspsrl_last_error(), "line 1") != NULL);
  printf("ok %s\n", dspsrl_version());
  return 0;
}
