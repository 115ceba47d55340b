/* Plain C consumer of the shared library. */
#include "dsid/dsid.h"

#include <stdio.h>

int main(void) {
  dsid_config* cfg = NULL;
  dsid_result* res = NULL;
  double err = 0.0;
  dsid_status st = dsid_config_parse(
      "n_agents = 6\nl = 2\ntheta_star = 0.3, -0.2\nsteps = 500\ntopology.p = 1\n", &cfg);
  if (st != DSID_OK) {
    fprintf(stderr, "parse: %s\n", dsid_last_error());
    return 1;
  }
  st = dsid_run(cfg, &res);
  if (st != DSID_OK) {
    fprintf(stderr, "run: %s\n", dsid_last_error());
    dsid_config_free(cfg);
    return 1;
  }
  dsid_result_metric(res, "mean_error", &err);
  printf("mean_error %.6f\n", err);
  dsid_result_free(res);
  dsid_config_free(cfg);
  return err >= 0.0 ? 0 : 1;
}
