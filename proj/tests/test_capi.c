/* The public header must compile as C. */
#include <unstart/unstart.h>

#include <math.h>
#include <stdio.h>
#include <string.h>

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

int main(void) {
  unstart_config* cfg = NULL;
  EXPECT(unstart_config_preset("paper-defaults", &cfg) == UNSTART_OK);
  EXPECT(cfg != NULL);

  char hash[17];
  EXPECT(unstart_config_hash(cfg, hash) == UNSTART_OK);
  EXPECT(strlen(hash) == 16);

  EXPECT(unstart_config_set(cfg, "fuel.phi", "0.5") == UNSTART_OK);
  char hash2[17];
  unstart_config_hash(cfg, hash2);
  EXPECT(strcmp(hash, hash2) != 0);

  EXPECT(unstart_config_set(cfg, "fuel.phii", "0.5") == UNSTART_ERR_CONFIG);
  EXPECT(strstr(unstart_last_error(), "fuel.phii") != NULL);
  EXPECT(unstart_config_set(cfg, "fuel.burst", "1.0") == UNSTART_ERR_CONFIG);

  size_t needed = 0;
  EXPECT(unstart_config_to_yaml(cfg, NULL, 0, &needed) == UNSTART_ERR_BUFFER);
  EXPECT(needed > 100);
  char yaml[8192];
  EXPECT(unstart_config_to_yaml(cfg, yaml, sizeof yaml, &needed) == UNSTART_OK);
  unstart_config* back = NULL;
  EXPECT(unstart_config_parse(yaml, &back) == UNSTART_OK);
  char hash3[17];
  unstart_config_hash(back, hash3);
  EXPECT(strcmp(hash2, hash3) == 0);
  unstart_config_free(back);

  unstart_config* bad = NULL;
  EXPECT(unstart_config_preset("no-such-preset", &bad) == UNSTART_ERR_CONFIG);
  EXPECT(bad == NULL);
  EXPECT(unstart_config_preset(NULL, &bad) == UNSTART_ERR_ARGUMENT);
  EXPECT(unstart_config_load("/nonexistent/config.yaml", &bad) == UNSTART_ERR_IO);
  EXPECT(unstart_config_parse("seed: [", &bad) == UNSTART_ERR_CONFIG);

  EXPECT(unstart_preset_count() > 10);
  EXPECT(strcmp(unstart_preset_name(0), "paper-defaults") == 0);
  EXPECT(unstart_preset_name(100000) == NULL);
  EXPECT(unstart_study_count() == 5);

  double value = 0.0;
  unstart_path* ramp = NULL;
  EXPECT(unstart_subsonic_bound(cfg, 1.0, &value, &ramp) == UNSTART_OK);
  EXPECT(fabs(value - 0.21125) < 1e-12);
  EXPECT(unstart_path_size(ramp) == 21);
  double rate = 0.0;
  EXPECT(unstart_rate(ramp, 1e4, &rate) == UNSTART_OK);
  EXPECT(fabs(rate / 0.21125 - 1.0) < 1e-10);
  EXPECT(unstart_subsonic_bound(cfg, 2.5, &value, NULL) == UNSTART_ERR_DOMAIN);

  double coarse[3] = {1300.0, 1000.0, 700.0};
  unstart_path* p = NULL;
  EXPECT(unstart_path_create(coarse, 3, 5000, 1e-6, &p) == UNSTART_OK);
  double w = 0.0;
  EXPECT(unstart_likelihood_ratio(p, ramp, 1e4, 0.2, &w) == UNSTART_ERR_CONTRACT);
  EXPECT(unstart_likelihood_ratio(p, p, 1e4, 0.2, &w) == UNSTART_OK);
  unstart_rate(p, 1e4, &rate);
  EXPECT(fabs(w - exp(-rate / 0.04)) < 1e-12 * w);
  double out[3];
  EXPECT(unstart_path_values(p, out, 2) == UNSTART_ERR_BUFFER);
  EXPECT(unstart_path_values(p, out, 3) == UNSTART_OK);
  EXPECT(out[2] == 700.0);
  EXPECT(unstart_path_create(coarse, 1, 5000, 1e-6, &p) == UNSTART_ERR_CONTRACT);

  EXPECT(unstart_rate(NULL, 1e4, &rate) == UNSTART_ERR_ARGUMENT);
  EXPECT(strcmp(unstart_status_name(UNSTART_ERR_INFEASIBLE), "infeasible") == 0);
  EXPECT(unstart_worker_count() >= 1);

  unstart_path_free(p);
  unstart_path_free(ramp);
  unstart_config_free(cfg);

  /* The spun-up scenario answers event queries. */
  EXPECT(unstart_config_preset("paper-defaults", &cfg) == UNSTART_OK);
  unstart_scenario* sc = NULL;
  EXPECT(unstart_scenario_create(cfg, &sc) == UNSTART_OK);
  double flat[21], deep[21];
  for (int i = 0; i <= 20; ++i) {
    flat[i] = 1300.0;
    deep[i] = 1300.0 - i * 45.0;
  }
  unstart_path* pf = NULL;
  unstart_path* pd = NULL;
  unstart_path_create(flat, 21, 500, 1e-6, &pf);
  unstart_path_create(deep, 21, 500, 1e-6, &pd);
  int hit = -1;
  EXPECT(unstart_scenario_is_unstart(sc, pf, 1.0, &hit) == UNSTART_OK && hit == 0);
  EXPECT(unstart_scenario_is_unstart(sc, pd, 1.0, &hit) == UNSTART_OK && hit == 1);
  unstart_path_free(pf);
  unstart_path_free(pd);
  unstart_scenario_free(sc);
  unstart_config_free(cfg);

  if (failures) fprintf(stderr, "%d failure(s)\n", failures);
  else printf("c api: all checks passed\n");
  return failures ? 1 : 0;
}
