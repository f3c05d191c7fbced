/* C interface to the scramjet unstart rare-event toolkit.
 *
 * Every function returns an unstart_status. On failure the thread-local
 * message from unstart_last_error() describes the problem. Handles are
 * opaque and owned by the caller; release them with the matching _free.
 * Handles are immutable once built and may be shared between threads,
 * except unstart_config_set, which mutates its argument. */
#ifndef UNSTART_UNSTART_H
#define UNSTART_UNSTART_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define UNSTART_API __declspec(dllexport)
#else
#define UNSTART_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum unstart_status {
  UNSTART_OK = 0,
  UNSTART_ERR_ARGUMENT = 1,      /* null handle or bad argument */
  UNSTART_ERR_DOMAIN = 2,        /* value outside a function's domain */
  UNSTART_ERR_CONTRACT = 3,      /* mismatched grids, missing center, ... */
  UNSTART_ERR_CONFIG = 4,        /* configuration parse or validation error */
  UNSTART_ERR_INVALID_STATE = 5, /* nonpositive density or pressure */
  UNSTART_ERR_INSTABILITY = 6,   /* CFL number above 1 with uniform steps */
  UNSTART_ERR_SPIN_UP = 7,       /* equilibrium not reached */
  UNSTART_ERR_INFEASIBLE = 8,    /* no starting path inside the event */
  UNSTART_ERR_IO = 9,
  UNSTART_ERR_BUFFER = 10,       /* output buffer too small */
  UNSTART_ERR_INTERNAL = 11
} unstart_status;

typedef enum unstart_estimator { UNSTART_MC = 0, UNSTART_IS = 1 } unstart_estimator;

typedef struct unstart_config unstart_config;
typedef struct unstart_path unstart_path;
typedef struct unstart_scenario unstart_scenario;

typedef struct unstart_simulate_summary {
  double min_m1;
  int unstart; /* 1 when the monitor cell reached the threshold */
  double unstart_time;
  size_t steps;
  double final_time;
} unstart_simulate_summary;

typedef struct unstart_action_summary {
  double value;
  double bound; /* straight-line subsonic bound at the same Mach level */
  size_t iterations;
  int feasible;
  double residual;
  int converged;
  size_t pde_runs;
} unstart_action_summary;

typedef struct unstart_estimate_row {
  unstart_estimator estimator;
  double epsilon;
  size_t samples;
  double p_hat;
  double std_j;
  double ci_low;
  double ci_high;
  double rel_err; /* NaN when p_hat is 0 */
  size_t hits;
  size_t invalid;
  double wall_time;
} unstart_estimate_row;

UNSTART_API const char* unstart_last_error(void);
UNSTART_API const char* unstart_status_name(unstart_status status);
UNSTART_API size_t unstart_worker_count(void);

/* Configuration */
UNSTART_API size_t unstart_preset_count(void);
UNSTART_API const char* unstart_preset_name(size_t index);
UNSTART_API unstart_status unstart_config_preset(const char* name, unstart_config** out);
UNSTART_API unstart_status unstart_config_parse(const char* yaml, unstart_config** out);
UNSTART_API unstart_status unstart_config_load(const char* path, unstart_config** out);
/* Applies a YAML file over an existing configuration. */
UNSTART_API unstart_status unstart_config_apply_file(unstart_config* cfg, const char* path);
UNSTART_API unstart_status unstart_config_clone(const unstart_config* cfg, unstart_config** out);
/* Sets one dotted key, e.g. ("fuel.phi", "0.5"); the value is YAML text. */
UNSTART_API unstart_status unstart_config_set(unstart_config* cfg, const char* key, const char* value);
/* Canonical YAML. *needed receives the size including the terminator. */
UNSTART_API unstart_status unstart_config_to_yaml(const unstart_config* cfg, char* buf, size_t cap,
                                                  size_t* needed);
/* 16 hex digits plus terminator. */
UNSTART_API unstart_status unstart_config_hash(const unstart_config* cfg, char out[17]);
UNSTART_API unstart_status unstart_config_output_dir(const unstart_config* cfg, char* buf, size_t cap);
UNSTART_API void unstart_config_free(unstart_config* cfg);

/* Inflow paths: coarse control values with refinement m and fine step dt. */
UNSTART_API unstart_status unstart_path_create(const double* coarse, size_t count, size_t refinement,
                                               double dt, unstart_path** out);
UNSTART_API size_t unstart_path_size(const unstart_path* path);
UNSTART_API unstart_status unstart_path_values(const unstart_path* path, double* out, size_t cap);
UNSTART_API void unstart_path_free(unstart_path* path);
UNSTART_API unstart_status unstart_rate(const unstart_path* path, double sigma_u, double* out);
UNSTART_API unstart_status unstart_likelihood_ratio(const unstart_path* path, const unstart_path* center,
                                                    double sigma_u, double epsilon, double* out);
/* Straight line from u0 to the speed of Mach `level`; path may be NULL. */
UNSTART_API unstart_status unstart_subsonic_bound(const unstart_config* cfg, double level, double* value,
                                                  unstart_path** path);

/* Scenario: solver set-up plus its spun-up equilibrium. */
UNSTART_API unstart_status unstart_scenario_create(const unstart_config* cfg, unstart_scenario** out);
UNSTART_API void unstart_scenario_free(unstart_scenario* scenario);
UNSTART_API unstart_status unstart_scenario_is_unstart(const unstart_scenario* scenario,
                                                       const unstart_path* path, double threshold,
                                                       int* out);
UNSTART_API unstart_status unstart_scenario_minimize(const unstart_scenario* scenario,
                                                     const unstart_config* cfg,
                                                     unstart_action_summary* summary,
                                                     unstart_path** minimizer);

/* Commands; each writes its artifacts under out_dir. */
UNSTART_API unstart_status unstart_run_simulate(const unstart_config* cfg, const char* out_dir,
                                                unstart_simulate_summary* summary);
UNSTART_API unstart_status unstart_run_spin_up(const unstart_config* cfg, const char* out_dir,
                                               double* min_mach, double* max_mach);
UNSTART_API unstart_status unstart_run_optimize(const unstart_config* cfg, const char* out_dir,
                                                unstart_action_summary* summary);
/* Copies up to cap reports into rows; *count receives the total. */
UNSTART_API unstart_status unstart_run_estimate(const unstart_config* cfg, const char* out_dir,
                                                unstart_estimate_row* rows, size_t cap, size_t* count);
UNSTART_API size_t unstart_study_count(void);
UNSTART_API const char* unstart_study_name(size_t index);
/* Writes the new run directory into dir (may be NULL). */
UNSTART_API unstart_status unstart_run_reproduce(const char* study, const unstart_config* cfg,
                                                 const char* out_root, char* dir, size_t cap);

#ifdef __cplusplus
}
#endif

#endif
