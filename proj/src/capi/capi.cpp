#include "unstart/unstart.h"

#include <cstring>
#include <filesystem>
#include <new>
#include <string>

#include "commands.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "parallel.hpp"

struct unstart_config {
  unstart::app::RunConfig cfg;
};

struct unstart_path {
  unstart::ldp::InflowPath path;
};

struct unstart_scenario {
  unstart::ldp::Scenario scenario;
};

namespace {

thread_local std::string last_error;

unstart_status set_error(unstart_status s, const std::string& what) {
  last_error = what;
  return s;
}

// Runs fn, translating exceptions into status codes.
template <class Fn>
unstart_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    return fn();
  } catch (const unstart::ConfigError& e) {
    return set_error(UNSTART_ERR_CONFIG, e.what());
  } catch (const unstart::DomainError& e) {
    return set_error(UNSTART_ERR_DOMAIN, e.what());
  } catch (const unstart::ContractError& e) {
    return set_error(UNSTART_ERR_CONTRACT, e.what());
  } catch (const unstart::InvalidStateError& e) {
    return set_error(UNSTART_ERR_INVALID_STATE, e.what());
  } catch (const unstart::InstabilityError& e) {
    return set_error(UNSTART_ERR_INSTABILITY, e.what());
  } catch (const unstart::SpinUpError& e) {
    return set_error(UNSTART_ERR_SPIN_UP, e.what());
  } catch (const unstart::InfeasibleError& e) {
    return set_error(UNSTART_ERR_INFEASIBLE, e.what());
  } catch (const unstart::IoError& e) {
    return set_error(UNSTART_ERR_IO, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return set_error(UNSTART_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return set_error(UNSTART_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(UNSTART_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(UNSTART_ERR_INTERNAL, "unknown error");
  }
}

unstart_status null_arg(const char* name) {
  return set_error(UNSTART_ERR_ARGUMENT, std::string("null argument: ") + name);
}

unstart_status copy_string(const std::string& s, char* buf, size_t cap) {
  if (!buf || cap < s.size() + 1) return set_error(UNSTART_ERR_BUFFER, "buffer too small");
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return UNSTART_OK;
}

void fill(unstart_action_summary* out, const unstart::ldp::ActionResult& r, double bound) {
  out->value = r.value;
  out->bound = bound;
  out->iterations = r.iterations;
  out->feasible = r.feasible ? 1 : 0;
  out->residual = r.residual;
  out->converged = r.converged ? 1 : 0;
  out->pde_runs = r.pde_runs;
}

}  // namespace

extern "C" {

const char* unstart_last_error(void) { return last_error.c_str(); }

const char* unstart_status_name(unstart_status status) {
  switch (status) {
    case UNSTART_OK: return "ok";
    case UNSTART_ERR_ARGUMENT: return "argument error";
    case UNSTART_ERR_DOMAIN: return "domain error";
    case UNSTART_ERR_CONTRACT: return "contract error";
    case UNSTART_ERR_CONFIG: return "config error";
    case UNSTART_ERR_INVALID_STATE: return "invalid state";
    case UNSTART_ERR_INSTABILITY: return "instability";
    case UNSTART_ERR_SPIN_UP: return "spin-up failure";
    case UNSTART_ERR_INFEASIBLE: return "infeasible";
    case UNSTART_ERR_IO: return "i/o error";
    case UNSTART_ERR_BUFFER: return "buffer too small";
    case UNSTART_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

size_t unstart_worker_count(void) { return unstart::worker_count(); }

size_t unstart_preset_count(void) { return unstart::app::preset_names().size(); }

const char* unstart_preset_name(size_t index) {
  static const auto names = unstart::app::preset_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

unstart_status unstart_config_preset(const char* name, unstart_config** out) {
  if (!name) return null_arg("name");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new unstart_config{unstart::app::preset(name)};
    return UNSTART_OK;
  });
}

unstart_status unstart_config_parse(const char* yaml, unstart_config** out) {
  if (!yaml) return null_arg("yaml");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new unstart_config{unstart::app::parse_config(yaml)};
    return UNSTART_OK;
  });
}

unstart_status unstart_config_load(const char* path, unstart_config** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new unstart_config{unstart::app::load_config(path)};
    return UNSTART_OK;
  });
}

unstart_status unstart_config_apply_file(unstart_config* cfg, const char* path) {
  if (!cfg) return null_arg("cfg");
  if (!path) return null_arg("path");
  return guarded([&] {
    cfg->cfg = unstart::app::load_config(path, cfg->cfg);
    return UNSTART_OK;
  });
}

unstart_status unstart_config_clone(const unstart_config* cfg, unstart_config** out) {
  if (!cfg) return null_arg("cfg");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new unstart_config{cfg->cfg};
    return UNSTART_OK;
  });
}

unstart_status unstart_config_set(unstart_config* cfg, const char* key, const char* value) {
  if (!cfg) return null_arg("cfg");
  if (!key) return null_arg("key");
  if (!value) return null_arg("value");
  return guarded([&] {
    cfg->cfg = unstart::app::with_override(cfg->cfg, key, value);
    return UNSTART_OK;
  });
}

unstart_status unstart_config_to_yaml(const unstart_config* cfg, char* buf, size_t cap, size_t* needed) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] {
    const std::string s = unstart::app::to_yaml(cfg->cfg);
    if (needed) *needed = s.size() + 1;
    return copy_string(s, buf, cap);
  });
}

unstart_status unstart_config_hash(const unstart_config* cfg, char out[17]) {
  if (!cfg) return null_arg("cfg");
  if (!out) return null_arg("out");
  return guarded([&] { return copy_string(unstart::app::config_hash(cfg->cfg), out, 17); });
}

unstart_status unstart_config_output_dir(const unstart_config* cfg, char* buf, size_t cap) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] { return copy_string(cfg->cfg.output_dir, buf, cap); });
}

void unstart_config_free(unstart_config* cfg) { delete cfg; }

unstart_status unstart_path_create(const double* coarse, size_t count, size_t refinement, double dt,
                                   unstart_path** out) {
  if (!coarse) return null_arg("coarse");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new unstart_path{unstart::ldp::InflowPath(std::vector<double>(coarse, coarse + count), refinement, dt)};
    return UNSTART_OK;
  });
}

size_t unstart_path_size(const unstart_path* path) { return path ? path->path.coarse().size() : 0; }

unstart_status unstart_path_values(const unstart_path* path, double* out, size_t cap) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  const auto c = path->path.coarse();
  if (cap < c.size()) return set_error(UNSTART_ERR_BUFFER, "buffer too small");
  std::copy(c.begin(), c.end(), out);
  return UNSTART_OK;
}

void unstart_path_free(unstart_path* path) { delete path; }

unstart_status unstart_rate(const unstart_path* path, double sigma_u, double* out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guarded([&] {
    if (!(sigma_u > 0.0)) throw unstart::DomainError("sigma_u must be positive");
    *out = unstart::ldp::rate_discrete(path->path, sigma_u);
    return UNSTART_OK;
  });
}

unstart_status unstart_likelihood_ratio(const unstart_path* path, const unstart_path* center, double sigma_u,
                                        double epsilon, double* out) {
  if (!path) return null_arg("path");
  if (!center) return null_arg("center");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = unstart::sampling::likelihood_ratio(path->path, center->path, sigma_u, epsilon);
    return UNSTART_OK;
  });
}

unstart_status unstart_subsonic_bound(const unstart_config* cfg, double level, double* value,
                                      unstart_path** path) {
  if (!cfg) return null_arg("cfg");
  if (!value) return null_arg("value");
  return guarded([&] {
    const auto& c = cfg->cfg;
    auto b = unstart::ldp::subsonic_bound(c.noise.sigma_u, c.flow.u, c.flow.nominal_mach, level,
                                          unstart::app::make_grid(c));
    *value = b.value;
    if (path) *path = new unstart_path{std::move(b.path)};
    return UNSTART_OK;
  });
}

unstart_status unstart_scenario_create(const unstart_config* cfg, unstart_scenario** out) {
  if (!cfg) return null_arg("cfg");
  if (!out) return null_arg("out");
  return guarded([&] {
    unstart::app::validate(cfg->cfg);
    *out = new unstart_scenario{unstart::app::make_scenario(cfg->cfg)};
    return UNSTART_OK;
  });
}

void unstart_scenario_free(unstart_scenario* scenario) { delete scenario; }

unstart_status unstart_scenario_is_unstart(const unstart_scenario* scenario, const unstart_path* path,
                                           double threshold, int* out) {
  if (!scenario) return null_arg("scenario");
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guarded([&] {
    unstart::ldp::EventSpec spec;
    spec.mach_threshold = threshold;
    *out = unstart::ldp::is_unstart(scenario->scenario, path->path, spec) ? 1 : 0;
    return UNSTART_OK;
  });
}

unstart_status unstart_scenario_minimize(const unstart_scenario* scenario, const unstart_config* cfg,
                                         unstart_action_summary* summary, unstart_path** minimizer) {
  if (!scenario) return null_arg("scenario");
  if (!cfg) return null_arg("cfg");
  if (!summary) return null_arg("summary");
  return guarded([&] {
    namespace app = unstart::app;
    const auto& c = cfg->cfg;
    const auto& sc = scenario->scenario;
    const auto r = unstart::ldp::minimize_action(sc, app::make_event(c), app::make_noise(c), std::nullopt,
                                                 app::make_action_options(c));
    const auto bound = unstart::ldp::subsonic_bound(c.noise.sigma_u, sc.u0(), sc.nominal_mach(),
                                                    c.event.mach_threshold, sc.grid());
    fill(summary, r, bound.value);
    if (minimizer) *minimizer = new unstart_path{r.minimizer};
    return UNSTART_OK;
  });
}

unstart_status unstart_run_simulate(const unstart_config* cfg, const char* out_dir,
                                    unstart_simulate_summary* summary) {
  if (!cfg) return null_arg("cfg");
  if (!out_dir) return null_arg("out_dir");
  return guarded([&] {
    const auto s = unstart::app::run_simulate(cfg->cfg, out_dir);
    if (summary) {
      summary->min_m1 = s.record.min_m1;
      summary->unstart = s.record.unstart_time ? 1 : 0;
      summary->unstart_time = s.record.unstart_time.value_or(0.0);
      summary->steps = s.record.steps;
      summary->final_time = s.record.final_time;
    }
    return UNSTART_OK;
  });
}

unstart_status unstart_run_spin_up(const unstart_config* cfg, const char* out_dir, double* min_mach,
                                   double* max_mach) {
  if (!cfg) return null_arg("cfg");
  if (!out_dir) return null_arg("out_dir");
  return guarded([&] {
    const auto s = unstart::app::run_spin_up(cfg->cfg, out_dir);
    if (min_mach) *min_mach = s.min_mach;
    if (max_mach) *max_mach = s.max_mach;
    return UNSTART_OK;
  });
}

unstart_status unstart_run_optimize(const unstart_config* cfg, const char* out_dir,
                                    unstart_action_summary* summary) {
  if (!cfg) return null_arg("cfg");
  if (!out_dir) return null_arg("out_dir");
  return guarded([&] {
    const auto s = unstart::app::run_optimize(cfg->cfg, out_dir);
    if (summary) fill(summary, s.result, s.bound);
    return UNSTART_OK;
  });
}

unstart_status unstart_run_estimate(const unstart_config* cfg, const char* out_dir, unstart_estimate_row* rows,
                                    size_t cap, size_t* count) {
  if (!cfg) return null_arg("cfg");
  if (!out_dir) return null_arg("out_dir");
  return guarded([&] {
    const auto s = unstart::app::run_estimate(cfg->cfg, out_dir);
    if (count) *count = s.reports.size();
    for (size_t i = 0; rows && i < s.reports.size() && i < cap; ++i) {
      const auto& r = s.reports[i];
      rows[i] = unstart_estimate_row{r.estimator == unstart::sampling::Estimator::MC ? UNSTART_MC : UNSTART_IS,
                                     r.epsilon, r.samples, r.p_hat, r.std_j, r.ci_low, r.ci_high, r.rel_err,
                                     r.hits, r.invalid, r.wall_time};
    }
    if (rows && cap < s.reports.size()) return set_error(UNSTART_ERR_BUFFER, "row buffer too small");
    return UNSTART_OK;
  });
}

size_t unstart_study_count(void) { return unstart::app::study_names().size(); }

const char* unstart_study_name(size_t index) {
  static const auto names = unstart::app::study_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

unstart_status unstart_run_reproduce(const char* study, const unstart_config* cfg, const char* out_root,
                                     char* dir, size_t cap) {
  if (!study) return null_arg("study");
  if (!cfg) return null_arg("cfg");
  if (!out_root) return null_arg("out_root");
  return guarded([&] {
    const auto d = unstart::app::run_reproduce(study, cfg->cfg, out_root);
    return dir ? copy_string(d.string(), dir, cap) : UNSTART_OK;
  });
}

}  // extern "C"
