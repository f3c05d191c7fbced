// Command-line front end. Talks to the library only through the C API.

#include <unstart/unstart.h>

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

namespace {

struct Options {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<double> epsilon;
  std::optional<std::size_t> samples;
  std::string estimator;
  std::string stepping;
  std::optional<std::size_t> ntilde;
  bool sweep = false;
  std::string inflow;
  std::string inflow_file;
  std::vector<std::string> sets;
  std::string study;
};

class Failure {
 public:
  explicit Failure(unstart_status s) : status(s) {}
  unstart_status status;
};

void check(unstart_status s) {
  if (s != UNSTART_OK) throw Failure(s);
}

struct Config {
  unstart_config* cfg = nullptr;
  ~Config() { unstart_config_free(cfg); }
  void set(const std::string& key, const std::string& value) { check(unstart_config_set(cfg, key.c_str(), value.c_str())); }
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string output_dir(const Config& c) {
  char buf[4096];
  check(unstart_config_output_dir(c.cfg, buf, sizeof buf));
  return buf;
}

// Preset (default paper-defaults), then the config file, then flags.
void build(Config& c, const Options& o, const std::string& command) {
  check(unstart_config_preset(o.preset.empty() ? "paper-defaults" : o.preset.c_str(), &c.cfg));
  if (!o.config.empty()) check(unstart_config_apply_file(c.cfg, o.config.c_str()));
  if (o.seed) c.set("seed", std::to_string(*o.seed));
  if (!o.out.empty()) c.set("output_dir", "\"" + o.out + "\"");
  if (o.ntilde) c.set("grid.ntilde", std::to_string(*o.ntilde));
  if (o.epsilon) {
    c.set("noise.epsilon", num(*o.epsilon));
    c.set("estimate.epsilons", "[" + num(*o.epsilon) + "]");
  }
  if (o.sweep) c.set("estimate.epsilons", "[0.2, 0.22, 0.24, 0.26, 0.28, 0.3, 0.32, 0.34, 0.36, 0.38, 0.4]");
  if (o.samples) c.set("estimate.samples", std::to_string(*o.samples));
  if (!o.estimator.empty()) c.set("estimate.kinds", o.estimator == "both" ? "[mc, is]" : "[" + o.estimator + "]");
  if (!o.stepping.empty()) c.set(command == "simulate" ? "simulate.stepping" : "estimate.stepping", o.stepping);
  if (!o.inflow.empty()) c.set("simulate.inflow", o.inflow);
  if (!o.inflow_file.empty()) {
    c.set("simulate.inflow", "file");
    c.set("simulate.file", "\"" + o.inflow_file + "\"");
  }
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      throw Failure(UNSTART_ERR_ARGUMENT);
    }
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
}

void print_hash(const Config& c) {
  char hash[17];
  check(unstart_config_hash(c.cfg, hash));
  std::printf("config %s\n", hash);
}

int simulate(const Options& o) {
  Config c;
  build(c, o, "simulate");
  print_hash(c);
  unstart_simulate_summary s{};
  const std::string dir = output_dir(c);
  check(unstart_run_simulate(c.cfg, dir.c_str(), &s));
  std::printf("min M1 %.6f\n", s.min_m1);
  if (s.unstart)
    std::printf("unstart at t = %.6e s\n", s.unstart_time);
  else
    std::printf("no unstart over %.6e s (%zu steps)\n", s.final_time, s.steps);
  std::printf("artifacts in %s\n", dir.c_str());
  return 0;
}

int spin_up(const Options& o) {
  Config c;
  build(c, o, "spin-up");
  print_hash(c);
  double lo = 0, hi = 0;
  const std::string dir = output_dir(c);
  check(unstart_run_spin_up(c.cfg, dir.c_str(), &lo, &hi));
  std::printf("equilibrium Mach range [%.6f, %.6f]\n", lo, hi);
  std::printf("artifacts in %s\n", dir.c_str());
  return 0;
}

int optimize(const Options& o) {
  Config c;
  build(c, o, "optimize");
  print_hash(c);
  unstart_action_summary s{};
  const std::string dir = output_dir(c);
  check(unstart_run_optimize(c.cfg, dir.c_str(), &s));
  std::printf("value %.6f\nbound %.6f\nratio %.6f\n", s.value, s.bound, s.value / s.bound);
  std::printf("iterations %zu, feasible %s, residual %.3e, converged %s\n", s.iterations,
              s.feasible ? "yes" : "no", s.residual, s.converged ? "yes" : "no");
  std::printf("artifacts in %s\n", dir.c_str());
  return s.feasible ? 0 : 3;
}

int estimate(const Options& o) {
  Config c;
  build(c, o, "estimate");
  print_hash(c);
  const std::string dir = output_dir(c);
  std::vector<unstart_estimate_row> rows(64);
  std::size_t n = 0;
  unstart_status st = unstart_run_estimate(c.cfg, dir.c_str(), rows.data(), rows.size(), &n);
  if (st == UNSTART_ERR_BUFFER) st = UNSTART_OK;  // artifacts are complete; only the echo is truncated
  check(st);
  std::printf("%-3s %6s %8s %12s %12s %26s %10s %6s %7s\n", "est", "eps", "J", "p_hat", "std_j", "ci99",
              "rel_err", "hits", "invalid");
  for (std::size_t i = 0; i < n && i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::printf("%-3s %6.3f %8zu %12.5e %12.5e [%11.4e, %11.4e] %10.4f %6zu %7zu\n",
                r.estimator == UNSTART_MC ? "mc" : "is", r.epsilon, r.samples, r.p_hat, r.std_j, r.ci_low,
                r.ci_high, r.rel_err, r.hits, r.invalid);
  }
  std::printf("artifacts in %s\n", dir.c_str());
  return 0;
}

int reproduce(const Options& o) {
  Config c;
  build(c, o, "reproduce");
  print_hash(c);
  char dir[4096];
  const std::string root = output_dir(c);
  check(unstart_run_reproduce(o.study.c_str(), c.cfg, root.c_str(), dir, sizeof dir));
  std::printf("study %s written to %s\n", o.study.c_str(), dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scramjet unstart rare-event analysis.\n"
               "Worker threads: UNSTART_WORKERS (default: hardware concurrency)."};
  app.require_subcommand(1);
  Options o;

  std::vector<std::string> presets;
  for (std::size_t i = 0; i < unstart_preset_count(); ++i) presets.push_back(unstart_preset_name(i));
  std::vector<std::string> studies;
  for (std::size_t i = 0; i < unstart_study_count(); ++i) studies.push_back(unstart_study_name(i));

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "YAML configuration file")->check(CLI::ExistingFile);
    sub->add_option("--preset", o.preset, "Named preset")->check(CLI::IsMember(presets));
    sub->add_option("--seed", o.seed, "Base seed");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--ntilde", o.ntilde, "Coarse control points")->check(CLI::IsMember({20, 40}));
    sub->add_option("--set", o.sets, "Override a config key, key=value (repeatable)");
  };

  auto* sim = app.add_subcommand("simulate", "Run the flow solver for one inflow path");
  add_common(sim);
  sim->add_option("--stepping", o.stepping, "Time stepping")->check(CLI::IsMember({"uniform", "adaptive"}));
  sim->add_option("--epsilon", o.epsilon, "Noise scale for a sampled inflow");
  sim->add_option("--inflow", o.inflow, "Inflow kind")->check(CLI::IsMember({"constant", "file", "sampled"}));
  sim->add_option("--inflow-file", o.inflow_file, "Two-column (t, u) CSV")->check(CLI::ExistingFile);

  auto* spin = app.add_subcommand("spin-up", "Compute the equilibrium flow");
  add_common(spin);

  auto* opt = app.add_subcommand("optimize", "Minimize the action over the unstart set");
  add_common(opt);

  auto* est = app.add_subcommand("estimate", "Monte Carlo probability estimates");
  add_common(est);
  est->add_option("--epsilon", o.epsilon, "Noise scale");
  est->add_flag("--sweep", o.sweep, "Use epsilon = 0.2, 0.22, ..., 0.4");
  est->add_option("--samples", o.samples, "Samples per estimate")->check(CLI::PositiveNumber);
  est->add_option("--estimator", o.estimator, "Estimator")->check(CLI::IsMember({"mc", "is", "both"}));
  est->add_option("--stepping", o.stepping, "Time stepping")->check(CLI::IsMember({"uniform", "adaptive"}));

  auto* rep = app.add_subcommand("reproduce", "Run a named study into a new directory");
  add_common(rep);
  rep->add_option("study", o.study, "Study name")->required()->check(CLI::IsMember(studies));

  CLI11_PARSE(app, argc, argv);
  try {
    if (sim->parsed()) return simulate(o);
    if (spin->parsed()) return spin_up(o);
    if (opt->parsed()) return optimize(o);
    if (est->parsed()) return estimate(o);
    return reproduce(o);
  } catch (const Failure& f) {
    std::fprintf(stderr, "error (%s): %s\n", unstart_status_name(f.status), unstart_last_error());
    return 2;
  }
}
