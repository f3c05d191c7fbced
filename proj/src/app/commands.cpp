#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "errors.hpp"

namespace unstart::app {

namespace {

double sound_speed(const RunConfig& cfg) { return make_freestream(cfg).sound_speed(make_gas(cfg)); }

ldp::InflowPath simulate_inflow(const RunConfig& cfg) {
  const auto grid = make_grid(cfg);
  switch (cfg.simulate.inflow) {
    case InflowKind::Constant: {
      const double u = cfg.simulate.speed > 0.0 ? cfg.simulate.speed : cfg.flow.u;
      return ldp::InflowPath::constant(u, grid.ntilde, grid.refinement, grid.dt);
    }
    case InflowKind::File:
      return load_inflow_csv(cfg.simulate.file, cfg.grid.dt, cfg.grid.steps);
    case InflowKind::Sampled: {
      auto rng = sampling::sample_stream(cfg.seed, 0);
      return sampling::sample_path_p(rng, cfg.noise.sigma_u, cfg.noise.epsilon, cfg.flow.u, grid);
    }
  }
  throw ContractError("unhandled inflow kind");
}

std::string fixed(double v, int digits) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(digits);
  o << v;
  return o.str();
}

std::string eps_label(double e) { return fixed(e, 2); }

}  // namespace

ArtifactTag tag_of(const RunConfig& cfg) { return ArtifactTag{config_hash(cfg), cfg.seed}; }

SimulateSummary run_simulate(const RunConfig& cfg, const fs::path& out) {
  validate(cfg);
  const auto solver = make_solver(cfg);
  const auto eq = solver::spin_up(solver, cfg.flow.u, make_spin_up(cfg));
  const auto inflow = simulate_inflow(cfg);
  solver::RecordOptions rec;
  rec.monitor_cell = cfg.event.monitor_cell;
  rec.threshold = cfg.event.mach_threshold;
  rec.mach_history = rec.shock_history = rec.thrust_history = true;
  rec.every = cfg.simulate.record_every;
  SimulateSummary s{solver::simulate(solver, eq, inflow, make_fuel(cfg), cfg.simulate.stepping, rec), out};
  const auto tag = tag_of(cfg);
  write_text(out / "config.yaml", to_yaml(cfg));
  write_text(out / "summary.json", trajectory_json(s.record, tag, cfg.event.mach_threshold));
  write_text(out / "mach.csv", mach_history_csv(s.record.mach_history, tag));
  write_text(out / "shock.csv", series_csv(s.record.shock_history, "x_shock", tag));
  write_text(out / "thrust.csv", series_csv(s.record.thrust_history, "thrust", tag));
  return s;
}

SpinUpSummary run_spin_up(const RunConfig& cfg, const fs::path& out) {
  validate(cfg);
  const auto solver = make_solver(cfg);
  SpinUpSummary s{solver::spin_up(solver, cfg.flow.u, make_spin_up(cfg)), 0.0, 0.0, out};
  const auto mach = solver.mach_field(s.field);
  s.min_mach = *std::min_element(mach.begin(), mach.end());
  s.max_mach = *std::max_element(mach.begin(), mach.end());
  const auto tag = tag_of(cfg);
  const auto gas = make_gas(cfg);
  std::string csv = csv_header(tag, "x,rho,u,p,mach");
  for (std::size_t k = 0; k < s.field.size(); ++k) {
    const auto w = s.field.at(k);
    csv += number(solver.midpoint(k)) + "," + number(w.rho) + "," + number(w.mom / w.rho) + "," +
           number(solver::pressure(w, gas)) + "," + number(mach[k]) + "\n";
  }
  write_text(out / "config.yaml", to_yaml(cfg));
  write_text(out / "equilibrium.csv", csv);
  write_text(out / "summary.json",
             "{\n  \"min_mach\": " + number(s.min_mach) + ",\n  \"max_mach\": " + number(s.max_mach) +
                 ",\n  \"cells\": " + std::to_string(s.field.size()) + ",\n  \"config_hash\": \"" +
                 tag.config_hash + "\",\n  \"seed\": " + std::to_string(tag.seed) + "\n}\n");
  return s;
}

OptimizeSummary run_optimize(const RunConfig& cfg, const fs::path& out, const ldp::Scenario* scenario) {
  validate(cfg);
  std::optional<ldp::Scenario> own;
  if (!scenario) scenario = &own.emplace(make_scenario(cfg));
  const auto bound = ldp::subsonic_bound(cfg.noise.sigma_u, cfg.flow.u, cfg.flow.nominal_mach,
                                         cfg.event.mach_threshold, scenario->grid());
  OptimizeSummary s{ldp::minimize_action(*scenario, make_event(cfg), make_noise(cfg), std::nullopt,
                                         make_action_options(cfg)),
                    bound.value, out};
  const auto tag = tag_of(cfg);
  write_text(out / "config.yaml", to_yaml(cfg));
  write_text(out / "action.json", action_json(s.result, tag, bound.value, cfg.event.mach_threshold, cfg.noise.epsilon));
  write_text(out / "minimizer.csv", path_csv(s.result.minimizer, tag));
  write_text(out / "minimizer_mach.csv", path_mach_csv(s.result.minimizer, sound_speed(cfg), tag));
  return s;
}

EstimateSummary run_estimate(const RunConfig& cfg, const fs::path& out) {
  validate(cfg);
  const auto scenario = make_scenario(cfg);
  const auto event = make_event(cfg);
  const bool need_center = std::find(cfg.estimate.kinds.begin(), cfg.estimate.kinds.end(),
                                     sampling::Estimator::IS) != cfg.estimate.kinds.end();
  std::optional<ldp::InflowPath> center;
  if (need_center) {
    center = cfg.estimate.center.empty() ? run_optimize(cfg, out / "center", &scenario).result.minimizer
                                         : read_action_path(cfg.estimate.center);
  }
  std::vector<double> eps = cfg.estimate.epsilons;
  if (eps.empty()) eps.push_back(cfg.noise.epsilon);

  const auto tag = tag_of(cfg);
  EstimateSummary s{{}, out};
  std::string sweep = sweep_csv_header(tag);
  write_text(out / "config.yaml", to_yaml(cfg));
  for (double e : eps) {
    std::vector<sampling::EstimatorReport> row;
    for (auto kind : cfg.estimate.kinds) {
      sampling::SampleBatchSpec spec;
      spec.samples = cfg.estimate.samples;
      spec.epsilon = e;
      spec.seed = cfg.seed;
      spec.estimator = kind;
      if (kind == sampling::Estimator::IS) spec.center = center;
      auto r = kind == sampling::Estimator::MC
                   ? sampling::estimate_mc(scenario, event, cfg.noise.sigma_u, spec, cfg.estimate.stepping)
                   : sampling::estimate_is(scenario, event, cfg.noise.sigma_u, spec, cfg.estimate.stepping);
      write_text(out / ("estimate-" + sampling::to_string(kind) + "-eps" + eps_label(e) + ".json"),
                 estimator_json(r, tag));
      row.push_back(r);
    }
    double ratio = std::nan("");
    const auto mc = std::find_if(row.begin(), row.end(), [](auto& r) { return r.estimator == sampling::Estimator::MC; });
    const auto is = std::find_if(row.begin(), row.end(), [](auto& r) { return r.estimator == sampling::Estimator::IS; });
    if (mc != row.end() && is != row.end() && is->std_j > 0.0) ratio = mc->std_j / is->std_j;
    for (const auto& r : row) {
      sweep += sweep_csv_row(r, ratio);
      s.reports.push_back(r);
    }
  }
  write_text(out / "sweep.csv", sweep);
  return s;
}

std::vector<std::string> study_names() {
  return {"table-5.1", "table-5.2", "table-5.4", "table-5.5", "mc-vs-is"};
}

fs::path fresh_directory(const fs::path& root, const std::string& prefix) {
  fs::create_directories(root);
  for (int i = 1; i < 100000; ++i) {
    char suffix[16];
    std::snprintf(suffix, sizeof suffix, "-%03d", i);
    const fs::path dir = root / (prefix + suffix);
    // create_directory reports false when the directory already exists.
    if (fs::create_directory(dir)) return dir;
  }
  throw IoError("no free run directory under '" + root.string() + "'");
}

namespace {

struct StudyRow {
  std::string label;
  double computed;
  std::optional<double> reference;
  std::optional<double> bound;
  std::string note;
};

void write_comparison(const fs::path& dir, const std::string& study, const std::vector<StudyRow>& rows,
                      const ArtifactTag& tag) {
  std::string csv = csv_header(tag, "case,computed,reference,rel_dev,bound,note");
  std::string md = "# " + study + "\n\n| case | computed | reference | rel. dev. | bound | note |\n"
                   "|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    const std::string ref = r.reference ? number(*r.reference) : "";
    const bool has_dev = r.reference && *r.reference != 0.0;
    const double dev = has_dev ? (r.computed - *r.reference) / *r.reference : 0.0;
    const std::string bnd = r.bound ? number(*r.bound) : "";
    csv += r.label + "," + number(r.computed) + "," + ref + "," + (has_dev ? number(dev) : "") + "," + bnd +
           "," + r.note + "\n";
    md += "| " + r.label + " | " + fixed(r.computed, 6) + " | " + ref + " | " +
          (has_dev ? fixed(100.0 * dev, 2) + "%" : "") + " | " + bnd + " | " + r.note + " |\n";
  }
  write_text(dir / "comparison.csv", csv);
  write_text(dir / "comparison.md", md);
}

struct Case {
  std::string label;
  bool long_cycle;
  double threshold = 1.0;
  double theta_c = 7.5;
  std::size_t ntilde = 20;
  std::optional<double> reference;
};

RunConfig apply_case(RunConfig cfg, const Case& c) {
  cfg.fuel.cycle = c.long_cycle ? 2e-3 : 0.5e-3;
  cfg.fuel.burst = c.long_cycle ? 0.4e-3 : 0.1e-3;
  cfg.event.mach_threshold = c.threshold;
  cfg.geometry.theta_combustor = c.theta_c;
  cfg.grid.ntilde = c.ntilde;
  return cfg;
}

std::vector<StudyRow> run_action_cases(const std::vector<Case>& cases, const RunConfig& base,
                                       const fs::path& dir) {
  std::vector<StudyRow> rows;
  for (const auto& c : cases) {
    const RunConfig cfg = apply_case(base, c);
    try {
      const auto s = run_optimize(cfg, dir / c.label);
      rows.push_back({c.label, s.result.value, c.reference, s.bound,
                      s.result.feasible ? s.result.status : "infeasible"});
    } catch (const Error& e) {
      throw Error("case '" + c.label + "' failed: " + e.what());
    }
  }
  return rows;
}

}  // namespace

fs::path run_reproduce(const std::string& study, const RunConfig& base, const fs::path& root) {
  const auto names = study_names();
  if (std::find(names.begin(), names.end(), study) == names.end())
    throw DomainError("unknown study '" + study + "'");
  validate(base);
  const fs::path dir = fresh_directory(root, study);
  write_text(dir / "config.yaml", to_yaml(base));
  std::vector<StudyRow> rows;
  if (study == "table-5.1") {
    rows = run_action_cases({{"short", false, 1.0, 7.5, 20, 0.21504}, {"long", true, 1.0, 7.5, 20, 0.15603}},
                            base, dir);
  } else if (study == "table-5.2") {
    rows = run_action_cases({{"short-0.8", false, 0.8, 7.5, 20, 0.26547},
                             {"short-1.0", false, 1.0, 7.5, 20, 0.21504},
                             {"short-1.2", false, 1.2, 7.5, 20, 0.13667},
                             {"long-0.8", true, 0.8, 7.5, 20, 0.18143},
                             {"long-1.0", true, 1.0, 7.5, 20, 0.15603},
                             {"long-1.2", true, 1.2, 7.5, 20, 0.13532}},
                            base, dir);
  } else if (study == "table-5.4") {
    rows = run_action_cases({{"short-theta-2.5", false, 1.0, 2.5, 20, 0.088937},
                             {"short-theta-7.5", false, 1.0, 7.5, 20, 0.21504},
                             {"short-theta-12", false, 1.0, 12.0, 20, 0.21505},
                             {"long-theta-2.5", true, 1.0, 2.5, 20, 0.046034},
                             {"long-theta-7.5", true, 1.0, 7.5, 20, 0.15603},
                             {"long-theta-12", true, 1.0, 12.0, 20, 0.2147}},
                            base, dir);
  } else if (study == "table-5.5") {
    rows = run_action_cases({{"short-N20", false, 1.0, 7.5, 20, 0.21504},
                             {"short-N40", false, 1.0, 7.5, 40, 0.21503},
                             {"long-N20", true, 1.0, 7.5, 20, 0.15603},
                             {"long-N40", true, 1.0, 7.5, 40, 0.15587}},
                            base, dir);
    for (std::size_t i = 0; i + 1 < rows.size(); i += 2) {
      const double rel = std::abs(rows[i + 1].computed - rows[i].computed) / rows[i].computed;
      rows[i + 1].note += " rel. change vs N20 " + fixed(100.0 * rel, 3) + "%";
    }
  } else {
    RunConfig cfg = apply_case(base, Case{"short", false, 1.0, 7.5, 20, std::nullopt});
    cfg.estimate.kinds = {sampling::Estimator::MC, sampling::Estimator::IS};
    cfg.estimate.samples = 1000;
    cfg.estimate.epsilons = {0.4, 0.3};
    EstimateSummary s;
    try {
      s = run_estimate(cfg, dir / "estimate");
    } catch (const Error& e) {
      throw Error(std::string("case 'mc-vs-is' failed: ") + e.what());
    }
    for (const auto& r : s.reports)
      rows.push_back({sampling::to_string(r.estimator) + "-eps" + eps_label(r.epsilon), r.p_hat, std::nullopt,
                      std::nullopt,
                      "std_j " + number(r.std_j) + " ci99 [" + number(r.ci_low) + " " + number(r.ci_high) + "]"});
  }
  write_comparison(dir, study, rows, tag_of(base));
  return dir;
}

bool shock_enters_isolator(const ldp::Scenario& scenario, double phi) {
  const auto& f = scenario.fuel();
  const engine::FuelSchedule steady(phi, f.cycle(), f.cycle(), f.f_stoch(), f.h_prop(), f.rho0(), f.u0());
  solver::RecordOptions rec;
  rec.shock_history = true;
  try {
    const auto r = solver::simulate(scenario.solver(), scenario.equilibrium(), scenario.constant_path(),
                                    steady, solver::Stepping::Uniform, rec);
    return std::any_of(r.shock_history.begin(), r.shock_history.end(),
                       [](const solver::TimeValue& v) { return v.value < 0.0; });
  } catch (const InstabilityError&) {
    return true;
  } catch (const InvalidStateError&) {
    return true;
  }
}

double steady_fueling_threshold(const ldp::Scenario& scenario, double lo, double hi, std::size_t iterations) {
  if (!(lo < hi)) throw DomainError("need lo < hi");
  if (shock_enters_isolator(scenario, lo)) throw DomainError("shock already enters the isolator at lo");
  if (!shock_enters_isolator(scenario, hi)) throw DomainError("shock does not enter the isolator at hi");
  for (std::size_t i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    (shock_enters_isolator(scenario, mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace unstart::app
