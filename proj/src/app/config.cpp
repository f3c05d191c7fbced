#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "errors.hpp"

namespace unstart::app {

namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

[[noreturn]] void fail_at(int line, const std::string& what) {
  throw ConfigError(line > 0 ? "line " + std::to_string(line) + ": " + what : what, line);
}

[[noreturn]] void fail(const YAML::Node& n, const std::string& what) { fail_at(line_of(n), what); }

std::string scalar(const YAML::Node& n, const std::string& key) {
  if (!n.IsScalar()) fail(n, "'" + key + "' must be a scalar");
  return n.Scalar();
}

double as_double(const YAML::Node& n, const std::string& key) {
  const std::string s = scalar(n, key);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    fail(n, "'" + key + "' expects a number, got '" + s + "'");
  return v;
}

std::uint64_t as_u64(const YAML::Node& n, const std::string& key) {
  const std::string s = scalar(n, key);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    fail(n, "'" + key + "' expects a nonnegative integer, got '" + s + "'");
  return v;
}

bool as_bool(const YAML::Node& n, const std::string& key) {
  const std::string s = scalar(n, key);
  if (s == "true") return true;
  if (s == "false") return false;
  fail(n, "'" + key + "' expects true or false, got '" + s + "'");
}

using Setter = std::function<void(const YAML::Node&, const std::string&)>;

// Applies every key of a mapping through its setter, rejecting unknown keys.
void read_section(const YAML::Node& node, const std::string& section,
                  const std::map<std::string, Setter>& setters) {
  if (!node.IsMap()) fail(node, "section '" + section + "' must be a mapping");
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    const std::string full = section.empty() ? key : section + "." + key;
    const auto it = setters.find(key);
    if (it == setters.end()) fail(kv.first, "unknown key '" + full + "'");
    try {
      it->second(kv.second, full);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      fail(kv.second, "'" + full + "': " + e.what());
    }
  }
}

Setter num(double& out) {
  return [&out](const YAML::Node& n, const std::string& k) { out = as_double(n, k); };
}
Setter count(std::size_t& out) {
  return [&out](const YAML::Node& n, const std::string& k) { out = as_u64(n, k); };
}
Setter flag(bool& out) {
  return [&out](const YAML::Node& n, const std::string& k) { out = as_bool(n, k); };
}
Setter text(std::string& out) {
  return [&out](const YAML::Node& n, const std::string& k) { out = scalar(n, k); };
}

ldp::ConstraintForm form_from_string(const std::string& s) {
  if (s == "direct") return ldp::ConstraintForm::Direct;
  if (s == "soft-min") return ldp::ConstraintForm::SoftMin;
  throw DomainError("unknown constraint form '" + s + "' (expected direct or soft-min)");
}

InflowKind inflow_from_string(const std::string& s) {
  if (s == "constant") return InflowKind::Constant;
  if (s == "file") return InflowKind::File;
  if (s == "sampled") return InflowKind::Sampled;
  throw DomainError("unknown inflow kind '" + s + "' (expected constant, file or sampled)");
}

void apply(const YAML::Node& root, RunConfig& c) {
  read_section(root, "", {
    {"preset", [](const YAML::Node&, const std::string&) {}},
    {"seed", [&c](const YAML::Node& n, const std::string& k) { c.seed = as_u64(n, k); }},
    {"output_dir", text(c.output_dir)},
    {"flow", [&c](const YAML::Node& n, const std::string& s) {
       read_section(n, s, {{"gamma", num(c.flow.gamma)}, {"rho", num(c.flow.rho)},
                           {"u", num(c.flow.u)}, {"p", num(c.flow.p)},
                           {"nominal_mach", num(c.flow.nominal_mach)}});
     }},
    {"geometry", [&c](const YAML::Node& n, const std::string& s) {
       auto& g = c.geometry;
       read_section(n, s, {{"a0", num(g.a0)}, {"len_isolator", num(g.len_isolator)},
                           {"len_combustor", num(g.len_combustor)},
                           {"len_expansion", num(g.len_expansion)},
                           {"theta_isolator", num(g.theta_isolator)},
                           {"theta_combustor", num(g.theta_combustor)},
                           {"theta_expansion", num(g.theta_expansion)}});
     }},
    {"fuel", [&c](const YAML::Node& n, const std::string& s) {
       auto& f = c.fuel;
       read_section(n, s, {{"phi", num(f.phi)}, {"cycle", num(f.cycle)}, {"burst", num(f.burst)},
                           {"f_stoch", num(f.f_stoch)}, {"h_prop", num(f.h_prop)}});
     }},
    {"grid", [&c](const YAML::Node& n, const std::string& s) {
       auto& g = c.grid;
       read_section(n, s, {{"cells", count(g.cells)}, {"dt", num(g.dt)}, {"steps", count(g.steps)},
                           {"ntilde", count(g.ntilde)}, {"spin_up_time", num(g.spin_up_time)},
                           {"spin_up_tolerance", num(g.spin_up_tolerance)}});
     }},
    {"noise", [&c](const YAML::Node& n, const std::string& s) {
       read_section(n, s, {{"sigma_u", num(c.noise.sigma_u)}, {"sigma_m", num(c.noise.sigma_m)},
                           {"epsilon", num(c.noise.epsilon)}});
     }},
    {"event", [&c](const YAML::Node& n, const std::string& s) {
       read_section(n, s, {{"mach_threshold", num(c.event.mach_threshold)},
                           {"monitor_cell", count(c.event.monitor_cell)}});
     }},
    {"optimizer", [&c](const YAML::Node& n, const std::string& s) {
       auto& o = c.optimizer;
       read_section(n, s, {
         {"form", [&o](const YAML::Node& v, const std::string& k) { o.form = form_from_string(scalar(v, k)); }},
         {"sharpness", num(o.sharpness)}, {"polish", flag(o.polish)}, {"fd_step", num(o.fd_step)},
         {"max_iterations", count(o.max_iterations)},
         {"objective_tolerance", num(o.objective_tolerance)},
         {"residual_tolerance", num(o.residual_tolerance)},
         {"stall_iterations", count(o.stall_iterations)}, {"bracket_low", num(o.bracket_low)},
         {"bracket_high", num(o.bracket_high)}, {"bisections", count(o.bisections)}});
     }},
    {"estimate", [&c](const YAML::Node& n, const std::string& s) {
       auto& e = c.estimate;
       read_section(n, s, {
         {"kinds", [&e](const YAML::Node& v, const std::string& k) {
            if (!v.IsSequence()) fail(v, "'" + k + "' must be a list");
            e.kinds.clear();
            for (const auto& item : v) e.kinds.push_back(sampling::estimator_from_string(scalar(item, k)));
          }},
         {"samples", count(e.samples)},
         {"stepping", [&e](const YAML::Node& v, const std::string& k) { e.stepping = stepping_from_string(scalar(v, k)); }},
         {"epsilons", [&e](const YAML::Node& v, const std::string& k) {
            if (!v.IsSequence()) fail(v, "'" + k + "' must be a list");
            e.epsilons.clear();
            for (const auto& item : v) e.epsilons.push_back(as_double(item, k));
          }},
         {"center", text(e.center)}});
     }},
    {"simulate", [&c](const YAML::Node& n, const std::string& s) {
       auto& m = c.simulate;
       read_section(n, s, {
         {"inflow", [&m](const YAML::Node& v, const std::string& k) { m.inflow = inflow_from_string(scalar(v, k)); }},
         {"speed", num(m.speed)}, {"file", text(m.file)},
         {"stepping", [&m](const YAML::Node& v, const std::string& k) { m.stepping = stepping_from_string(scalar(v, k)); }},
         {"record_every", count(m.record_every)}});
     }},
  });
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, r.ptr);
  // Keep numbers recognisable as floats in the YAML text.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

std::string to_string(InflowKind k) {
  switch (k) {
    case InflowKind::Constant: return "constant";
    case InflowKind::File: return "file";
    case InflowKind::Sampled: return "sampled";
  }
  return "constant";
}

std::string to_string(solver::Stepping s) {
  return s == solver::Stepping::Uniform ? "uniform" : "adaptive";
}

std::string to_string(ldp::ConstraintForm f) {
  return f == ldp::ConstraintForm::Direct ? "direct" : "soft-min";
}

solver::Stepping stepping_from_string(const std::string& s) {
  if (s == "uniform") return solver::Stepping::Uniform;
  if (s == "adaptive") return solver::Stepping::Adaptive;
  throw DomainError("unknown stepping '" + s + "' (expected uniform or adaptive)");
}

RunConfig parse_config(const std::string& text, const RunConfig& base) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    fail_at(e.mark.line >= 0 ? e.mark.line + 1 : 0, "YAML syntax error: " + e.msg);
  }
  if (!root || root.IsNull()) return base;
  if (!root.IsMap()) fail(root, "configuration must be a mapping");
  RunConfig cfg = base;
  if (const auto p = root["preset"]) cfg = preset(scalar(p, "preset"));
  apply(root, cfg);
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path, const RunConfig& base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str(), base);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what(), e.line());
  }
}

RunConfig with_override(const RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key.empty()) throw ConfigError("empty override key");
  std::vector<std::string> parts;
  std::stringstream ks(key);
  for (std::string p; std::getline(ks, p, '.');) parts.push_back(p);
  YAML::Node leaf;
  try {
    leaf = YAML::Load(value);
  } catch (const YAML::Exception& e) {
    throw ConfigError("bad value for '" + key + "': " + e.msg);
  }
  YAML::Node node = leaf;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    YAML::Node parent(YAML::NodeType::Map);
    parent[*it] = node;
    node = parent;
  }
  YAML::Emitter em;
  em << node;
  return parse_config(em.c_str(), cfg);
}

std::string to_yaml(const RunConfig& c) {
  std::ostringstream o;
  o << "seed: " << c.seed << "\n";
  o << "output_dir: " << quote(c.output_dir) << "\n";
  o << "flow:\n"
    << "  gamma: " << fmt(c.flow.gamma) << "\n"
    << "  rho: " << fmt(c.flow.rho) << "\n"
    << "  u: " << fmt(c.flow.u) << "\n"
    << "  p: " << fmt(c.flow.p) << "\n"
    << "  nominal_mach: " << fmt(c.flow.nominal_mach) << "\n";
  const auto& g = c.geometry;
  o << "geometry:\n"
    << "  a0: " << fmt(g.a0) << "\n"
    << "  len_isolator: " << fmt(g.len_isolator) << "\n"
    << "  len_combustor: " << fmt(g.len_combustor) << "\n"
    << "  len_expansion: " << fmt(g.len_expansion) << "\n"
    << "  theta_isolator: " << fmt(g.theta_isolator) << "\n"
    << "  theta_combustor: " << fmt(g.theta_combustor) << "\n"
    << "  theta_expansion: " << fmt(g.theta_expansion) << "\n";
  const auto& f = c.fuel;
  o << "fuel:\n"
    << "  phi: " << fmt(f.phi) << "\n"
    << "  cycle: " << fmt(f.cycle) << "\n"
    << "  burst: " << fmt(f.burst) << "\n"
    << "  f_stoch: " << fmt(f.f_stoch) << "\n"
    << "  h_prop: " << fmt(f.h_prop) << "\n";
  const auto& d = c.grid;
  o << "grid:\n"
    << "  cells: " << d.cells << "\n"
    << "  dt: " << fmt(d.dt) << "\n"
    << "  steps: " << d.steps << "\n"
    << "  ntilde: " << d.ntilde << "\n"
    << "  spin_up_time: " << fmt(d.spin_up_time) << "\n"
    << "  spin_up_tolerance: " << fmt(d.spin_up_tolerance) << "\n";
  o << "noise:\n"
    << "  sigma_u: " << fmt(c.noise.sigma_u) << "\n"
    << "  sigma_m: " << fmt(c.noise.sigma_m) << "\n"
    << "  epsilon: " << fmt(c.noise.epsilon) << "\n";
  o << "event:\n"
    << "  mach_threshold: " << fmt(c.event.mach_threshold) << "\n"
    << "  monitor_cell: " << c.event.monitor_cell << "\n";
  const auto& p = c.optimizer;
  o << "optimizer:\n"
    << "  form: " << to_string(p.form) << "\n"
    << "  sharpness: " << fmt(p.sharpness) << "\n"
    << "  polish: " << (p.polish ? "true" : "false") << "\n"
    << "  fd_step: " << fmt(p.fd_step) << "\n"
    << "  max_iterations: " << p.max_iterations << "\n"
    << "  objective_tolerance: " << fmt(p.objective_tolerance) << "\n"
    << "  residual_tolerance: " << fmt(p.residual_tolerance) << "\n"
    << "  stall_iterations: " << p.stall_iterations << "\n"
    << "  bracket_low: " << fmt(p.bracket_low) << "\n"
    << "  bracket_high: " << fmt(p.bracket_high) << "\n"
    << "  bisections: " << p.bisections << "\n";
  const auto& e = c.estimate;
  o << "estimate:\n  kinds: [";
  for (std::size_t i = 0; i < e.kinds.size(); ++i) o << (i ? ", " : "") << sampling::to_string(e.kinds[i]);
  o << "]\n  samples: " << e.samples << "\n"
    << "  stepping: " << to_string(e.stepping) << "\n  epsilons: [";
  for (std::size_t i = 0; i < e.epsilons.size(); ++i) o << (i ? ", " : "") << fmt(e.epsilons[i]);
  o << "]\n  center: " << quote(e.center) << "\n";
  const auto& s = c.simulate;
  o << "simulate:\n"
    << "  inflow: " << to_string(s.inflow) << "\n"
    << "  speed: " << fmt(s.speed) << "\n"
    << "  file: " << quote(s.file) << "\n"
    << "  stepping: " << to_string(s.stepping) << "\n"
    << "  record_every: " << s.record_every << "\n";
  return o.str();
}

std::string config_hash(const RunConfig& cfg) {
  // The output location does not change any number, so it is left out.
  RunConfig keyed = cfg;
  keyed.output_dir.clear();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_yaml(keyed)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void validate(const RunConfig& c) {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  try {
    make_gas(c);
    make_geometry(c);
    make_fuel(c);
    make_discretization(c);
    make_noise(c).validate();
    make_event(c).validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  check(c.flow.rho > 0 && c.flow.u > 0 && c.flow.p > 0, "flow: rho, u and p must be positive");
  check(c.flow.nominal_mach > 0, "flow.nominal_mach must be positive");
  check(c.grid.ntilde >= 1, "grid.ntilde must be at least 1");
  check(c.grid.steps % c.grid.ntilde == 0, "grid.steps must be a multiple of grid.ntilde");
  check(c.grid.spin_up_time > 0 && c.grid.spin_up_tolerance > 0, "grid: spin-up limits must be positive");
  check(c.event.monitor_cell >= 1 && c.event.monitor_cell < c.grid.cells,
        "event.monitor_cell must be an interior cell");
  const auto& o = c.optimizer;
  check(o.sharpness > 0 && o.fd_step > 0, "optimizer: sharpness and fd_step must be positive");
  check(o.bracket_low > 0 && o.bracket_low < o.bracket_high && o.bracket_high <= 1.0,
        "optimizer: need 0 < bracket_low < bracket_high <= 1");
  check(o.max_iterations >= 1 && o.stall_iterations >= 1, "optimizer: iteration counts must be positive");
  check(!c.estimate.kinds.empty(), "estimate.kinds must not be empty");
  check(c.estimate.samples >= 1, "estimate.samples must be at least 1");
  for (double e : c.estimate.epsilons) check(e > 0, "estimate.epsilons must be positive");
  check(c.simulate.speed >= 0, "simulate.speed must be nonnegative");
  check(c.simulate.record_every >= 1, "simulate.record_every must be at least 1");
  check(c.simulate.inflow != InflowKind::File || !c.simulate.file.empty(),
        "simulate.file is required for file inflow");
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names{"paper-defaults", "long-cycle", "steady-fueling",
                                 "table-5.1-short", "table-5.1-long"};
  for (const char* cyc : {"short", "long"})
    for (const char* thr : {"0.8", "1.0", "1.2"})
      names.push_back(std::string("table-5.2-") + cyc + "-" + thr);
  for (const char* cyc : {"short", "long"})
    for (const char* th : {"2.5", "7.5", "12"})
      names.push_back(std::string("table-5.4-") + cyc + "-theta-" + th);
  for (const char* cyc : {"short", "long"}) {
    names.push_back(std::string("table-5.5-") + cyc + "-N20");
    names.push_back(std::string("table-5.5-") + cyc + "-N40");
  }
  names.push_back("mc-vs-is-short");
  names.push_back("mc-vs-is-long");
  return names;
}

namespace {

void set_long_cycle(RunConfig& c) {
  c.fuel.cycle = 2e-3;
  c.fuel.burst = 0.4e-3;
}

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

}  // namespace

RunConfig preset(const std::string& name) {
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw ConfigError("unknown preset '" + name + "'");
  RunConfig c;
  if (name == "paper-defaults" || name == "table-5.1-short") return c;
  if (name == "long-cycle" || name == "table-5.1-long") {
    set_long_cycle(c);
    return c;
  }
  if (name == "steady-fueling") {
    c.fuel.phi = 0.3;
    c.fuel.cycle = 1e-3;
    c.fuel.burst = 1e-3;
    return c;
  }
  const bool is_long = name.find("-long") != std::string::npos;
  if (is_long) set_long_cycle(c);
  const std::string tail = name.substr(name.rfind('-') + 1);
  if (starts_with(name, "table-5.2-")) {
    c.event.mach_threshold = std::stod(tail);
  } else if (starts_with(name, "table-5.4-")) {
    c.geometry.theta_combustor = std::stod(tail);
  } else if (starts_with(name, "table-5.5-")) {
    c.grid.ntilde = tail == "N40" ? 40 : 20;
  } else if (starts_with(name, "mc-vs-is-")) {
    c.estimate.kinds = {sampling::Estimator::MC, sampling::Estimator::IS};
    c.estimate.epsilons = epsilon_sweep();
  }
  return c;
}

engine::GasModel make_gas(const RunConfig& c) { return engine::GasModel(c.flow.gamma); }

engine::FreeStream make_freestream(const RunConfig& c) {
  return engine::FreeStream{c.flow.rho, c.flow.u, c.flow.p};
}

engine::EngineGeometry make_geometry(const RunConfig& c) {
  const auto& g = c.geometry;
  return engine::EngineGeometry(g.a0, g.len_isolator, g.len_combustor, g.len_expansion,
                                g.theta_isolator, g.theta_combustor, g.theta_expansion);
}

engine::FuelSchedule make_fuel(const RunConfig& c) {
  const auto& f = c.fuel;
  return engine::FuelSchedule(f.phi, f.cycle, f.burst, f.f_stoch, f.h_prop, c.flow.rho, c.flow.u);
}

solver::Discretization make_discretization(const RunConfig& c) {
  return solver::Discretization(c.grid.cells, c.grid.dt, c.grid.steps);
}

ldp::PathGrid make_grid(const RunConfig& c) {
  return ldp::PathGrid{c.grid.ntilde, c.grid.steps / c.grid.ntilde, c.grid.dt};
}

ldp::NoiseModel make_noise(const RunConfig& c) {
  return ldp::NoiseModel{c.noise.sigma_u, c.noise.sigma_m, c.noise.epsilon};
}

ldp::EventSpec make_event(const RunConfig& c) {
  return ldp::EventSpec{c.event.mach_threshold, c.event.monitor_cell};
}

ldp::ActionOptions make_action_options(const RunConfig& c) {
  const auto& o = c.optimizer;
  ldp::ActionOptions a;
  a.form = o.form;
  a.softmin_sharpness = o.sharpness;
  a.polish = o.polish;
  a.fd_step_fraction = o.fd_step;
  a.max_iterations = o.max_iterations;
  a.objective_tolerance = o.objective_tolerance;
  a.residual_tolerance = o.residual_tolerance;
  a.stall_iterations = o.stall_iterations;
  a.bracket_low = o.bracket_low;
  a.bracket_high = o.bracket_high;
  a.bisection_iterations = o.bisections;
  return a;
}

solver::SpinUpOptions make_spin_up(const RunConfig& c) {
  return solver::SpinUpOptions{c.grid.spin_up_time, c.grid.spin_up_tolerance};
}

solver::FlowSolver make_solver(const RunConfig& c) {
  return solver::FlowSolver(make_gas(c), make_freestream(c), make_geometry(c), make_discretization(c));
}

ldp::Scenario make_scenario(const RunConfig& c) {
  auto s = make_solver(c);
  auto eq = solver::spin_up(s, c.flow.u, make_spin_up(c));
  return ldp::Scenario(std::move(s), make_fuel(c), make_grid(c), std::move(eq), c.flow.nominal_mach);
}

std::vector<double> epsilon_sweep() {
  std::vector<double> e;
  for (int i = 0; i <= 10; ++i) e.push_back((20 + 2 * i) / 100.0);
  return e;
}

}  // namespace unstart::app
