#pragma once

// Run configuration: a YAML document with a fixed schema, presets, and
// conversion to the core model objects.

#include <cstdint>
#include <string>
#include <vector>

#include "ldp.hpp"
#include "sampling.hpp"
#include "solver.hpp"

namespace unstart::app {

enum class InflowKind { Constant, File, Sampled };

struct GeometryConfig {
  double a0 = 0.008;
  double len_isolator = 0.5;
  double len_combustor = 0.1;
  double len_expansion = 0.1;
  double theta_isolator = 0.0;
  double theta_combustor = 7.5;
  double theta_expansion = 15.0;
  bool operator==(const GeometryConfig&) const = default;
};

struct FuelConfig {
  double phi = 0.78;
  double cycle = 0.5e-3;
  double burst = 0.1e-3;
  double f_stoch = 0.029;
  double h_prop = 1.2e8;
  bool operator==(const FuelConfig&) const = default;
};

struct FlowConfig {
  double gamma = 1.4;
  double rho = 0.159;
  double u = 1300.0;
  double p = 47842.0;
  double nominal_mach = 2.0;
  bool operator==(const FlowConfig&) const = default;
};

struct GridConfig {
  std::size_t cells = 100;
  double dt = 1e-6;
  std::size_t steps = 10000;
  std::size_t ntilde = 20;
  double spin_up_time = 0.1;
  double spin_up_tolerance = 1e-10;
  bool operator==(const GridConfig&) const = default;
};

struct NoiseConfig {
  double sigma_u = 1e4;
  double sigma_m = 96.902;
  double epsilon = 0.2;
  bool operator==(const NoiseConfig&) const = default;
};

struct EventConfig {
  double mach_threshold = 1.0;
  std::size_t monitor_cell = 1;
  bool operator==(const EventConfig&) const = default;
};

struct OptimizerConfig {
  ldp::ConstraintForm form = ldp::ConstraintForm::SoftMin;
  double sharpness = 200.0;
  bool polish = true;
  double fd_step = 1e-3;
  std::size_t max_iterations = 60;
  double objective_tolerance = 1e-6;
  double residual_tolerance = 1e-6;
  std::size_t stall_iterations = 3;
  double bracket_low = 0.3;
  double bracket_high = 1.0;
  std::size_t bisections = 40;
  bool operator==(const OptimizerConfig&) const = default;
};

struct EstimateConfig {
  std::vector<sampling::Estimator> kinds{sampling::Estimator::MC};
  std::size_t samples = 10000;
  solver::Stepping stepping = solver::Stepping::Adaptive;
  /// Empty means the single noise epsilon.
  std::vector<double> epsilons;
  /// Action JSON holding the IS center; computed when empty.
  std::string center;
  bool operator==(const EstimateConfig&) const = default;
};

struct SimulateConfig {
  InflowKind inflow = InflowKind::Constant;
  /// Constant inflow speed; 0 means the free-stream speed.
  double speed = 0.0;
  /// Two-column (t, u) CSV for InflowKind::File.
  std::string file;
  solver::Stepping stepping = solver::Stepping::Uniform;
  std::size_t record_every = 10;
  bool operator==(const SimulateConfig&) const = default;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  FlowConfig flow;
  GeometryConfig geometry;
  FuelConfig fuel;
  GridConfig grid;
  NoiseConfig noise;
  EventConfig event;
  OptimizerConfig optimizer;
  EstimateConfig estimate;
  SimulateConfig simulate;
  bool operator==(const RunConfig&) const = default;
};

/// Parses a YAML document over `base`. Keys not present keep their base
/// value; a top-level `preset` key selects the base instead. Unknown keys and
/// bad values throw ConfigError carrying the line number.
RunConfig parse_config(const std::string& text, const RunConfig& base = {});
RunConfig load_config(const std::string& path, const RunConfig& base = {});

/// Sets one dotted key (e.g. "fuel.phi") from its YAML text.
RunConfig with_override(const RunConfig& cfg, const std::string& key, const std::string& value);

/// Canonical YAML with every key written out.
std::string to_yaml(const RunConfig& cfg);

/// 16 hex digits of FNV-1a over the canonical YAML, output_dir excluded.
std::string config_hash(const RunConfig& cfg);

/// Throws ConfigError when any model invariant is violated.
void validate(const RunConfig& cfg);

std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name.
RunConfig preset(const std::string& name);

std::string to_string(InflowKind k);
std::string to_string(solver::Stepping s);
std::string to_string(ldp::ConstraintForm f);
solver::Stepping stepping_from_string(const std::string& s);

engine::GasModel make_gas(const RunConfig& cfg);
engine::FreeStream make_freestream(const RunConfig& cfg);
engine::EngineGeometry make_geometry(const RunConfig& cfg);
engine::FuelSchedule make_fuel(const RunConfig& cfg);
solver::Discretization make_discretization(const RunConfig& cfg);
ldp::PathGrid make_grid(const RunConfig& cfg);
ldp::NoiseModel make_noise(const RunConfig& cfg);
ldp::EventSpec make_event(const RunConfig& cfg);
ldp::ActionOptions make_action_options(const RunConfig& cfg);
solver::SpinUpOptions make_spin_up(const RunConfig& cfg);
solver::FlowSolver make_solver(const RunConfig& cfg);
/// Spins up the equilibrium; this is the expensive part.
ldp::Scenario make_scenario(const RunConfig& cfg);

/// Eleven epsilons 0.2, 0.22, ..., 0.4.
std::vector<double> epsilon_sweep();

}  // namespace unstart::app
