#pragma once

// Discrete rate function over reduced-order inflow paths, the unstart event,
// and the constrained minimum-action search.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "inflow.hpp"
#include "solver.hpp"

namespace unstart::ldp {

using engine::FuelSchedule;
using solver::ConservedField;
using solver::FlowSolver;

/// Coarse control grid: Ntilde intervals of m fine steps of size dt.
struct PathGrid {
  std::size_t ntilde = 20;
  std::size_t refinement = 500;
  double dt = 1e-6;

  std::size_t fine_steps() const { return ntilde * refinement; }
  double horizon() const { return static_cast<double>(fine_steps()) * dt; }
};

/// Unstart event: min over steps of the monitor-cell Mach number <= threshold.
struct EventSpec {
  double mach_threshold = 1.0;
  std::size_t monitor_cell = 1;

  void validate() const;
};

struct NoiseModel {
  double sigma_u = 1e4;   // m/s^{3/2}
  double sigma_m = 96.9020;  // informational only
  double epsilon = 0.2;

  void validate() const;
};

/// Everything a controlled run needs: the solver set-up, its spin-up
/// equilibrium, the fueling schedule and the control grid.
class Scenario {
 public:
  /// `nominal_mach` is the inflow Mach number used to convert Mach levels into
  /// inflow speeds (level speed = level * u0 / nominal_mach).
  Scenario(FlowSolver solver, FuelSchedule fuel, PathGrid grid, double nominal_mach = 2.0);
  Scenario(FlowSolver solver, FuelSchedule fuel, PathGrid grid, ConservedField equilibrium,
           double nominal_mach = 2.0);

  const FlowSolver& solver() const { return solver_; }
  const FuelSchedule& fuel() const { return fuel_; }
  const PathGrid& grid() const { return grid_; }
  const ConservedField& equilibrium() const { return equilibrium_; }
  double u0() const { return solver_.inflow().u; }
  double nominal_mach() const { return nominal_mach_; }
  double level_speed(double mach_level) const { return mach_level * u0() / nominal_mach_; }

  InflowPath constant_path() const;
  InflowPath ramp(double terminal) const;
  Scenario with_fuel(FuelSchedule fuel) const;
  Scenario with_grid(PathGrid grid) const;

  solver::TrajectoryRecord run(const InflowPath& path, solver::Stepping stepping,
                               const solver::RecordOptions& record = {}) const;

 private:
  FlowSolver solver_;
  FuelSchedule fuel_;
  PathGrid grid_;
  ConservedField equilibrium_;
  double nominal_mach_;
};

/// (m dt / 2 sigma^2) * sum_n ((u((n+1)m) - u(nm)) / (m dt))^2.
double rate_discrete(const InflowPath& path, double sigma_u);

struct SubsonicBound {
  InflowPath path;
  double value;
  double target_speed;
};

/// Straight line from u0 to the speed of Mach `level`, and its action
/// (u0 - u_level)^2 / (2 sigma^2 T). Throws DomainError when level is at or
/// above the initial Mach number.
SubsonicBound subsonic_bound(double sigma_u, double u0, double nominal_mach, double level,
                             const PathGrid& grid);

/// Uniform-step run; true when the monitor-cell Mach number reaches the
/// threshold. Stops at the crossing.
bool is_unstart(const Scenario& scenario, const InflowPath& path, const EventSpec& spec);

/// exp(-value / epsilon^2): log-asymptotic, prefactor-free.
double asymptotic_probability(double value, double epsilon);

enum class ConstraintForm { Direct, SoftMin };

struct ActionOptions {
  ConstraintForm form = ConstraintForm::SoftMin;
  double softmin_sharpness = 200.0;
  /// Finish a soft-min solve with the direct constraint.
  bool polish = true;
  /// Forward-difference step as a fraction of u0.
  double fd_step_fraction = 1e-3;
  std::size_t max_iterations = 60;
  double objective_tolerance = 1e-6;
  double residual_tolerance = 1e-6;
  std::size_t stall_iterations = 3;
  double bracket_low = 0.3;
  double bracket_high = 1.0;
  std::size_t bisection_iterations = 40;
};

struct IterationTrace {
  std::size_t iteration;
  double value;
  double residual;
  double step;
  ConstraintForm form;
};

struct ActionResult {
  InflowPath minimizer;
  double value = 0.0;
  std::size_t iterations = 0;
  bool feasible = false;
  /// Direct constraint min_n M_1^n - threshold at the minimizer.
  double residual = 0.0;
  bool converged = false;
  std::string status;
  std::size_t pde_runs = 0;
  std::vector<IterationTrace> trace;
};

/// Largest ramp terminal speed (least severe) in the bracket that triggers
/// the event. Throws InfeasibleError if even the bottom of the bracket does
/// not.
InflowPath initial_ramp(const Scenario& scenario, const EventSpec& spec, const ActionOptions& opts);

/// Minimize rate_discrete over paths in the unstart set. Starts from `init`
/// when given, otherwise from initial_ramp.
ActionResult minimize_action(const Scenario& scenario, const EventSpec& spec,
                             const NoiseModel& noise, const std::optional<InflowPath>& init = {},
                             const ActionOptions& opts = {});

}  // namespace unstart::ldp
