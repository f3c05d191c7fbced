#include "ldp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>

#include "errors.hpp"
#include "parallel.hpp"

namespace unstart::ldp {

using solver::RecordOptions;
using solver::Stepping;

void EventSpec::validate() const {
  if (!(mach_threshold > 0.0)) throw DomainError("Mach threshold must be positive");
  if (monitor_cell == 0) throw DomainError("monitor cell must be an interior cell");
}

void NoiseModel::validate() const {
  if (!(sigma_u > 0.0)) throw DomainError("sigma_u must be positive");
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
}

Scenario::Scenario(FlowSolver solver, FuelSchedule fuel, PathGrid grid, double nominal_mach)
    : solver_(std::move(solver)),
      fuel_(fuel),
      grid_(grid),
      equilibrium_(solver::spin_up(solver_, solver_.inflow().u)),
      nominal_mach_(nominal_mach) {}

Scenario::Scenario(FlowSolver solver, FuelSchedule fuel, PathGrid grid, ConservedField equilibrium,
                   double nominal_mach)
    : solver_(std::move(solver)),
      fuel_(fuel),
      grid_(grid),
      equilibrium_(std::move(equilibrium)),
      nominal_mach_(nominal_mach) {
  if (equilibrium_.size() != solver_.cells() + 1) throw ContractError("equilibrium size mismatch");
}

InflowPath Scenario::constant_path() const {
  return InflowPath::constant(u0(), grid_.ntilde, grid_.refinement, grid_.dt);
}

InflowPath Scenario::ramp(double terminal) const {
  return InflowPath::ramp(u0(), terminal, grid_.ntilde, grid_.refinement, grid_.dt);
}

Scenario Scenario::with_fuel(FuelSchedule fuel) const {
  return Scenario(solver_, fuel, grid_, equilibrium_, nominal_mach_);
}

Scenario Scenario::with_grid(PathGrid grid) const {
  return Scenario(solver_, fuel_, grid, equilibrium_, nominal_mach_);
}

solver::TrajectoryRecord Scenario::run(const InflowPath& path, Stepping stepping,
                                       const RecordOptions& record) const {
  return solver::simulate(solver_, equilibrium_, path, fuel_, stepping, record);
}

double rate_discrete(const InflowPath& path, double sigma_u) {
  const double h = path.coarse_spacing();
  double sum = 0.0;
  for (double d : path.increments()) sum += (d / h) * (d / h);
  return h / (2.0 * sigma_u * sigma_u) * sum;
}

SubsonicBound subsonic_bound(double sigma_u, double u0, double nominal_mach, double level,
                             const PathGrid& grid) {
  if (!(level > 0.0) || level >= nominal_mach)
    throw DomainError("Mach level must lie in (0, initial Mach); the event is otherwise certain");
  const double target = level * u0 / nominal_mach;
  auto path = InflowPath::ramp(u0, target, grid.ntilde, grid.refinement, grid.dt);
  const double value = (u0 - target) * (u0 - target) / (2.0 * sigma_u * sigma_u * grid.horizon());
  return {std::move(path), value, target};
}

bool is_unstart(const Scenario& scenario, const InflowPath& path, const EventSpec& spec) {
  RecordOptions rec;
  rec.monitor_cell = spec.monitor_cell;
  rec.threshold = spec.mach_threshold;
  rec.stop_at_crossing = true;
  return scenario.run(path, Stepping::Uniform, rec).unstart_time.has_value();
}

double asymptotic_probability(double value, double epsilon) {
  if (!(value >= 0.0)) throw DomainError("rate value must be nonnegative");
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  return std::exp(-value / (epsilon * epsilon));
}

namespace {

/// Runs that blow up, or fall this far below the threshold, are cut short and
/// reported at the clip level.
constexpr double kClip = 0.1;

/// The run stops early on deep unstart or numerical trouble; both are on the
/// unstart side of the constraint.
bool classify_unstart(const Scenario& scenario, const InflowPath& path, const EventSpec& spec) {
  try {
    return is_unstart(scenario, path, spec);
  } catch (const InstabilityError&) {
    return true;
  } catch (const InvalidStateError&) {
    return true;
  }
}

class ActionSolver {
 public:
  ActionSolver(const Scenario& scenario, const EventSpec& spec, const NoiseModel& noise,
               const ActionOptions& opts)
      : sc_(scenario), spec_(spec), noise_(noise), opts_(opts), u0_(scenario.u0()) {}

  std::size_t runs() const { return runs_; }

  /// Constraint value (<= 0 means the event occurs).
  double constraint(const std::vector<double>& v, ConstraintForm form) const {
    const InflowPath path = to_path(v);
    RecordOptions rec;
    rec.monitor_cell = spec_.monitor_cell;
    rec.monitor_series = form == ConstraintForm::SoftMin;
    rec.stop_below = spec_.mach_threshold - kClip;
    ++runs_;
    solver::TrajectoryRecord r;
    try {
      r = sc_.run(path, Stepping::Uniform, rec);
    } catch (const InstabilityError&) {
      return -kClip;
    } catch (const InvalidStateError&) {
      return -kClip;
    }
    if (form == ConstraintForm::Direct || r.m1_series.empty()) return r.min_m1 - spec_.mach_threshold;
    const double beta = opts_.softmin_sharpness;
    double acc = 0.0;
    for (double m : r.m1_series) acc += std::exp(-beta * (m - r.min_m1));
    return r.min_m1 - std::log(acc) / beta - spec_.mach_threshold;
  }

  std::vector<double> gradient(const std::vector<double>& v, double c, ConstraintForm form) const {
    const double h = opts_.fd_step_fraction * u0_;
    std::vector<double> g(v.size());
    parallel_for(v.size(), [&](std::size_t i) {
      std::vector<double> w = v;
      w[i] += h;
      g[i] = (constraint(w, form) - c) / h;
    });
    return g;
  }

  double objective(const std::vector<double>& v) const { return rate_discrete(to_path(v), noise_.sigma_u); }

  InflowPath to_path(const std::vector<double>& v) const {
    std::vector<double> c(v.size() + 1);
    c[0] = u0_;
    std::copy(v.begin(), v.end(), c.begin() + 1);
    return InflowPath(std::move(c), sc_.grid().refinement, sc_.grid().dt);
  }

  std::vector<double> radial(const std::vector<double>& v, double s) const {
    std::vector<double> w(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) w[i] = u0_ + s * (v[i] - u0_);
    return w;
  }

  struct Restored {
    std::vector<double> v;
    double c;
    bool ok;
  };

  /// Scale the deviation from the constant path until the constraint sits on
  /// the boundary, keeping the feasible side (c <= 0).
  Restored restore(const std::vector<double>& v, ConstraintForm form) const {
    double s_in = 1.0, c_in = constraint(v, form);
    double s_out = 1.0, c_out = c_in;
    if (c_in <= 0.0) {
      if (c_in >= -opts_.residual_tolerance) return {v, c_in, true};
      for (int k = 0; k < 40 && c_out <= 0.0; ++k) {
        s_in = s_out;
        c_in = c_out;
        s_out *= 0.9;
        c_out = constraint(radial(v, s_out), form);
      }
      if (c_out <= 0.0) return {radial(v, s_in), c_in, true};
    } else {
      for (int k = 0; k < 40 && c_in > 0.0; ++k) {
        s_out = s_in;
        c_out = c_in;
        s_in *= 1.1;
        c_in = constraint(radial(v, s_in), form);
      }
      if (c_in > 0.0) return {v, c_in, false};
    }
    // Illinois false position on the bracket [s_out, s_in].
    int side = 0;
    for (int k = 0; k < 60; ++k) {
      if (c_in >= -opts_.residual_tolerance) break;
      if (std::abs(s_in - s_out) <= 1e-12 * std::abs(s_in)) break;
      double s = (s_out * c_in - s_in * c_out) / (c_in - c_out);
      if (!(s > std::min(s_in, s_out) && s < std::max(s_in, s_out))) s = 0.5 * (s_in + s_out);
      const double c = constraint(radial(v, s), form);
      if (c <= 0.0) {
        s_in = s;
        c_in = c;
        if (side == -1) c_out *= 0.5;
        side = -1;
      } else {
        s_out = s;
        c_out = c;
        if (side == 1) c_in *= 0.5;
        side = 1;
      }
    }
    return {radial(v, s_in), constraint(radial(v, s_in), form), true};
  }

  /// (L^-1 a)_i = sum_j min(i, j) a_j, the inverse Hessian of the rate
  /// function up to a constant factor.
  static std::vector<double> inverse_hessian_times(const std::vector<double>& a) {
    const std::size_t n = a.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += static_cast<double>(std::min(i, j) + 1) * a[j];
      out[i] = acc;
    }
    return out;
  }

  /// Sequential quadratic programming on the boundary of the event: the
  /// quadratic model of the rate function is minimized exactly under the
  /// linearized constraint, and each trial point is pulled back onto the
  /// boundary along the ray from the constant path.
  void solve(std::vector<double>& v, double& c, ConstraintForm form, ActionResult& out) {
    double value = objective(v);
    std::size_t stalled = 0;
    for (std::size_t it = 0; it < opts_.max_iterations; ++it) {
      const auto a = gradient(v, c, form);
      const auto ha = inverse_hessian_times(a);
      const double curv = std::inner_product(a.begin(), a.end(), ha.begin(), 0.0);
      double lin = c;
      for (std::size_t i = 0; i < v.size(); ++i) lin += a[i] * (u0_ - v[i]);
      if (!(curv > 0.0) || !(lin > 0.0)) {
        out.status = "stagnated: constraint gradient gives no descent direction";
        return;
      }
      const double lambda = lin / curv;
      std::vector<double> target(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) target[i] = u0_ - lambda * ha[i];

      bool accepted = false;
      double step = 1.0;
      for (; step >= 1.0 / 64.0; step *= 0.5) {
        std::vector<double> trial(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) trial[i] = v[i] + step * (target[i] - v[i]);
        auto r = restore(trial, form);
        if (!r.ok) continue;
        const double tv = objective(r.v);
        if (tv < value) {
          const double rel = (value - tv) / value;
          v = std::move(r.v);
          c = r.c;
          value = tv;
          accepted = true;
          stalled = rel < opts_.objective_tolerance ? stalled + 1 : 0;
          break;
        }
      }
      ++out.iterations;
      out.trace.push_back({out.iterations, value, c, accepted ? step : 0.0, form});
      if (!accepted) {
        out.converged = c <= opts_.residual_tolerance;
        out.status = "converged: no further decrease along the projected direction";
        return;
      }
      if (stalled >= opts_.stall_iterations && c <= opts_.residual_tolerance) {
        out.converged = true;
        out.status = "converged: objective change below tolerance";
        return;
      }
    }
    out.status = "stopped: iteration limit reached";
  }

 private:
  const Scenario& sc_;
  const EventSpec& spec_;
  const NoiseModel& noise_;
  const ActionOptions& opts_;
  double u0_;
  mutable std::atomic<std::size_t> runs_{0};
};

}  // namespace

InflowPath initial_ramp(const Scenario& scenario, const EventSpec& spec, const ActionOptions& opts) {
  const double u0 = scenario.u0();
  double lo = opts.bracket_low * u0;   // triggers the event
  double hi = opts.bracket_high * u0;  // does not
  if (!classify_unstart(scenario, scenario.ramp(lo), spec))
    throw InfeasibleError("no ramp in the search bracket triggers the event");
  if (classify_unstart(scenario, scenario.ramp(hi), spec)) return scenario.ramp(hi);
  for (std::size_t k = 0; k < opts.bisection_iterations; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (classify_unstart(scenario, scenario.ramp(mid), spec)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return scenario.ramp(lo);
}

ActionResult minimize_action(const Scenario& scenario, const EventSpec& spec,
                             const NoiseModel& noise, const std::optional<InflowPath>& init,
                             const ActionOptions& opts) {
  spec.validate();
  noise.validate();
  const InflowPath start = init ? *init : initial_ramp(scenario, spec, opts);
  const PathGrid& grid = scenario.grid();
  if (start.ntilde() != grid.ntilde || start.refinement() != grid.refinement || start.dt() != grid.dt)
    throw ContractError("initial path does not match the scenario grid");
  if (start.start() != scenario.u0()) throw ContractError("initial path must start at u0");

  ActionSolver solver(scenario, spec, noise, opts);
  ActionResult out{.minimizer = start, .value = 0.0, .iterations = 0, .feasible = false,
                   .residual = 0.0, .converged = false, .status = {}, .pde_runs = 0, .trace = {}};
  std::vector<double> v(start.coarse().begin() + 1, start.coarse().end());

  std::vector<ConstraintForm> phases{opts.form};
  if (opts.form == ConstraintForm::SoftMin && opts.polish) phases.push_back(ConstraintForm::Direct);
  for (ConstraintForm form : phases) {
    auto r = solver.restore(v, form);
    if (!r.ok) throw InfeasibleError("could not move the initial path onto the event boundary");
    v = std::move(r.v);
    double c = r.c;
    solver.solve(v, c, form, out);
  }
  // The final boundary point is certified with the direct constraint.
  auto r = solver.restore(v, ConstraintForm::Direct);
  if (r.ok) v = std::move(r.v);
  out.minimizer = solver.to_path(v);
  out.value = rate_discrete(out.minimizer, noise.sigma_u);
  out.residual = solver.constraint(v, ConstraintForm::Direct);
  try {
    out.feasible = out.residual <= 0.0 && is_unstart(scenario, out.minimizer, spec);
  } catch (const Error&) {
    out.feasible = false;
  }
  out.pde_runs = solver.runs();
  return out;
}

}  // namespace unstart::ldp
