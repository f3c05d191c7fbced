#pragma once

// First-order finite-volume solver for the quasi-1D Euler equations with
// area and heat-release sources.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "engine.hpp"
#include "inflow.hpp"

namespace unstart::solver {

using engine::EngineGeometry;
using engine::FreeStream;
using engine::FuelSchedule;
using engine::GasModel;

/// Conserved triple (rho, rho*u, E) of one cell, or a flux triple.
struct State {
  double rho = 0.0;
  double mom = 0.0;
  double ener = 0.0;
};

/// P = (gamma - 1)(E - (rho u)^2 / (2 rho)). Throws InvalidStateError for rho <= 0.
double pressure(const State& w, const GasModel& gas);
/// True when both density and pressure are strictly positive and finite.
bool admissible(const State& w, const GasModel& gas);
double sound_speed(const State& w, const GasModel& gas);
/// M = u / sqrt(gamma P / rho). Throws InvalidStateError when P <= 0.
double mach(const State& w, const GasModel& gas);
/// Physical Euler flux (rho u, rho u^2 + P, (E + P) u).
State physical_flux(const State& w, const GasModel& gas);
/// Component-wise local Lax-Friedrichs numerical flux; the dissipation
/// coefficient is max(|c_L + u_L|, |c_R + u_R|).
State llf_flux(const State& left, const State& right, const GasModel& gas);

/// Uniform grid of K cells over the engine plus the uniform time grid.
struct Discretization {
  std::size_t cells = 100;
  double dt = 1e-6;
  std::size_t steps = 10000;

  Discretization() = default;
  Discretization(std::size_t cells, double dt, std::size_t steps);

  double horizon() const { return dt * static_cast<double>(steps); }
};

/// Cell averages for k = 0..K. Cell 0 is the prescribed inflow cell and cell K
/// the outflow extrapolation cell.
struct ConservedField {
  std::vector<double> rho, mom, ener;

  explicit ConservedField(std::size_t size = 0) : rho(size), mom(size), ener(size) {}
  std::size_t size() const { return rho.size(); }
  State at(std::size_t k) const { return {rho[k], mom[k], ener[k]}; }
  void set(std::size_t k, const State& w) {
    rho[k] = w.rho;
    mom[k] = w.mom;
    ener[k] = w.ener;
  }
  bool operator==(const ConservedField&) const = default;
};

enum class Stepping { Uniform, Adaptive };

struct RecordOptions {
  /// Cell whose Mach number is monitored (1 = next to the entrance).
  std::size_t monitor_cell = 1;
  /// Mach threshold used for the first-crossing time; unset disables it.
  std::optional<double> threshold;
  /// Stop integrating once the threshold has been crossed.
  bool stop_at_crossing = false;
  /// Stop integrating once the monitored Mach number falls to this value.
  std::optional<double> stop_below;
  bool mach_history = false;
  bool shock_history = false;
  bool thrust_history = false;
  /// Keep M_1 after every step (needed for smoothed constraints).
  bool monitor_series = false;
  /// Keep every accepted step size.
  bool step_sizes = false;
  /// Histories are sampled every this many steps.
  std::size_t every = 1;
};

struct MachSample {
  double t;
  double x;
  double mach;
};

struct TimeValue {
  double t;
  double value;
};

struct TrajectoryRecord {
  double min_m1 = 0.0;
  std::size_t min_step = 0;
  std::optional<double> unstart_time;
  /// True when the run ended early because of stop_at_crossing or stop_below.
  bool stopped_early = false;
  std::size_t steps = 0;
  double final_time = 0.0;
  std::vector<double> m1_series;
  std::vector<double> step_sizes;
  std::vector<MachSample> mach_history;
  std::vector<TimeValue> shock_history;
  std::vector<TimeValue> thrust_history;
};

/// Immutable solver set-up: gas, inflow, geometry and the grid, with the
/// per-cell geometric and fueling factors precomputed at the cell midpoints.
class FlowSolver {
 public:
  FlowSolver(GasModel gas, FreeStream inflow, EngineGeometry geometry, Discretization disc);

  const GasModel& gas() const { return gas_; }
  const FreeStream& inflow() const { return inflow_; }
  const EngineGeometry& geometry() const { return geom_; }
  const Discretization& discretization() const { return disc_; }
  std::size_t cells() const { return disc_.cells; }
  double dx() const { return dx_; }
  double midpoint(std::size_t k) const;
  /// Last cell whose midpoint lies in the isolator [-L_I, 0].
  std::size_t last_isolator_cell() const { return last_isolator_; }

  State inflow_state(double speed) const;
  /// Field equal to the inflow state (at speed u) in every cell.
  ConservedField uniform_field(double speed) const;

  /// One forward-Euler LLF update of size h from time t. Interior cells are
  /// advanced, cell 0 takes the inflow speed `u_next`, cell K copies cell K-1
  /// of the incoming field.
  ConservedField step(const ConservedField& field, double u_next, double h, double t,
                      const FuelSchedule* fuel) const;
  /// CFL step 0.8 dx / max_k |c_k + u_k|.
  double adaptive_dt(const ConservedField& field) const;

  std::vector<double> mach_field(const ConservedField& field) const;
  /// Supremum of isolator midpoints with M >= 1; 0 when the whole isolator is
  /// supersonic, -L_I when none of it is.
  double shock_location(std::span<const double> mach) const;
  double thrust(const ConservedField& field) const;

 private:
  friend class Integrator;

  GasModel gas_;
  FreeStream inflow_;
  EngineGeometry geom_;
  Discretization disc_;
  double dx_;
  std::size_t last_isolator_;
  std::vector<double> slope_ratio_;  // A'/A at midpoints
  std::vector<double> area_mid_;
  double area_in_, area_out_;
};

struct SpinUpOptions {
  double max_time = 0.1;
  double tolerance = 1e-10;
};

/// Largest relative change over all cells and components between two fields.
double relative_change(const ConservedField& a, const ConservedField& b);

/// Integrate with constant inflow and no fueling until the per-step relative
/// change falls below the tolerance. Starts from the uniform inflow state
/// unless `initial` is given.
ConservedField spin_up(const FlowSolver& solver, double u_const, const SpinUpOptions& opts = {},
                       const ConservedField* initial = nullptr);

/// Integrate over [0, T] from `initial` with the given inflow path.
TrajectoryRecord simulate(const FlowSolver& solver, const ConservedField& initial,
                          const ldp::InflowPath& inflow, const FuelSchedule& fuel,
                          Stepping stepping, const RecordOptions& record = {});

}  // namespace unstart::solver
