#include "solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "errors.hpp"

namespace unstart::solver {

namespace {

constexpr double kCfl = 0.8;

[[noreturn]] void throw_invalid(std::ptrdiff_t cell, double t, const char* what) {
  throw InvalidStateError(std::string(what) + " in cell " + std::to_string(cell) + " at t = " +
                              std::to_string(t),
                          cell, t);
}

}  // namespace

double pressure(const State& w, const GasModel& gas) {
  if (!(w.rho > 0.0)) throw InvalidStateError("nonpositive density", -1, 0.0);
  return (gas.gamma - 1.0) * (w.ener - 0.5 * w.mom * w.mom / w.rho);
}

bool admissible(const State& w, const GasModel& gas) {
  if (!(w.rho > 0.0) || !std::isfinite(w.rho) || !std::isfinite(w.mom) || !std::isfinite(w.ener))
    return false;
  return pressure(w, gas) > 0.0;
}

double sound_speed(const State& w, const GasModel& gas) {
  const double p = pressure(w, gas);
  if (!(p > 0.0)) throw InvalidStateError("nonpositive pressure", -1, 0.0);
  return std::sqrt(gas.gamma * p / w.rho);
}

double mach(const State& w, const GasModel& gas) { return (w.mom / w.rho) / sound_speed(w, gas); }

State physical_flux(const State& w, const GasModel& gas) {
  const double p = pressure(w, gas);
  const double u = w.mom / w.rho;
  return {w.mom, w.mom * u + p, (w.ener + p) * u};
}

State llf_flux(const State& left, const State& right, const GasModel& gas) {
  const State fl = physical_flux(left, gas);
  const State fr = physical_flux(right, gas);
  const double sl = std::abs(sound_speed(left, gas) + left.mom / left.rho);
  const double sr = std::abs(sound_speed(right, gas) + right.mom / right.rho);
  const double alpha = std::max(sl, sr);
  return {0.5 * (fl.rho + fr.rho) - 0.5 * alpha * (right.rho - left.rho),
          0.5 * (fl.mom + fr.mom) - 0.5 * alpha * (right.mom - left.mom),
          0.5 * (fl.ener + fr.ener) - 0.5 * alpha * (right.ener - left.ener)};
}

Discretization::Discretization(std::size_t k, double h, std::size_t n) : cells(k), dt(h), steps(n) {
  if (cells < 3) throw DomainError("need at least 3 cells");
  if (!(dt > 0.0)) throw DomainError("time increment must be positive");
  if (steps == 0) throw DomainError("need at least one time step");
}

FlowSolver::FlowSolver(GasModel gas, FreeStream inflow, EngineGeometry geometry, Discretization disc)
    : gas_(gas), inflow_(inflow), geom_(geometry), disc_(disc) {
  if (disc_.cells < 3) throw DomainError("need at least 3 cells");
  if (!(inflow_.rho > 0.0 && inflow_.p > 0.0)) throw DomainError("inflow density and pressure must be positive");
  dx_ = geom_.total_length() / static_cast<double>(disc_.cells);
  slope_ratio_.resize(disc_.cells);
  area_mid_.resize(disc_.cells);
  last_isolator_ = 0;
  for (std::size_t k = 0; k < disc_.cells; ++k) {
    const double x = midpoint(k);
    area_mid_[k] = geom_.area(x);
    slope_ratio_[k] = geom_.area_slope(x) / area_mid_[k];
    if (x <= 0.0) last_isolator_ = k;
  }
  area_in_ = geom_.area(geom_.x_min());
  area_out_ = geom_.area(geom_.x_max());
}

double FlowSolver::midpoint(std::size_t k) const {
  return geom_.x_min() + (static_cast<double>(k) + 0.5) * dx_;
}

State FlowSolver::inflow_state(double speed) const {
  return {inflow_.rho, inflow_.rho * speed, inflow_.energy_at(gas_, speed)};
}

ConservedField FlowSolver::uniform_field(double speed) const {
  ConservedField f(disc_.cells + 1);
  const State w = inflow_state(speed);
  for (std::size_t k = 0; k < f.size(); ++k) f.set(k, w);
  return f;
}

/// Scratch buffers for repeated steps on one field.
class Integrator {
 public:
  Integrator(const FlowSolver& s, const FuelSchedule* fuel, const ConservedField& initial)
      : s_(s), cur_(initial), next_(initial.size()) {
    const std::size_t n = initial.size();
    if (n != s.cells() + 1) throw ContractError("field size does not match the grid");
    p_.resize(n);
    speed_.resize(n);
    f0_.resize(n);
    f1_.resize(n);
    f2_.resize(n);
    g0_.resize(n - 1);
    g1_.resize(n - 1);
    g2_.resize(n - 1);
    heat_.assign(s.cells(), 0.0);
    if (fuel != nullptr) {
      for (std::size_t k = 0; k < s.cells(); ++k) heat_[k] = fuel->spatial_profile(s.geom_, s.midpoint(k));
    }
  }

  const ConservedField& field() const { return cur_; }

  /// Primitive quantities and fluxes of the current field; returns max |c + u|.
  double prepare(double t) {
    const double gm1 = s_.gas_.gamma - 1.0;
    const double gamma = s_.gas_.gamma;
    double smax = 0.0;
    for (std::size_t k = 0; k < cur_.size(); ++k) {
      const double rho = cur_.rho[k];
      const double mom = cur_.mom[k];
      const double e = cur_.ener[k];
      if (!(rho > 0.0)) throw_invalid(static_cast<std::ptrdiff_t>(k), t, "nonpositive density");
      const double u = mom / rho;
      const double p = gm1 * (e - 0.5 * mom * u);
      if (!(p > 0.0)) throw_invalid(static_cast<std::ptrdiff_t>(k), t, "nonpositive pressure");
      const double c = std::sqrt(gamma * p / rho);
      p_[k] = p;
      speed_[k] = std::abs(c + u);
      smax = std::max(smax, speed_[k]);
      f0_[k] = mom;
      f1_[k] = mom * u + p;
      f2_[k] = (e + p) * u;
    }
    return smax;
  }

  /// Advance with step h from time t; `prepare` must have been called.
  void advance(double h, double t, double u_next, bool fueling) {
    const std::size_t n = cur_.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double a = 0.5 * std::max(speed_[i], speed_[i + 1]);
      g0_[i] = 0.5 * (f0_[i] + f0_[i + 1]) - a * (cur_.rho[i + 1] - cur_.rho[i]);
      g1_[i] = 0.5 * (f1_[i] + f1_[i + 1]) - a * (cur_.mom[i + 1] - cur_.mom[i]);
      g2_[i] = 0.5 * (f2_[i] + f2_[i + 1]) - a * (cur_.ener[i + 1] - cur_.ener[i]);
    }
    const double r = h / s_.dx_;
    const double gm1 = s_.gas_.gamma - 1.0;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      const double src = h * s_.slope_ratio_[k];
      const double rho = cur_.rho[k] - r * (g0_[k] - g0_[k - 1]) - src * f0_[k];
      const double mom = cur_.mom[k] - r * (g1_[k] - g1_[k - 1]) + src * (p_[k] - f1_[k]);
      double e = cur_.ener[k] - r * (g2_[k] - g2_[k - 1]) - src * f2_[k];
      if (fueling) e += h * heat_[k];
      if (!(rho > 0.0)) throw_invalid(static_cast<std::ptrdiff_t>(k), t + h, "nonpositive density");
      if (!(gm1 * (e - 0.5 * mom * mom / rho) > 0.0))
        throw_invalid(static_cast<std::ptrdiff_t>(k), t + h, "nonpositive pressure");
      next_.rho[k] = rho;
      next_.mom[k] = mom;
      next_.ener[k] = e;
    }
    next_.set(0, s_.inflow_state(u_next));
    next_.set(n - 1, cur_.at(n - 2));
    std::swap(cur_, next_);
  }

  double monitor_mach(std::size_t k) const {
    const double rho = cur_.rho[k];
    const double u = cur_.mom[k] / rho;
    const double p = (s_.gas_.gamma - 1.0) * (cur_.ener[k] - 0.5 * cur_.mom[k] * u);
    return u / std::sqrt(s_.gas_.gamma * p / rho);
  }

 private:
  const FlowSolver& s_;
  ConservedField cur_, next_;
  std::vector<double> p_, speed_, f0_, f1_, f2_, g0_, g1_, g2_, heat_;
};

ConservedField FlowSolver::step(const ConservedField& field, double u_next, double h, double t,
                                const FuelSchedule* fuel) const {
  Integrator it(*this, fuel, field);
  it.prepare(t);
  it.advance(h, t, u_next, fuel != nullptr && fuel->fueling(t));
  return it.field();
}

double FlowSolver::adaptive_dt(const ConservedField& field) const {
  double smax = 0.0;
  // Same arithmetic as Integrator::prepare, so both give bit-identical steps.
  const double gm1 = gas_.gamma - 1.0;
  for (std::size_t k = 0; k < field.size(); ++k) {
    const double rho = field.rho[k];
    const double mom = field.mom[k];
    if (!(rho > 0.0)) throw_invalid(static_cast<std::ptrdiff_t>(k), 0.0, "nonpositive density");
    const double u = mom / rho;
    const double p = gm1 * (field.ener[k] - 0.5 * mom * u);
    if (!(p > 0.0)) throw_invalid(static_cast<std::ptrdiff_t>(k), 0.0, "nonpositive pressure");
    smax = std::max(smax, std::abs(std::sqrt(gas_.gamma * p / rho) + u));
  }
  return kCfl * dx_ / smax;
}

std::vector<double> FlowSolver::mach_field(const ConservedField& field) const {
  std::vector<double> m(field.size());
  for (std::size_t k = 0; k < field.size(); ++k) m[k] = mach(field.at(k), gas_);
  return m;
}

double FlowSolver::shock_location(std::span<const double> mach) const {
  const std::size_t last = std::min(last_isolator_, mach.size() - 1);
  for (std::size_t k = last + 1; k-- > 0;) {
    if (mach[k] >= 1.0) return k == last ? 0.0 : midpoint(k);
  }
  return geom_.x_min();
}

double FlowSolver::thrust(const ConservedField& field) const {
  const State wi = field.at(0);
  const State we = field.at(field.size() - 1);
  const double pi = pressure(wi, gas_);
  const double pe = pressure(we, gas_);
  return area_out_ * we.mom * we.mom / we.rho - area_in_ * wi.mom * wi.mom / wi.rho +
         (pe - pi) * area_out_;
}

double relative_change(const ConservedField& a, const ConservedField& b) {
  double worst = 0.0;
  auto scan = [&worst](const std::vector<double>& x, const std::vector<double>& y) {
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double d = std::abs(x[k] - y[k]);
      if (d == 0.0) continue;
      const double scale = std::max(std::abs(x[k]), std::abs(y[k]));
      worst = std::max(worst, d / scale);
    }
  };
  scan(a.rho, b.rho);
  scan(a.mom, b.mom);
  scan(a.ener, b.ener);
  return worst;
}

ConservedField spin_up(const FlowSolver& solver, double u_const, const SpinUpOptions& opts,
                       const ConservedField* initial) {
  Integrator it(solver, nullptr, initial != nullptr ? *initial : solver.uniform_field(u_const));
  double t = 0.0;
  ConservedField previous = it.field();
  while (t < opts.max_time) {
    const double h = kCfl * solver.dx() / it.prepare(t);
    it.advance(h, t, u_const, false);
    t += h;
    const double change = relative_change(previous, it.field());
    if (change < opts.tolerance) return it.field();
    previous = it.field();
  }
  throw SpinUpError("flow did not reach equilibrium within " + std::to_string(opts.max_time) +
                    " s of model time");
}

namespace {

class Recorder {
 public:
  Recorder(const FlowSolver& s, const RecordOptions& opts, TrajectoryRecord& rec)
      : s_(s), opts_(opts), rec_(rec) {}

  bool wants_field() const {
    return opts_.mach_history || opts_.shock_history || opts_.thrust_history;
  }

  void sample(std::size_t n, double t, const ConservedField& field) {
    if (!wants_field() || n % std::max<std::size_t>(opts_.every, 1) != 0) return;
    const auto m = s_.mach_field(field);
    if (opts_.mach_history) {
      for (std::size_t k = 0; k < s_.cells(); ++k) rec_.mach_history.push_back({t, s_.midpoint(k), m[k]});
    }
    if (opts_.shock_history) rec_.shock_history.push_back({t, s_.shock_location(m)});
    if (opts_.thrust_history) rec_.thrust_history.push_back({t, s_.thrust(field)});
  }

 private:
  const FlowSolver& s_;
  const RecordOptions& opts_;
  TrajectoryRecord& rec_;
};

}  // namespace

TrajectoryRecord simulate(const FlowSolver& solver, const ConservedField& initial,
                          const ldp::InflowPath& inflow, const FuelSchedule& fuel,
                          Stepping stepping, const RecordOptions& record) {
  TrajectoryRecord rec;
  rec.min_m1 = std::numeric_limits<double>::infinity();
  Recorder recorder(solver, record, rec);
  Integrator it(solver, &fuel, initial);
  if (record.monitor_cell >= initial.size()) throw ContractError("monitor cell outside the grid");
  recorder.sample(0, 0.0, it.field());

  const double horizon = inflow.horizon();
  const double dx = solver.dx();
  std::size_t n = 0;
  double t = 0.0;

  auto after_step = [&](double t_new, double h) {
    ++n;
    const double m1 = it.monitor_mach(record.monitor_cell);
    if (m1 < rec.min_m1) {
      rec.min_m1 = m1;
      rec.min_step = n;
    }
    if (record.monitor_series) rec.m1_series.push_back(m1);
    if (record.step_sizes) rec.step_sizes.push_back(h);
    recorder.sample(n, t_new, it.field());
    if (record.threshold && !rec.unstart_time && m1 <= *record.threshold) {
      rec.unstart_time = t_new;
      if (record.stop_at_crossing) {
        rec.stopped_early = true;
        return false;
      }
    }
    if (record.stop_below && m1 <= *record.stop_below) {
      rec.stopped_early = true;
      return false;
    }
    return true;
  };

  if (stepping == Stepping::Uniform) {
    const double h = inflow.dt();
    const std::size_t steps = inflow.fine_steps();
    for (std::size_t i = 0; i < steps; ++i) {
      t = static_cast<double>(i) * h;
      const double smax = it.prepare(t);
      if (h * smax / dx > 1.0)
        throw InstabilityError("uniform time step violates the CFL bound (CFL = " +
                               std::to_string(h * smax / dx) + ") at t = " + std::to_string(t));
      it.advance(h, t, inflow.at_index(i + 1), fuel.fueling(t));
      if (!after_step(static_cast<double>(i + 1) * h, h)) break;
    }
  } else {
    // The last step is clipped so the run ends exactly at the horizon.
    while (t < horizon) {
      double h = kCfl * dx / it.prepare(t);
      const bool last = t + h >= horizon;
      if (last) h = horizon - t;
      const double t_new = last ? horizon : t + h;
      it.advance(h, t, inflow.at_time(t_new), fuel.fueling(t));
      t = t_new;
      if (!after_step(t, h)) break;
    }
  }
  rec.steps = n;
  rec.final_time = stepping == Stepping::Uniform ? static_cast<double>(n) * inflow.dt() : t;
  return rec;
}

}  // namespace unstart::solver
