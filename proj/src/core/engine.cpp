#include "engine.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "errors.hpp"

namespace unstart::engine {

namespace {

double sin_deg(double deg) { return std::sin(deg * std::numbers::pi / 180.0); }

}  // namespace

GasModel::GasModel(double g) : gamma(g) {
  if (!(g > 1.0)) throw DomainError("gamma must exceed 1, got " + std::to_string(g));
}

double FreeStream::sound_speed(const GasModel& gas) const { return std::sqrt(gas.gamma * p / rho); }

double FreeStream::mach(const GasModel& gas) const { return u / sound_speed(gas); }

double FreeStream::energy_at(const GasModel& gas, double speed) const {
  return p / (gas.gamma - 1.0) + 0.5 * rho * speed * speed;
}

EngineGeometry::EngineGeometry(double a0, double len_isolator, double len_combustor,
                               double len_expansion, double theta_isolator_deg,
                               double theta_combustor_deg, double theta_expansion_deg)
    : a0_(a0),
      len_i_(len_isolator),
      len_c_(len_combustor),
      len_e_(len_expansion),
      deg_i_(theta_isolator_deg),
      deg_c_(theta_combustor_deg),
      deg_e_(theta_expansion_deg),
      sin_i_(sin_deg(theta_isolator_deg)),
      sin_c_(sin_deg(theta_combustor_deg)),
      sin_e_(sin_deg(theta_expansion_deg)) {
  if (!(a0 > 0.0)) throw DomainError("minimum area must be positive");
  if (!(len_i_ > 0.0 && len_c_ > 0.0 && len_e_ > 0.0))
    throw DomainError("region lengths must be positive");
  // A is piecewise linear, so positivity at the breakpoints is sufficient.
  for (double x : {x_min(), 0.0, len_c_, x_max()}) {
    if (!(area(x) > 0.0)) throw DomainError("geometry yields nonpositive area at x = " + std::to_string(x));
  }
}

void EngineGeometry::check_domain(double x) const {
  if (!(x >= x_min() && x <= x_max()))
    throw DomainError("position " + std::to_string(x) + " outside the engine [" +
                      std::to_string(x_min()) + ", " + std::to_string(x_max()) + "]");
}

Region EngineGeometry::region(double x) const {
  if (x < 0.0) return Region::Isolator;
  if (x <= len_c_) return Region::Combustor;
  return Region::Expansion;
}

double EngineGeometry::area(double x) const {
  check_domain(x);
  switch (region(x)) {
    case Region::Isolator:
      return a0_ - x * sin_i_;
    case Region::Combustor:
      return a0_ + x * sin_c_;
    case Region::Expansion:
      break;
  }
  return a0_ + len_c_ * sin_c_ + (x - len_c_) * sin_e_;
}

double EngineGeometry::area_slope(double x) const {
  check_domain(x);
  switch (region(x)) {
    case Region::Isolator:
      return -sin_i_;
    case Region::Combustor:
      return sin_c_;
    case Region::Expansion:
      break;
  }
  return sin_e_;
}

FuelSchedule::FuelSchedule(double phi, double cycle, double burst, double f_stoch, double h_prop,
                           double rho0, double u0)
    : phi_(phi), tau_(cycle), burst_(burst), f_stoch_(f_stoch), h_prop_(h_prop), rho0_(rho0), u0_(u0) {
  if (!(phi >= 0.0)) throw DomainError("equivalence ratio must be nonnegative");
  if (!(burst > 0.0 && burst <= cycle))
    throw DomainError("fuel burst must satisfy 0 < burst <= cycle");
}

bool FuelSchedule::fueling(double t) const {
  if (burst_ >= tau_) return true;
  // Half-open burst [n*tau, n*tau + b); the slack absorbs rounding of t = n*dt.
  constexpr double kSlack = 1e-9;
  const double cycles = std::floor(t / tau_ + kSlack);
  const double phase = t - cycles * tau_;
  return phase < burst_ * (1.0 - kSlack);
}

double FuelSchedule::spatial_profile(const EngineGeometry& geom, double x) const {
  if (x < 0.0 || x > geom.len_combustor()) return 0.0;
  const double lc = geom.len_combustor();
  return std::cbrt(x) * phi_ * f_stoch_ * h_prop_ * geom.a0() * rho0_ * u0_ /
         (lc * lc * geom.area(x));
}

double FuelSchedule::heat_source(const EngineGeometry& geom, double x, double t) const {
  if (!fueling(t)) return 0.0;
  return spatial_profile(geom, x);
}

FuelSchedule FuelSchedule::with_phi(double phi) const {
  return FuelSchedule(phi, tau_, burst_, f_stoch_, h_prop_, rho0_, u0_);
}

}  // namespace unstart::engine
