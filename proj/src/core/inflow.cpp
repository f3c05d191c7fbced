#include "inflow.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace unstart::ldp {

InflowPath::InflowPath(std::vector<double> coarse, std::size_t refinement, double dt)
    : coarse_(std::move(coarse)), m_(refinement), dt_(dt) {
  if (coarse_.size() < 2) throw ContractError("inflow path needs at least two control points");
  if (m_ == 0) throw ContractError("refinement factor must be positive");
  if (!(dt_ > 0.0)) throw ContractError("time increment must be positive");
}

InflowPath InflowPath::constant(double speed, std::size_t ntilde, std::size_t refinement, double dt) {
  return InflowPath(std::vector<double>(ntilde + 1, speed), refinement, dt);
}

InflowPath InflowPath::ramp(double start, double end, std::size_t ntilde, std::size_t refinement,
                            double dt) {
  std::vector<double> c(ntilde + 1);
  for (std::size_t n = 0; n <= ntilde; ++n) {
    const double w = static_cast<double>(n) / static_cast<double>(ntilde);
    c[n] = (1.0 - w) * start + w * end;
  }
  return InflowPath(std::move(c), refinement, dt);
}

double InflowPath::at_index(std::size_t n) const {
  const std::size_t j = n / m_;
  if (j >= ntilde()) return coarse_.back();
  const double w = static_cast<double>(n % m_) / static_cast<double>(m_);
  return (1.0 - w) * coarse_[j] + w * coarse_[j + 1];
}

double InflowPath::at_time(double t) const {
  if (t <= 0.0) return coarse_.front();
  const double s = t / coarse_spacing();
  if (s >= static_cast<double>(ntilde())) return coarse_.back();
  const auto j = static_cast<std::size_t>(std::floor(s));
  const double w = s - static_cast<double>(j);
  return (1.0 - w) * coarse_[j] + w * coarse_[j + 1];
}

std::vector<double> InflowPath::increments() const {
  std::vector<double> d(ntilde());
  for (std::size_t n = 0; n < d.size(); ++n) d[n] = coarse_[n + 1] - coarse_[n];
  return d;
}

bool InflowPath::same_grid(const InflowPath& other) const {
  return ntilde() == other.ntilde() && m_ == other.m_ && dt_ == other.dt_;
}

InflowPath InflowPath::scaled_about_start(double s) const {
  std::vector<double> c(coarse_.size());
  for (std::size_t n = 0; n < c.size(); ++n) c[n] = coarse_[0] + s * (coarse_[n] - coarse_[0]);
  return InflowPath(std::move(c), m_, dt_);
}

InflowPath InflowPath::with_coarse(std::vector<double> coarse) const {
  if (coarse.size() != coarse_.size()) throw ContractError("control point count mismatch");
  return InflowPath(std::move(coarse), m_, dt_);
}

}  // namespace unstart::ldp
