#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace unstart::ldp {

/// Reduced-order inflow speed: control values at every m-th fine time step,
/// linearly interpolated in between. The fine grid has N = m * Ntilde steps
/// of size dt.
class InflowPath {
 public:
  InflowPath(std::vector<double> coarse, std::size_t refinement, double dt);

  static InflowPath constant(double speed, std::size_t ntilde, std::size_t refinement, double dt);
  /// Straight line from `start` to `end` over the horizon.
  static InflowPath ramp(double start, double end, std::size_t ntilde, std::size_t refinement,
                         double dt);

  std::span<const double> coarse() const { return coarse_; }
  std::size_t ntilde() const { return coarse_.size() - 1; }
  std::size_t refinement() const { return m_; }
  double dt() const { return dt_; }
  std::size_t fine_steps() const { return ntilde() * m_; }
  double horizon() const { return static_cast<double>(fine_steps()) * dt_; }
  double coarse_spacing() const { return static_cast<double>(m_) * dt_; }
  double start() const { return coarse_.front(); }
  double terminal() const { return coarse_.back(); }

  /// Speed at fine index n in [0, N].
  double at_index(std::size_t n) const;
  /// Speed at time t; clamped to the endpoints outside [0, T].
  double at_time(double t) const;

  /// Coarse increments c[n+1] - c[n].
  std::vector<double> increments() const;
  bool same_grid(const InflowPath& other) const;

  /// Path with every control point moved toward/away from the start by factor s.
  InflowPath scaled_about_start(double s) const;
  InflowPath with_coarse(std::vector<double> coarse) const;

 private:
  std::vector<double> coarse_;
  std::size_t m_;
  double dt_;
};

}  // namespace unstart::ldp
