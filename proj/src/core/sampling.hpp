#pragma once

// Plain and large-deviation importance-sampling Monte Carlo estimators of the
// unstart probability.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>

#include "inflow.hpp"
#include "ldp.hpp"

namespace unstart::sampling {

using ldp::InflowPath;
using ldp::PathGrid;

using Rng = std::mt19937_64;

/// Independent stream for sample `index`, derived from the base seed by
/// SplitMix64 mixing so results never depend on scheduling.
Rng sample_stream(std::uint64_t base_seed, std::uint64_t index);

/// Gaussian random walk from u0 with increment std epsilon * sigma_u * sqrt(m dt).
InflowPath sample_path_p(Rng& rng, double sigma_u, double epsilon, double u0, const PathGrid& grid);

/// Random walk fluctuations added to `center`.
InflowPath sample_path_q(Rng& rng, double sigma_u, double epsilon, const InflowPath& center);

/// log dP/dQ for a path drawn around `center`, in increment form.
double log_likelihood_ratio(const InflowPath& path, const InflowPath& center, double sigma_u,
                            double epsilon);
double likelihood_ratio(const InflowPath& path, const InflowPath& center, double sigma_u,
                        double epsilon);

enum class Estimator { MC, IS };

std::string to_string(Estimator e);
Estimator estimator_from_string(const std::string& s);

struct SampleBatchSpec {
  std::size_t samples = 10000;
  double epsilon = 0.2;
  std::uint64_t seed = 1;
  Estimator estimator = Estimator::MC;
  /// Required for IS; must start at u0.
  std::optional<InflowPath> center;
};

/// Per-sample event outcome. `invalid` marks a solver failure; such samples
/// count as non-events and are reported separately.
struct Outcome {
  bool hit = false;
  bool invalid = false;
};

using EventIndicator = std::function<Outcome(const InflowPath&)>;

struct EstimatorReport {
  Estimator estimator = Estimator::MC;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  double p_hat = 0.0;
  double std_j = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  /// std_j / p_hat; NaN when p_hat is zero.
  double rel_err = 0.0;
  std::size_t hits = 0;
  std::size_t invalid = 0;
  double wall_time = 0.0;

  bool suspect() const { return invalid > 0; }
};

inline constexpr double kCi99 = 2.58;

/// Summary statistics of per-sample contributions Y_j (indicator or weighted
/// indicator), reduced in index order.
void fill_statistics(EstimatorReport& report, const std::vector<double>& contributions);

/// Estimator over an arbitrary event. Paths are drawn under P (MC) or around
/// the center (IS) with per-sample streams.
EstimatorReport estimate(const SampleBatchSpec& spec, double sigma_u, double u0,
                         const PathGrid& grid, const EventIndicator& event);

/// Unstart indicator: the scenario run with the given stepping, stopped at the
/// first threshold crossing.
EventIndicator unstart_indicator(const ldp::Scenario& scenario, const ldp::EventSpec& spec,
                                 solver::Stepping stepping = solver::Stepping::Adaptive);

EstimatorReport estimate_mc(const ldp::Scenario& scenario, const ldp::EventSpec& event,
                            double sigma_u, const SampleBatchSpec& spec,
                            solver::Stepping stepping = solver::Stepping::Adaptive);
EstimatorReport estimate_is(const ldp::Scenario& scenario, const ldp::EventSpec& event,
                            double sigma_u, const SampleBatchSpec& spec,
                            solver::Stepping stepping = solver::Stepping::Adaptive);

/// Inflow-only event: the coarse walk's minimum reaches `level_speed`.
EventIndicator subsonic_inflow_indicator(double level_speed);

/// 2 Phi((u_level - u0) / (epsilon sigma_u sqrt(T))): the continuous-time
/// first-passage probability, an upper bound for the discretely monitored walk.
double reflection_bound(double sigma_u, double epsilon, double u0, double level_speed, double horizon);

/// Brute-force plain Monte Carlo probability of the inflow-only event.
double oracle_subsonic_event(double sigma_u, double epsilon, double u0, double level_speed,
                             const PathGrid& grid, std::size_t samples, std::uint64_t seed);

}  // namespace unstart::sampling
