#include "sampling.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "errors.hpp"
#include "parallel.hpp"

namespace unstart::sampling {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double increment_std(double sigma_u, double epsilon, const PathGrid& grid) {
  return epsilon * sigma_u * std::sqrt(static_cast<double>(grid.refinement) * grid.dt);
}

}  // namespace

Rng sample_stream(std::uint64_t base_seed, std::uint64_t index) {
  return Rng(splitmix64(splitmix64(base_seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

InflowPath sample_path_p(Rng& rng, double sigma_u, double epsilon, double u0, const PathGrid& grid) {
  const double s = increment_std(sigma_u, epsilon, grid);
  std::normal_distribution<double> normal;
  std::vector<double> c(grid.ntilde + 1);
  c[0] = u0;
  double walk = 0.0;
  for (std::size_t n = 1; n <= grid.ntilde; ++n) {
    walk += s * normal(rng);
    c[n] = u0 + walk;
  }
  return InflowPath(std::move(c), grid.refinement, grid.dt);
}

InflowPath sample_path_q(Rng& rng, double sigma_u, double epsilon, const InflowPath& center) {
  const PathGrid grid{center.ntilde(), center.refinement(), center.dt()};
  const double s = increment_std(sigma_u, epsilon, grid);
  std::normal_distribution<double> normal;
  std::vector<double> c(grid.ntilde + 1);
  c[0] = center.start();
  double walk = 0.0;
  for (std::size_t n = 1; n <= grid.ntilde; ++n) {
    walk += s * normal(rng);
    c[n] = center.coarse()[n] + walk;
  }
  return InflowPath(std::move(c), grid.refinement, grid.dt);
}

double log_likelihood_ratio(const InflowPath& path, const InflowPath& center, double sigma_u,
                            double epsilon) {
  if (!path.same_grid(center)) throw ContractError("path and center use different grids");
  if (path.start() != center.start()) throw ContractError("path and center must share the start value");
  const auto du = path.increments();
  const auto dc = center.increments();
  double acc = 0.0;
  for (std::size_t n = 0; n < du.size(); ++n) {
    const double shifted = du[n] - dc[n];
    acc += du[n] * du[n] - shifted * shifted;
  }
  const double var = epsilon * epsilon * sigma_u * sigma_u * path.coarse_spacing();
  return -acc / (2.0 * var);
}

double likelihood_ratio(const InflowPath& path, const InflowPath& center, double sigma_u,
                        double epsilon) {
  return std::exp(log_likelihood_ratio(path, center, sigma_u, epsilon));
}

std::string to_string(Estimator e) { return e == Estimator::MC ? "mc" : "is"; }

Estimator estimator_from_string(const std::string& s) {
  if (s == "mc" || s == "MC") return Estimator::MC;
  if (s == "is" || s == "IS") return Estimator::IS;
  throw DomainError("unknown estimator '" + s + "' (expected mc or is)");
}

void fill_statistics(EstimatorReport& report, const std::vector<double>& contributions) {
  const std::size_t j = contributions.size();
  report.samples = j;
  // Neumaier summation in index order keeps the result scheduling-independent.
  double sum = 0.0, comp = 0.0;
  for (double y : contributions) {
    const double t = sum + y;
    comp += std::abs(sum) >= std::abs(y) ? (sum - t) + y : (y - t) + sum;
    sum = t;
  }
  const double mean = j > 0 ? (sum + comp) / static_cast<double>(j) : 0.0;
  double ss = 0.0;
  for (double y : contributions) ss += (y - mean) * (y - mean);
  report.p_hat = mean;
  report.std_j = j > 1 ? std::sqrt(ss / static_cast<double>(j - 1)) : 0.0;
  const double half = j > 0 ? kCi99 * report.std_j / std::sqrt(static_cast<double>(j)) : 0.0;
  report.ci_low = mean - half;
  report.ci_high = mean + half;
  report.rel_err = mean > 0.0 ? report.std_j / mean : std::numeric_limits<double>::quiet_NaN();
}

EstimatorReport estimate(const SampleBatchSpec& spec, double sigma_u, double u0,
                         const PathGrid& grid, const EventIndicator& event) {
  if (spec.samples == 0) throw DomainError("need at least one sample");
  if (!(spec.epsilon > 0.0)) throw DomainError("epsilon must be positive");
  if (spec.estimator == Estimator::IS) {
    if (!spec.center) throw ContractError("importance sampling needs a center path");
    if (spec.center->start() != u0) throw ContractError("center path must start at u0");
    const PathGrid cg{spec.center->ntilde(), spec.center->refinement(), spec.center->dt()};
    if (cg.ntilde != grid.ntilde || cg.refinement != grid.refinement || cg.dt != grid.dt)
      throw ContractError("center path grid does not match the sampling grid");
  }
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> y(spec.samples, 0.0);
  std::vector<unsigned char> hit(spec.samples, 0), bad(spec.samples, 0);
  parallel_for(spec.samples, [&](std::size_t j) {
    Rng rng = sample_stream(spec.seed, j);
    const bool is = spec.estimator == Estimator::IS;
    const InflowPath path = is ? sample_path_q(rng, sigma_u, spec.epsilon, *spec.center)
                               : sample_path_p(rng, sigma_u, spec.epsilon, u0, grid);
    const Outcome o = event(path);
    bad[j] = o.invalid ? 1 : 0;
    if (!o.hit || o.invalid) return;
    hit[j] = 1;
    y[j] = is ? likelihood_ratio(path, *spec.center, sigma_u, spec.epsilon) : 1.0;
  });
  EstimatorReport report;
  report.estimator = spec.estimator;
  report.epsilon = spec.epsilon;
  report.seed = spec.seed;
  fill_statistics(report, y);
  report.hits = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
  report.invalid = static_cast<std::size_t>(std::count(bad.begin(), bad.end(), 1));
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

EventIndicator unstart_indicator(const ldp::Scenario& scenario, const ldp::EventSpec& spec,
                                 solver::Stepping stepping) {
  spec.validate();
  return [&scenario, spec, stepping](const InflowPath& path) {
    solver::RecordOptions rec;
    rec.monitor_cell = spec.monitor_cell;
    rec.threshold = spec.mach_threshold;
    rec.stop_at_crossing = true;
    try {
      return Outcome{scenario.run(path, stepping, rec).unstart_time.has_value(), false};
    } catch (const InvalidStateError&) {
      return Outcome{false, true};
    } catch (const InstabilityError&) {
      return Outcome{false, true};
    }
  };
}

EstimatorReport estimate_mc(const ldp::Scenario& scenario, const ldp::EventSpec& event,
                            double sigma_u, const SampleBatchSpec& spec, solver::Stepping stepping) {
  if (spec.estimator != Estimator::MC) throw ContractError("estimate_mc needs the MC estimator");
  return estimate(spec, sigma_u, scenario.u0(), scenario.grid(),
                  unstart_indicator(scenario, event, stepping));
}

EstimatorReport estimate_is(const ldp::Scenario& scenario, const ldp::EventSpec& event,
                            double sigma_u, const SampleBatchSpec& spec, solver::Stepping stepping) {
  if (spec.estimator != Estimator::IS) throw ContractError("estimate_is needs the IS estimator");
  return estimate(spec, sigma_u, scenario.u0(), scenario.grid(),
                  unstart_indicator(scenario, event, stepping));
}

EventIndicator subsonic_inflow_indicator(double level_speed) {
  return [level_speed](const InflowPath& path) {
    const auto c = path.coarse();
    return Outcome{*std::min_element(c.begin(), c.end()) <= level_speed, false};
  };
}

double reflection_bound(double sigma_u, double epsilon, double u0, double level_speed, double horizon) {
  if (level_speed >= u0) return 1.0;
  const double z = (level_speed - u0) / (epsilon * sigma_u * std::sqrt(horizon));
  return std::erfc(-z / std::sqrt(2.0));  // 2 * Phi(z)
}

double oracle_subsonic_event(double sigma_u, double epsilon, double u0, double level_speed,
                             const PathGrid& grid, std::size_t samples, std::uint64_t seed) {
  if (level_speed >= u0) return 1.0;
  if (samples == 0) throw DomainError("need at least one sample");
  // One stream per block of walks; blocks are independent of the thread count.
  constexpr std::size_t kBlock = 10000;
  const std::size_t blocks = (samples + kBlock - 1) / kBlock;
  const double s = increment_std(sigma_u, epsilon, grid);
  std::vector<std::size_t> hits(blocks, 0);
  parallel_for(blocks, [&](std::size_t b) {
    Rng rng = sample_stream(seed, b);
    std::normal_distribution<double> normal;
    const std::size_t end = std::min(samples, (b + 1) * kBlock);
    std::size_t count = 0;
    for (std::size_t j = b * kBlock; j < end; ++j) {
      double u = u0;
      bool hit = false;
      for (std::size_t n = 0; n < grid.ntilde; ++n) {
        u += s * normal(rng);
        hit = hit || u <= level_speed;
      }
      count += hit ? 1 : 0;
    }
    hits[b] = count;
  });
  std::size_t total = 0;
  for (std::size_t h : hits) total += h;
  return static_cast<double>(total) / static_cast<double>(samples);
}

}  // namespace unstart::sampling
