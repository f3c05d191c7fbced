#pragma once

// End-to-end runs behind the command-line subcommands. Each writes its
// artifacts under the given directory.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "report.hpp"

namespace unstart::app {

ArtifactTag tag_of(const RunConfig& cfg);

struct SimulateSummary {
  solver::TrajectoryRecord record;
  fs::path dir;
};

/// Runs the configured inflow (constant, CSV file or one sampled walk) and
/// writes summary.json, mach.csv (t, x, mach), shock.csv and thrust.csv.
SimulateSummary run_simulate(const RunConfig& cfg, const fs::path& out);

struct SpinUpSummary {
  solver::ConservedField field;
  double min_mach = 0.0;
  double max_mach = 0.0;
  fs::path dir;
};

/// Writes equilibrium.csv (x, rho, u, p, mach) and summary.json.
SpinUpSummary run_spin_up(const RunConfig& cfg, const fs::path& out);

struct OptimizeSummary {
  ldp::ActionResult result;
  double bound = 0.0;
  fs::path dir;
};

/// Writes action.json, minimizer.csv (t, u) and minimizer_mach.csv.
/// `scenario` avoids a second spin-up when the caller already has one.
OptimizeSummary run_optimize(const RunConfig& cfg, const fs::path& out,
                             const ldp::Scenario* scenario = nullptr);

struct EstimateSummary {
  std::vector<sampling::EstimatorReport> reports;
  fs::path dir;
};

/// One report per (estimator, epsilon) plus sweep.csv. IS loads its center
/// from estimate.center or computes it into <out>/center.
EstimateSummary run_estimate(const RunConfig& cfg, const fs::path& out);

std::vector<std::string> study_names();

/// Runs a named study in a new directory under `root` and returns it. Rows
/// are written to comparison.csv and comparison.md.
fs::path run_reproduce(const std::string& study, const RunConfig& base, const fs::path& root);

/// First of <root>/<prefix>-001, -002, ... that does not exist yet, created.
fs::path fresh_directory(const fs::path& root, const std::string& prefix);

/// True when steady fueling at `phi` (fuel on for the whole horizon) drives
/// the shock into the isolator within the configured horizon.
bool shock_enters_isolator(const ldp::Scenario& scenario, double phi);

/// Bisection for the smallest steady equivalence ratio pushing the shock into
/// the isolator. Requires the event at `hi` and not at `lo`.
double steady_fueling_threshold(const ldp::Scenario& scenario, double lo, double hi,
                                std::size_t iterations = 20);

}  // namespace unstart::app
