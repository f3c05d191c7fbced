#pragma once

// Artifact writers (JSON summaries, CSV tables) and the inflow CSV reader.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ldp.hpp"
#include "sampling.hpp"
#include "solver.hpp"

namespace unstart::app {

namespace fs = std::filesystem;

/// Stamped into every artifact.
struct ArtifactTag {
  std::string config_hash;
  std::uint64_t seed = 0;
};

/// Writes `text` to `path`, creating parent directories.
void write_text(const fs::path& path, const std::string& text);

/// Header line "# config_hash=<h> seed=<s>" followed by the column names.
std::string csv_header(const ArtifactTag& tag, const std::string& columns);

/// Shortest round-trip decimal text of v.
std::string number(double v);

std::string action_json(const ldp::ActionResult& r, const ArtifactTag& tag, double bound,
                        double threshold, double epsilon);
/// Reads the minimizer back from an action JSON.
ldp::InflowPath read_action_path(const fs::path& path);

/// Two columns t, u at the coarse control points.
std::string path_csv(const ldp::InflowPath& path, const ArtifactTag& tag);
/// Two columns t, mach with mach = u / sound_speed.
std::string path_mach_csv(const ldp::InflowPath& path, double sound_speed, const ArtifactTag& tag);

/// Long format t, x, mach.
std::string mach_history_csv(const std::vector<solver::MachSample>& h, const ArtifactTag& tag);
std::string series_csv(const std::vector<solver::TimeValue>& h, const std::string& column,
                       const ArtifactTag& tag);
std::string trajectory_json(const solver::TrajectoryRecord& r, const ArtifactTag& tag,
                            double threshold);

std::string estimator_json(const sampling::EstimatorReport& r, const ArtifactTag& tag);
std::string sweep_csv_header(const ArtifactTag& tag);
/// One sweep row; `std_ratio` is Std_MC / Std_IS at the same epsilon or NaN.
std::string sweep_csv_row(const sampling::EstimatorReport& r, double std_ratio);

/// Fine-grid path (refinement 1) from a two-column (t, u) CSV, linearly
/// interpolated onto t_n = n dt for n = 0..steps. Lines starting with '#' and
/// a non-numeric header line are skipped.
ldp::InflowPath load_inflow_csv(const fs::path& path, double dt, std::size_t steps);

}  // namespace unstart::app
