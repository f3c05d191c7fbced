#include "report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "errors.hpp"

namespace unstart::app {

using nlohmann::json;

namespace {

json maybe(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string csv_header(const ArtifactTag& tag, const std::string& columns) {
  return "# config_hash=" + tag.config_hash + " seed=" + std::to_string(tag.seed) + "\n" + columns + "\n";
}

std::string action_json(const ldp::ActionResult& r, const ArtifactTag& tag, double bound,
                        double threshold, double epsilon) {
  json j;
  j["value"] = r.value;
  j["coarse_path"] = std::vector<double>(r.minimizer.coarse().begin(), r.minimizer.coarse().end());
  j["iterations"] = r.iterations;
  j["feasible"] = r.feasible;
  j["residual"] = r.residual;
  j["converged"] = r.converged;
  j["status"] = r.status;
  j["pde_runs"] = r.pde_runs;
  j["refinement"] = r.minimizer.refinement();
  j["dt"] = r.minimizer.dt();
  j["mach_threshold"] = threshold;
  j["subsonic_bound"] = bound;
  j["ratio_to_bound"] = r.value / bound;
  j["log_asymptotic"] = {{"epsilon", epsilon},
                         {"exp_minus_value_over_eps2", ldp::asymptotic_probability(r.value, epsilon)},
                         {"note", "log-asymptotic rate only, not a probability estimate"}};
  json trace = json::array();
  for (const auto& t : r.trace)
    trace.push_back({{"iteration", t.iteration}, {"value", t.value}, {"residual", t.residual},
                     {"step", t.step}, {"form", t.form == ldp::ConstraintForm::Direct ? "direct" : "soft-min"}});
  j["trace"] = trace;
  j["config_hash"] = tag.config_hash;
  j["seed"] = tag.seed;
  return j.dump(2) + "\n";
}

ldp::InflowPath read_action_path(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    const json j = json::parse(in);
    return ldp::InflowPath(j.at("coarse_path").get<std::vector<double>>(),
                           j.at("refinement").get<std::size_t>(), j.at("dt").get<double>());
  } catch (const json::exception& e) {
    throw IoError("malformed action file '" + path.string() + "': " + e.what());
  }
}

std::string path_csv(const ldp::InflowPath& path, const ArtifactTag& tag) {
  std::string s = csv_header(tag, "t,u");
  const auto c = path.coarse();
  for (std::size_t n = 0; n < c.size(); ++n)
    s += number(static_cast<double>(n) * path.coarse_spacing()) + "," + number(c[n]) + "\n";
  return s;
}

std::string path_mach_csv(const ldp::InflowPath& path, double sound_speed, const ArtifactTag& tag) {
  std::string s = csv_header(tag, "t,mach");
  const auto c = path.coarse();
  for (std::size_t n = 0; n < c.size(); ++n)
    s += number(static_cast<double>(n) * path.coarse_spacing()) + "," + number(c[n] / sound_speed) + "\n";
  return s;
}

std::string mach_history_csv(const std::vector<solver::MachSample>& h, const ArtifactTag& tag) {
  std::string s = csv_header(tag, "t,x,mach");
  for (const auto& m : h) s += number(m.t) + "," + number(m.x) + "," + number(m.mach) + "\n";
  return s;
}

std::string series_csv(const std::vector<solver::TimeValue>& h, const std::string& column,
                       const ArtifactTag& tag) {
  std::string s = csv_header(tag, "t," + column);
  for (const auto& v : h) s += number(v.t) + "," + number(v.value) + "\n";
  return s;
}

std::string trajectory_json(const solver::TrajectoryRecord& r, const ArtifactTag& tag,
                            double threshold) {
  json j;
  j["min_m1"] = r.min_m1;
  j["min_step"] = r.min_step;
  j["mach_threshold"] = threshold;
  j["unstart"] = r.unstart_time.has_value();
  j["unstart_time"] = r.unstart_time ? json(*r.unstart_time) : json(nullptr);
  j["steps"] = r.steps;
  j["final_time"] = r.final_time;
  j["config_hash"] = tag.config_hash;
  j["seed"] = tag.seed;
  return j.dump(2) + "\n";
}

std::string estimator_json(const sampling::EstimatorReport& r, const ArtifactTag& tag) {
  json j;
  j["estimator"] = sampling::to_string(r.estimator);
  j["epsilon"] = r.epsilon;
  j["J"] = r.samples;
  j["p_hat"] = r.p_hat;
  j["std_j"] = r.std_j;
  j["ci99"] = {{"low", r.ci_low}, {"high", r.ci_high}};
  j["rel_err"] = maybe(r.rel_err);
  j["hits"] = r.hits;
  j["invalid"] = r.invalid;
  j["suspect"] = r.suspect();
  j["wall_time"] = r.wall_time;
  j["seed"] = r.seed;
  j["config_hash"] = tag.config_hash;
  return j.dump(2) + "\n";
}

std::string sweep_csv_header(const ArtifactTag& tag) {
  return csv_header(tag, "estimator,epsilon,J,p_hat,std_j,ci_low,ci_high,rel_err,hits,invalid,"
                         "wall_time,std_ratio");
}

std::string sweep_csv_row(const sampling::EstimatorReport& r, double std_ratio) {
  auto opt = [](double v) { return std::isfinite(v) ? number(v) : std::string(); };
  return sampling::to_string(r.estimator) + "," + number(r.epsilon) + "," + std::to_string(r.samples) +
         "," + number(r.p_hat) + "," + number(r.std_j) + "," + number(r.ci_low) + "," +
         number(r.ci_high) + "," + opt(r.rel_err) + "," + std::to_string(r.hits) + "," +
         std::to_string(r.invalid) + "," + number(r.wall_time) + "," + opt(std_ratio) + "\n";
}

ldp::InflowPath load_inflow_csv(const fs::path& path, double dt, std::size_t steps) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open inflow file '" + path.string() + "'");
  std::vector<double> ts, us;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || line == "\r") continue;
    const auto comma = line.find(',');
    double t = 0.0, u = 0.0;
    const bool ok = comma != std::string::npos &&
                    parse_double(std::string_view(line).substr(0, comma), t) &&
                    parse_double(std::string_view(line).substr(comma + 1), u);
    if (!ok) {
      if (ts.empty() && us.empty() && lineno <= 2) continue;  // column header
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected 't,u'");
    }
    if (!ts.empty() && !(t > ts.back()))
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": times must increase");
    ts.push_back(t);
    us.push_back(u);
  }
  if (ts.empty()) throw IoError("inflow file '" + path.string() + "' has no samples");
  std::vector<double> fine(steps + 1);
  std::size_t j = 0;
  for (std::size_t n = 0; n <= steps; ++n) {
    const double t = static_cast<double>(n) * dt;
    while (j + 1 < ts.size() && ts[j + 1] <= t) ++j;
    if (t <= ts.front()) {
      fine[n] = us.front();
    } else if (j + 1 >= ts.size()) {
      fine[n] = us.back();
    } else {
      const double w = (t - ts[j]) / (ts[j + 1] - ts[j]);
      fine[n] = (1.0 - w) * us[j] + w * us[j + 1];
    }
  }
  return ldp::InflowPath(std::move(fine), 1, dt);
}

}  // namespace unstart::app
