#include <doctest.h>

#include <cmath>
#include <random>

#include "errors.hpp"
#include "ldp.hpp"

using namespace unstart;
using namespace unstart::ldp;

namespace {

const engine::GasModel kGas(1.4);

FlowSolver default_solver() {
  return FlowSolver(kGas, engine::FreeStream{}, engine::EngineGeometry(0.008, 0.5, 0.1, 0.1, 0.0, 7.5, 15.0),
                    solver::Discretization(100, 1e-6, 10000));
}

const Scenario& short_scenario() {
  static const Scenario s(default_solver(), FuelSchedule(0.78, 0.5e-3, 0.1e-3), PathGrid{});
  return s;
}

}  // namespace

TEST_CASE("inflow path interpolation") {
  const InflowPath p({1300.0, 1100.0, 1200.0}, 4, 1e-3);
  CHECK(p.ntilde() == 2);
  CHECK(p.fine_steps() == 8);
  CHECK(p.horizon() == doctest::Approx(8e-3));
  CHECK(p.at_index(0) == 1300.0);
  CHECK(p.at_index(2) == doctest::Approx(1200.0));
  CHECK(p.at_index(4) == 1100.0);
  CHECK(p.at_index(7) == doctest::Approx(1175.0));
  CHECK(p.at_time(1e-3) == doctest::Approx(1250.0));
  CHECK(p.at_time(-1.0) == 1300.0);
  CHECK(p.at_time(1.0) == 1200.0);
  CHECK(p.increments() == std::vector<double>{-200.0, 100.0});
  CHECK_THROWS_AS(InflowPath({1300.0}, 4, 1e-3), ContractError);
  CHECK_THROWS_AS(InflowPath({1300.0, 1.0}, 0, 1e-3), ContractError);
}

TEST_CASE("event and noise validation") {
  CHECK_THROWS_AS((EventSpec{0.0, 1}.validate()), DomainError);
  CHECK_THROWS_AS((EventSpec{1.0, 0}.validate()), DomainError);
  CHECK_THROWS_AS((NoiseModel{0.0, 1.0, 0.2}.validate()), DomainError);
  CHECK_THROWS_AS((NoiseModel{1e4, 1.0, 0.0}.validate()), DomainError);
}

TEST_CASE("rate function of reference paths") {
  CHECK(rate_discrete(InflowPath::constant(1300.0, 20, 500, 1e-6), 1e4) == 0.0);
  const auto ramp = InflowPath::ramp(1300.0, 650.0, 20, 500, 1e-6);
  CHECK(std::abs(rate_discrete(ramp, 1e4) / 0.21125 - 1.0) < 1e-10);
}

TEST_CASE("rate function scales quadratically about the start") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 40.0);
  std::vector<double> c{1300.0};
  for (int i = 0; i < 20; ++i) c.push_back(c.back() + n(rng));
  const InflowPath p(c, 500, 1e-6);
  for (double s : {0.5, 2.0, 3.7}) {
    CHECK(rate_discrete(p.scaled_about_start(s), 1e4) == doctest::Approx(s * s * rate_discrete(p, 1e4)).epsilon(1e-12));
  }
  CHECK(rate_discrete(p, 2e4) == doctest::Approx(rate_discrete(p, 1e4) / 4.0).epsilon(1e-14));
}

TEST_CASE("rate function equals the continuous action of the interpolant") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 30.0);
  for (std::size_t ntilde : {2u, 20u, 40u}) {
    std::vector<double> c{1300.0};
    for (std::size_t i = 0; i < ntilde; ++i) c.push_back(c.back() + n(rng));
    const InflowPath p(c, 10000 / ntilde, 1e-6);
    // Integral of (du/dt)^2 over the fine grid, where du/dt is constant per step.
    double integral = 0.0;
    for (std::size_t k = 0; k < p.fine_steps(); ++k) {
      const double slope = (p.at_index(k + 1) - p.at_index(k)) / p.dt();
      integral += slope * slope * p.dt();
    }
    CHECK(rate_discrete(p, 1e4) == doctest::Approx(integral / (2.0 * 1e8)).epsilon(1e-9));
  }
}

TEST_CASE("straight-line subsonic bound") {
  const PathGrid grid;
  const auto b = subsonic_bound(1e4, 1300.0, 2.0, 1.0, grid);
  CHECK(b.value == doctest::Approx(0.21125).epsilon(1e-14));
  CHECK(b.path.start() == 1300.0);
  CHECK(b.path.terminal() == 650.0);
  CHECK(std::abs(subsonic_bound(1e4, 1300.0, 2.0, 0.8, grid).value - 0.3042) < 1e-12);
  CHECK(std::abs(subsonic_bound(1e4, 1300.0, 2.0, 1.2, grid).value - 0.1352) < 1e-12);
  CHECK_THROWS_AS(subsonic_bound(1e4, 1300.0, 2.0, 2.0, grid), DomainError);
  CHECK_THROWS_AS(subsonic_bound(1e4, 1300.0, 2.0, 2.5, grid), DomainError);
}

TEST_CASE("asymptotic probability") {
  CHECK(asymptotic_probability(0.0, 0.2) == 1.0);
  CHECK(asymptotic_probability(0.21504, 0.2) == doctest::Approx(0.00462629012948745274).epsilon(1e-12));
  CHECK(asymptotic_probability(0.21504, 1e8) == doctest::Approx(1.0));
  CHECK_THROWS_AS(asymptotic_probability(-1.0, 0.2), DomainError);
}

TEST_CASE("scenario level speeds") {
  const auto& s = short_scenario();
  CHECK(s.u0() == 1300.0);
  CHECK(s.level_speed(1.0) == 650.0);
  CHECK(s.constant_path().terminal() == 1300.0);
  CHECK(s.ramp(700.0).terminal() == 700.0);
}

TEST_CASE("unstart membership") {
  const auto& s = short_scenario();
  EventSpec spec;
  CHECK_FALSE(is_unstart(s, s.constant_path(), spec));
  CHECK(is_unstart(s, s.ramp(0.3 * 1300.0), spec));
  // A_1.0 is contained in A_1.2.
  for (double terminal : {600.0, 700.0, 760.0, 800.0, 900.0}) {
    const auto p = s.ramp(terminal);
    if (is_unstart(s, p, EventSpec{1.0, 1})) CHECK(is_unstart(s, p, EventSpec{1.2, 1}));
    if (is_unstart(s, p, EventSpec{0.8, 1})) CHECK(is_unstart(s, p, EventSpec{1.0, 1}));
  }
}

TEST_CASE("auto initial ramp sits on the event boundary") {
  const auto& s = short_scenario();
  const EventSpec spec;
  const ActionOptions opts;
  const auto ramp = initial_ramp(s, spec, opts);
  CHECK(is_unstart(s, ramp, spec));
  CHECK_FALSE(is_unstart(s, s.ramp(ramp.terminal() + 0.5), spec));
  ActionOptions narrow = opts;
  narrow.bracket_low = 0.95;
  CHECK_THROWS_AS(initial_ramp(s, spec, narrow), InfeasibleError);
}

TEST_CASE("minimum action for the short cycle is feasible and near the bound") {
  const auto& s = short_scenario();
  const EventSpec spec;
  const auto r = minimize_action(s, spec, NoiseModel{});
  CHECK(r.feasible);
  CHECK(r.residual <= 0.0);
  CHECK(is_unstart(s, r.minimizer, spec));
  CHECK(r.value == doctest::Approx(rate_discrete(r.minimizer, 1e4)).epsilon(1e-14));
  CHECK(r.value <= 1.10 * 0.21125);
  CHECK(r.value >= 0.95 * 0.21504);
  CHECK_FALSE(r.trace.empty());
}

TEST_CASE("minimum action is insensitive to the starting path") {
  const auto& s = short_scenario();
  const EventSpec spec;
  const double reference = minimize_action(s, spec, NoiseModel{}).value;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  int tried = 0;
  while (tried < 3) {
    // Random feasible start: a deep ramp with a wiggle.
    std::vector<double> c{1300.0};
    for (int i = 1; i <= 20; ++i) c.push_back(1300.0 - i * 30.0 + 15.0 * n(rng));
    const InflowPath start(c, 500, 1e-6);
    if (!is_unstart(s, start, spec)) continue;
    ++tried;
    const auto r = minimize_action(s, spec, NoiseModel{}, start);
    CHECK(r.feasible);
    CHECK(r.value == doctest::Approx(reference).epsilon(0.01));
  }
}

TEST_CASE("doubling sigma divides the minimum by four and keeps the path") {
  const auto& s = short_scenario();
  const EventSpec spec;
  const auto a = minimize_action(s, spec, NoiseModel{1e4, 96.902, 0.2});
  const auto b = minimize_action(s, spec, NoiseModel{2e4, 96.902, 0.2});
  CHECK(b.value == doctest::Approx(a.value / 4.0).epsilon(1e-3));
  for (std::size_t i = 0; i < a.minimizer.coarse().size(); ++i)
    CHECK(b.minimizer.coarse()[i] == doctest::Approx(a.minimizer.coarse()[i]).epsilon(1e-3));
}

TEST_CASE("minimize_action rejects mismatched starting paths") {
  const auto& s = short_scenario();
  CHECK_THROWS_AS(minimize_action(s, EventSpec{}, NoiseModel{}, InflowPath::ramp(1300.0, 500.0, 10, 1000, 1e-6)),
                  ContractError);
  CHECK_THROWS_AS(minimize_action(s, EventSpec{}, NoiseModel{}, InflowPath::ramp(1200.0, 500.0, 20, 500, 1e-6)),
                  ContractError);
}
