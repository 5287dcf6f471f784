#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "refplan/scenario.hpp"

using namespace refplan;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("urban scenarios carry the urban parameter set") {
  for (std::uint64_t seed : {0ULL, 7ULL, 123456ULL}) {
    const auto sc = scenario::make_urban_scenario(seed);
    CHECK(sc.limits.v_r == doctest::Approx(12.0));
    CHECK(sc.limits.d_min == doctest::Approx(5.0));
    CHECK(sc.limits.v_max == doctest::Approx(40.0));
    CHECK(sc.limits.omega_max == doctest::Approx(kPi / 6.0));
    CHECK(sc.limits.j_max == doctest::Approx(0.6));
    CHECK(sc.chance.alpha == doctest::Approx(0.95));
    CHECK(sc.target.sigma_x == doctest::Approx(1.0));
    CHECK(sc.target.sigma_y == doctest::Approx(1.0));
  }
}

TEST_CASE("scenario generation is deterministic per seed") {
  const auto a = scenario::make_urban_scenario(42);
  const auto b = scenario::make_urban_scenario(42);
  CHECK(scenario::canonical_json(a) == scenario::canonical_json(b));
}

TEST_CASE("distinct seeds give distinct target gaps") {
  std::set<long long> gaps;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto sc = scenario::make_urban_scenario(seed);
    // initial gap in micro-meters as a collision-safe discretization
    const double gap = std::hypot(sc.target.mu_x(0) - sc.z_init.x,
                                  sc.target.mu_y(0) - sc.z_init.y);
    gaps.insert(static_cast<long long>(std::lround(gap * 1e6)));
  }
  CHECK(gaps.size() >= 195);
}

TEST_CASE("risky scenario construction") {
  const auto sc = scenario::make_risky_scenario(3);
  CHECK(sc.limits.v_r == doctest::Approx(14.0));
  // target speed at the end of the horizon: differentiate the mu samples
  const auto n = sc.target.mu_x.size();
  const double dt = sc.horizon_T / static_cast<double>(n - 1);
  const double vx = (sc.target.mu_x(n - 1) - sc.target.mu_x(n - 2)) / dt;
  const double vy = (sc.target.mu_y(n - 1) - sc.target.mu_y(n - 2)) / dt;
  CHECK(std::hypot(vx, vy) == doctest::Approx(6.0).epsilon(0.01));
  // initial gap 12 m
  const double gap0 = std::hypot(sc.target.mu_x(0) - sc.z_init.x,
                                 sc.target.mu_y(0) - sc.z_init.y);
  CHECK(gap0 == doctest::Approx(12.0).epsilon(0.01));
}

TEST_CASE("high-speed argument validation") {
  CHECK_NOTHROW(scenario::make_highspeed_scenario(22.0, kPi / 6.0, 1));
  CHECK_NOTHROW(scenario::make_highspeed_scenario(36.0, kPi / 4.0, 1));
  CHECK_THROWS_AS(scenario::make_highspeed_scenario(50.0, kPi / 6.0, 1),
                  std::domain_error);
  CHECK_THROWS_AS(scenario::make_highspeed_scenario(22.0, 1.0, 1),
                  std::domain_error);
}

TEST_CASE("realizations: sigma 0 equals mu, fixed seed repeats") {
  auto sc = scenario::make_urban_scenario(9);
  const TimeGrid grid{50.0, 40};
  sc.target.sigma_x = 0.0;
  sc.target.sigma_y = 0.0;
  const auto r0 = scenario::realize_measurements(sc, grid, 5);
  const auto tm = scenario::sample_target_on_grid(sc, grid);
  CHECK((r0.x - tm.mu_x).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK((r0.y - tm.mu_y).cwiseAbs().maxCoeff() == doctest::Approx(0.0));

  sc.target.sigma_x = 1.0;
  sc.target.sigma_y = 1.0;
  const auto a = scenario::realize_measurements(sc, grid, 5);
  const auto b = scenario::realize_measurements(sc, grid, 5);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
}

TEST_CASE("realization mean concentrates at mu") {
  const auto sc = scenario::make_urban_scenario(11);
  const TimeGrid grid{50.0, 10};
  const auto tm = scenario::sample_target_on_grid(sc, grid);
  const int n = 10000;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const auto r = scenario::realize_measurements(sc, grid, 1000 + k);
    sum += r.x(4);
  }
  const double mean = sum / n;
  CHECK(std::abs(mean - tm.mu_x(4)) <= 3.0 * 1.0 / std::sqrt(double(n)));
}

TEST_CASE("generated scenarios keep the target inside the corridor") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto sc = scenario::make_urban_scenario(seed);
    const auto n = sc.target.mu_x.size();
    const double limit = sc.bounds.half_width - sc.bounds.safety_margin;
    for (Eigen::Index k = 0; k < n; k += std::max<Eigen::Index>(1, n / 200)) {
      const double off = sc.lane->lateral_offset(
          {sc.target.mu_x(k), sc.target.mu_y(k)});
      CHECK(std::abs(off) <= limit + 1e-6);
    }
  }
}

TEST_CASE("json round trip preserves the scenario") {
  for (std::uint64_t seed : {1ULL, 17ULL}) {
    const auto sc = scenario::make_urban_scenario(seed);
    const auto j = scenario::to_json(sc);
    const auto back = scenario::scenario_from_json(j);
    CHECK(scenario::canonical_json(sc) == scenario::canonical_json(back));
  }
  const auto hs = scenario::make_highspeed_scenario(36.0, kPi / 2.0, 5);
  const auto back = scenario::scenario_from_json(scenario::to_json(hs));
  CHECK(scenario::canonical_json(hs) == scenario::canonical_json(back));
}

TEST_CASE("validation errors name the offending json path") {
  auto sc = scenario::make_urban_scenario(2);
  auto j = scenario::to_json(sc);
  j["limits"]["v_r"] = 99.0;  // above v_max
  try {
    scenario::scenario_from_json(j);
    CHECK(false);
  } catch (const scenario::ScenarioError& e) {
    CHECK(e.path() == "limits.v_r");
  }

  auto j2 = scenario::to_json(sc);
  j2["chance"]["alpha"] = 0.4;
  try {
    scenario::scenario_from_json(j2);
    CHECK(false);
  } catch (const scenario::ScenarioError& e) {
    CHECK(e.path() == "chance.alpha");
  }

  auto j3 = scenario::to_json(sc);
  j3.erase("horizon_T");
  CHECK_THROWS_AS(scenario::scenario_from_json(j3), scenario::ScenarioError);
}

TEST_CASE("chance mode defaults to the literal band when absent") {
  const auto sc = scenario::make_urban_scenario(4);
  auto j = scenario::to_json(sc);
  j["chance"].erase("mode");
  const auto back = scenario::scenario_from_json(j);
  CHECK(back.chance.mode == chance::ChanceMode::PaperLiteral);
}
