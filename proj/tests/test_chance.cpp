#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "refplan/chance.hpp"
#include "refplan/rng.hpp"

using namespace refplan;
using Eigen::VectorXd;

TEST_CASE("quantile: median and frozen oracle values") {
  CHECK(chance::normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  // frozen from the integration+bisection oracle
  CHECK(std::abs(chance::normal_quantile(0.975) - 1.9599639845) < 1e-7);
  CHECK(std::abs(chance::normal_quantile(0.475) - (-0.0627067779)) < 1e-7);
  CHECK_THROWS_AS(chance::normal_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS(chance::normal_quantile(1.0), std::domain_error);
  CHECK_THROWS_AS(chance::normal_quantile(-0.2), std::domain_error);
}

TEST_CASE("quantile vs integration oracle across the unit interval") {
  for (double p : {1e-4, 1e-3, 0.01, 0.05, 0.2, 0.475, 0.5, 0.525, 0.8, 0.95,
                   0.99, 0.999, 1.0 - 1e-4}) {
    CHECK(std::abs(chance::normal_quantile(p) - oracles::normal_quantile(p)) <
          1e-7);
  }
}

TEST_CASE("quantile symmetry") {
  Rng rng(31);
  for (int i = 0; i < 100; ++i) {
    const double p = rng.uniform(1e-6, 1.0 - 1e-6);
    CHECK(std::abs(chance::normal_quantile(p) +
                   chance::normal_quantile(1.0 - p)) < 1e-9);
  }
}

TEST_CASE("cdf(quantile(p)) = p on a grid") {
  for (double p = 1e-4; p < 1.0; p += 0.025) {
    CHECK(std::abs(chance::normal_cdf(chance::normal_quantile(p)) - p) < 1e-7);
  }
}

TEST_CASE("deterministic-equivalent bounds") {
  chance::ChanceParams cp{0.95, 5.0, chance::ChanceMode::PaperLiteral};

  // sigma = 0 collapses the quantile term for any alpha
  const auto b0 = chance::det_equiv_bounds(12.0, 8.0, 0.0, 0.0, cp);
  CHECK(b0.lower == doctest::Approx(15.0));
  CHECK(b0.upper == doctest::Approx(25.0));

  // frozen via the quantile oracle: sqrt(2)*(-0.0627067779...)
  const auto b1 = chance::det_equiv_bounds(12.0, 8.0, 1.0, 1.0, cp);
  CHECK(std::abs(b1.lower - 15.0886810) < 1e-6);
  CHECK(std::abs(b1.upper - 24.9113190) < 1e-6);

  const auto b2 = chance::det_equiv_bounds(0.0, 0.0, 3.0, 4.0, cp);
  CHECK(std::abs(b2.lower - (-4.6864660)) < 1e-6);
  CHECK(std::abs(b2.upper - 4.6864660) < 1e-6);
}

TEST_CASE("band width identity") {
  chance::ChanceParams cp{0.95, 5.0, chance::ChanceMode::PaperLiteral};
  Rng rng(41);
  for (int i = 0; i < 50; ++i) {
    const double sx = rng.uniform(0.1, 3.0), sy = rng.uniform(0.1, 3.0);
    const double mx = rng.uniform(-20, 60), my = rng.uniform(-20, 60);
    const auto b = chance::det_equiv_bounds(mx, my, sx, sy, cp);
    const double sigma = std::hypot(sx, sy);
    const double want = 2.0 * cp.d_min -
                        2.0 * sigma * chance::normal_quantile(1.0 - cp.alpha / 2);
    CHECK(b.upper - b.lower == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("monte carlo satisfaction estimates") {
  chance::ChanceParams cp{0.95, 5.0, chance::ChanceMode::PaperLiteral};

  SUBCASE("wide gap is certain") {
    chance::TargetModel tm;
    tm.mu_x = VectorXd::Constant(3, 10.0);
    tm.mu_y = VectorXd::Constant(3, 5.0);
    tm.sigma_x = 0.07;
    tm.sigma_y = 0.07;
    const VectorXd ego = VectorXd::Constant(3, 5.0);  // gap sum = 10
    const auto est = chance::chance_satisfaction_mc(ego, tm, cp, 2000, 1);
    CHECK(est.horizon_min == doctest::Approx(1.0));
  }

  SUBCASE("zero gap, sigma 1: 2*Phi(-5/sqrt(2))") {
    chance::TargetModel tm;
    tm.mu_x = VectorXd::Constant(2, 30.0);
    tm.mu_y = VectorXd::Constant(2, 20.0);
    tm.sigma_x = 1.0;
    tm.sigma_y = 1.0;
    const VectorXd ego = VectorXd::Constant(2, 50.0);
    const int n = 100000;
    const auto est = chance::chance_satisfaction_mc(ego, tm, cp, n, 7);
    const double p_true = 2.0 * oracles::normal_cdf(-5.0 / std::sqrt(2.0));
    const double se = std::sqrt(p_true * (1.0 - p_true) / n);
    CHECK(std::abs(est.per_node(0) - p_true) <= 3.0 * se + 1e-12);
    CHECK(std::abs(est.per_node(1) - p_true) <= 3.0 * se + 1e-12);
  }

  SUBCASE("degenerate point mass inside the band") {
    chance::TargetModel tm;
    tm.mu_x = VectorXd::Constant(1, 4.9);
    tm.mu_y = VectorXd::Constant(1, 0.0);
    tm.sigma_x = 0.0;
    tm.sigma_y = 0.0;
    const VectorXd ego = VectorXd::Zero(1);
    const auto est = chance::chance_satisfaction_mc(ego, tm, cp, 1000, 3);
    CHECK(est.per_node(0) == doctest::Approx(0.0));
  }

  SUBCASE("grid mismatch throws") {
    chance::TargetModel tm;
    tm.mu_x = VectorXd::Zero(3);
    tm.mu_y = VectorXd::Zero(4);
    CHECK_THROWS_AS(
        chance::chance_satisfaction_mc(VectorXd::Zero(3), tm, cp, 1000, 1),
        std::invalid_argument);
  }
}

TEST_CASE("mc estimates are deterministic per seed and converge") {
  chance::ChanceParams cp{0.95, 5.0, chance::ChanceMode::PaperLiteral};
  chance::TargetModel tm;
  tm.mu_x = VectorXd::Constant(4, 25.0);
  tm.mu_y = VectorXd::Constant(4, 12.0);
  tm.sigma_x = 1.0;
  tm.sigma_y = 1.0;
  VectorXd ego(4);
  ego << 30.0, 31.0, 32.5, 34.0;

  const auto a = chance::chance_satisfaction_mc(ego, tm, cp, 5000, 99);
  const auto b = chance::chance_satisfaction_mc(ego, tm, cp, 5000, 99);
  CHECK(a.per_node.isApprox(b.per_node, 0.0));

  const auto n1 = chance::chance_satisfaction_mc(ego, tm, cp, 4000, 5);
  const auto n2 = chance::chance_satisfaction_mc(ego, tm, cp, 8000, 5);
  for (int i = 0; i < 4; ++i)
    CHECK(std::abs(n1.per_node(i) - n2.per_node(i)) <=
          4.0 / std::sqrt(4000.0));
}

TEST_CASE("mc satisfaction is monotone in the gap magnitude") {
  chance::ChanceParams cp{0.95, 5.0, chance::ChanceMode::PaperLiteral};
  const int n = 100000;
  double prev = -1.0;
  for (int g = 0; g <= 10; ++g) {
    chance::TargetModel tm;
    tm.mu_x = VectorXd::Constant(1, 50.0 + g);
    tm.mu_y = VectorXd::Constant(1, 20.0);
    tm.sigma_x = 1.0;
    tm.sigma_y = 1.0;
    const VectorXd ego = VectorXd::Constant(1, 70.0);
    // common random numbers across the gap grid
    const auto est = chance::chance_satisfaction_mc(ego, tm, cp, n, 1234);
    CHECK(est.per_node(0) >= prev);
    prev = est.per_node(0);
  }
}

TEST_CASE("separation bound one-sided guarantee") {
  chance::ChanceParams cp{0.95, 5.0, chance::ChanceMode::Separation};
  const double ub = chance::separation_upper_bound(40.0, 20.0, 1.0, 1.0, cp);
  // mu_sum - d_min + sigma * F^-1(0.05)
  const double want =
      60.0 - 5.0 + std::sqrt(2.0) * oracles::normal_quantile(0.05);
  CHECK(ub == doctest::Approx(want).epsilon(1e-9));

  // an ego riding the bound satisfies the chance constraint at level alpha
  chance::TargetModel tm;
  tm.mu_x = VectorXd::Constant(1, 40.0);
  tm.mu_y = VectorXd::Constant(1, 20.0);
  tm.sigma_x = 1.0;
  tm.sigma_y = 1.0;
  const auto est = chance::chance_satisfaction_mc(VectorXd::Constant(1, ub),
                                                  tm, cp, 200000, 8);
  CHECK(est.per_node(0) >= 0.95 - 3.0 * std::sqrt(0.05 * 0.95 / 200000.0));
}
