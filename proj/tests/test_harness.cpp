#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "refplan/harness.hpp"

using namespace refplan;
using Eigen::VectorXd;

namespace {

transcribe::EgoTrajectory flat_traj(int m, double gap_x) {
  transcribe::EgoTrajectory traj;
  traj.grid = TimeGrid{double(m - 1), m};
  traj.states.resize(m);
  traj.controls.resize(m);
  traj.jerks = VectorXd::Zero(m - 1);
  for (int i = 0; i < m; ++i) {
    traj.states[i] = vehicle::EgoState{10.0 * i, 0.0, 0.0, 10.0};
    traj.controls[i] = vehicle::ControlInput{0.0, 0.0};
  }
  (void)gap_x;
  return traj;
}

}  // namespace

TEST_CASE("count_violations margins and counts") {
  const int m = 8;
  auto traj = flat_traj(m, 10.0);
  VectorXd tx(m), ty(m);
  for (int i = 0; i < m; ++i) {
    tx(i) = traj.states[i].x + 10.0;  // K = 10 everywhere
    ty(i) = 0.0;
  }
  auto rep = harness::count_violations(traj, tx, ty, 5.0);
  CHECK(rep.violation_count == 0);
  CHECK(rep.margins.maxCoeff() == doctest::Approx(-5.0));
  CHECK(rep.valid_proportion == doctest::Approx(1.0));

  tx(3) = traj.states[3].x + 4.9;  // one node inside d_min
  rep = harness::count_violations(traj, tx, ty, 5.0);
  CHECK(rep.violation_count == 1);
  CHECK(rep.valid_proportion == doctest::Approx(1.0 - 1.0 / m));

  for (int i = 0; i < m; ++i) tx(i) = traj.states[i].x + 1.0;
  rep = harness::count_violations(traj, tx, ty, 5.0);
  CHECK(rep.violation_count == m);
  CHECK(rep.valid_proportion == doctest::Approx(0.0));
}

TEST_CASE("count_violations kinematic aggregates and grid mismatch") {
  auto traj = flat_traj(5, 10.0);
  traj.controls[2].a = -2.0;
  traj.controls[4].omega = 0.4;
  VectorXd tx(5), ty(5);
  for (int i = 0; i < 5; ++i) {
    tx(i) = traj.states[i].x + 20.0;
    ty(i) = 0.0;
  }
  const auto rep = harness::count_violations(traj, tx, ty, 5.0);
  CHECK(rep.avg_speed == doctest::Approx(10.0));
  CHECK(rep.avg_accel_mag == doctest::Approx(2.0 / 5.0));
  CHECK(rep.avg_ang_vel_mag == doctest::Approx(0.4 / 5.0));
  CHECK(rep.avg_gap == doctest::Approx(20.0));

  CHECK_THROWS_AS(harness::count_violations(traj, VectorXd::Zero(4),
                                            VectorXd::Zero(4), 5.0),
                  std::invalid_argument);
}

TEST_CASE("alpha validation flags") {
  harness::ExperimentSummary s;
  s.grid = TimeGrid{10.0, 10};
  for (int i = 0; i < 4; ++i) {
    harness::RunRecord r;
    r.run_id = i;
    r.model = harness::ModelKind::ContinuousStochastic;
    r.status = "converged";
    r.report.margins = VectorXd::Zero(10);
    r.report.violation_count = i;  // 0..3 of 10 nodes
    r.report.valid_proportion = 1.0 - i / 10.0;
    s.runs.push_back(r);
  }
  const auto av = harness::alpha_validation(
      s, 0.95, harness::ModelKind::ContinuousStochastic);
  CHECK(av.n_runs == 4);
  CHECK(av.n_meeting == 1);  // only the zero-violation run reaches 0.95
  CHECK(av.fraction_meeting == doctest::Approx(0.25));
  CHECK(av.mean_proportion == doctest::Approx((1.0 + 0.9 + 0.8 + 0.7) / 4));

  // a run with no violations trivially meets any alpha
  CHECK(s.runs[0].report.valid_proportion >= 0.95);
}

TEST_CASE("runs csv round trip") {
  harness::ExperimentSummary s;
  s.experiment = "exp1";
  s.grid = TimeGrid{20.0, 5};
  for (int i = 0; i < 6; ++i) {
    harness::RunRecord r;
    r.run_id = i;
    r.model = (i % 2 == 0) ? harness::ModelKind::ContinuousStochastic
                           : harness::ModelKind::DiscreteStochastic;
    r.scenario_seed = 1000 + i;
    r.noise_seed = 2000 + i;
    r.status = "converged";
    r.report.margins = VectorXd::Constant(5, -3.25 + 0.001 * i);
    r.report.violation_count = i % 3;
    r.report.valid_proportion = 1.0 - (i % 3) / 5.0;
    r.report.avg_speed = 11.7320508 + i;
    r.report.avg_accel_mag = 0.123456789 * i;
    r.report.avg_ang_vel_mag = 1e-17 * i;
    r.report.avg_gap = 17.25 + 1e-9 * i;
    r.report.wall_time = 0.5 + i;
    s.runs.push_back(r);
  }
  const std::string path = "/tmp/refplan_test_runs.csv";
  harness::write_runs_csv(path, s);
  const auto rows = harness::read_runs_csv(path);
  REQUIRE(rows.size() == s.runs.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].run_id == s.runs[i].run_id);
    CHECK(rows[i].model == harness::model_name(s.runs[i].model));
    CHECK(rows[i].scenario_seed == s.runs[i].scenario_seed);
    CHECK(rows[i].noise_seed == s.runs[i].noise_seed);
    CHECK(rows[i].violations == s.runs[i].report.violation_count);
    CHECK(rows[i].valid_proportion == s.runs[i].report.valid_proportion);
    CHECK(rows[i].avg_speed == s.runs[i].report.avg_speed);
    CHECK(rows[i].avg_accel == s.runs[i].report.avg_accel_mag);
    CHECK(rows[i].avg_ang_vel == s.runs[i].report.avg_ang_vel_mag);
    CHECK(rows[i].avg_gap == s.runs[i].report.avg_gap);
    CHECK(rows[i].wall_time_s == s.runs[i].report.wall_time);
  }
  std::remove(path.c_str());
}

TEST_CASE("aggregates are permutation invariant over run order") {
  harness::ExperimentSummary a, b;
  a.grid = b.grid = TimeGrid{10.0, 4};
  for (int i = 0; i < 10; ++i) {
    harness::RunRecord r;
    r.run_id = i;
    r.model = harness::ModelKind::ContinuousStochastic;
    r.status = "converged";
    r.report.margins = VectorXd::Zero(4);
    r.report.violation_count = (i * 7) % 4;
    r.report.valid_proportion = 1.0 - r.report.violation_count / 4.0;
    a.runs.push_back(r);
  }
  b.runs = a.runs;
  std::reverse(b.runs.begin(), b.runs.end());
  CHECK(a.mean_violations(harness::ModelKind::ContinuousStochastic) ==
        doctest::Approx(b.mean_violations(harness::ModelKind::ContinuousStochastic)));
  CHECK(a.violation_histogram(harness::ModelKind::ContinuousStochastic) ==
        b.violation_histogram(harness::ModelKind::ContinuousStochastic));
}

TEST_CASE("format_double is shortest round trip") {
  for (double v : {0.1, 1.0 / 3.0, 12.0, 1e-17, 3.141592653589793, -2.5e8}) {
    const std::string s = harness::format_double(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(harness::format_double(0.5) == "0.5");
  CHECK(harness::format_double(12.0) == "12");
}

TEST_CASE("parallel_for covers every index exactly once") {
  std::vector<int> hits(1000, 0);
  harness::parallel_for(1000, 8, [&](int i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  harness::parallel_for(0, 4, [&](int) { CHECK(false); });
}
