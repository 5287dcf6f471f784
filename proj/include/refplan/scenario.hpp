#ifndef REFPLAN_SCENARIO_HPP
#define REFPLAN_SCENARIO_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "refplan/chance.hpp"
#include "refplan/geometry.hpp"
#include "refplan/grid.hpp"
#include "refplan/vehicle.hpp"

namespace refplan::scenario {

// A full problem instance: road, limits, weights, target motion model,
// chance parameters, initial state and horizon.
struct Scenario {
  std::uint64_t id = 0;  // generator seed; not serialized
  geom::LanePtr lane;
  geom::RoadBounds bounds;
  vehicle::Limits limits;
  vehicle::Weights weights;
  chance::TargetModel target;  // dense samples, uniform over [0, horizon_T]
  chance::ChanceParams chance;
  vehicle::EgoState z_init;
  double horizon_T = 50.0;
  double p_eps = 1.0;  // m^2, potential-field smoothing
};

// One noisy measurement sequence of the target positions on a grid.
struct Realization {
  std::uint64_t scenario_id = 0;
  std::uint64_t seed = 0;
  Eigen::VectorXd x;  // per node
  Eigen::VectorXd y;
};

// Validation failure carrying the offending JSON path (e.g. "limits.v_r").
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Throws ScenarioError on any invariant breach.
void validate_scenario(const Scenario& sc);

// Urban family: Table-1 limits, lane drawn from {straight, bend, winding},
// target leading by 10-40 m at 8-14 m/s with a piecewise-constant
// acceleration profile. Deterministic per seed.
Scenario make_urban_scenario(std::uint64_t variant_seed);
Scenario make_urban_scenario(std::uint64_t variant_seed, double horizon_T);

// The risky instance: v_r = 14 m/s, initial gap 12 m, target braking from
// 10 to 6 m/s mid-horizon.
Scenario make_risky_scenario(std::uint64_t seed);

// High-speed family for the feasibility study; v_r in {22, 36} m/s and
// omega_max in {pi/6, pi/4, pi/2} rad/s.
Scenario make_highspeed_scenario(double v_r, double omega_max,
                                 std::uint64_t seed);

// Fixed benign urban instance used as the single-solve benchmark.
Scenario make_nominal_scenario();

// Target means evaluated at the grid node times (linear interpolation of the
// stored samples).
chance::TargetModel sample_target_on_grid(const Scenario& sc,
                                          const TimeGrid& grid);

// Per-node noisy measurements (mu + sigma * xi); deterministic per seed.
Realization realize_measurements(const Scenario& sc, const TimeGrid& grid,
                                 std::uint64_t seed);

nlohmann::json to_json(const Scenario& sc);
Scenario scenario_from_json(const nlohmann::json& j);
// Canonical serialization: sorted keys, shortest round-trip numbers,
// byte-stable across runs.
std::string canonical_json(const Scenario& sc);
Scenario load_scenario_file(const std::string& path);

}  // namespace refplan::scenario

#endif  // REFPLAN_SCENARIO_HPP
