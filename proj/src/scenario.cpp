#include "refplan/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "refplan/rng.hpp"

namespace refplan::scenario {

namespace {

constexpr double kPi = std::numbers::pi;

// Piecewise-linear speed profile (piecewise-constant acceleration).
struct SpeedProfile {
  std::vector<double> t;  // increasing, t[0] == 0
  std::vector<double> v;

  double speed(double time) const {
    if (time <= t.front()) return v.front();
    for (std::size_t i = 1; i < t.size(); ++i) {
      if (time <= t[i]) {
        const double f = (time - t[i - 1]) / (t[i] - t[i - 1]);
        return v[i - 1] + f * (v[i] - v[i - 1]);
      }
    }
    return v.back();
  }

  double distance(double time) const {  // integral of speed over [0, time]
    double s = 0.0, prev_t = t.front(), prev_v = v.front();
    for (std::size_t i = 1; i < t.size() && prev_t < time; ++i) {
      const double seg_end = std::min(t[i], time);
      const double v_end = speed(seg_end);
      s += 0.5 * (prev_v + v_end) * (seg_end - prev_t);
      prev_t = seg_end;
      prev_v = v_end;
    }
    if (time > prev_t) s += v.back() * (time - prev_t);
    return s;
  }
};

// Knots along a heading walk: sections of (length, curvature) traversed with
// small steps, producing a gentle C1 spline lane.
geom::LanePtr walk_lane(const Eigen::Vector2d& origin, double heading,
                        const std::vector<std::pair<double, double>>& sections,
                        double knot_spacing) {
  std::vector<Eigen::Vector2d> knots;
  Eigen::Vector2d pos = origin;
  double h = heading;
  knots.push_back(pos);
  double since_knot = 0.0;
  const double ds = 2.0;
  for (const auto& [len, kappa] : sections) {
    if (len < 1.0) continue;
    int steps = std::max(1, static_cast<int>(std::round(len / ds)));
    const double step = len / steps;
    for (int i = 0; i < steps; ++i) {
      pos += step * Eigen::Vector2d(std::cos(h), std::sin(h));
      h += kappa * step;
      since_knot += step;
      if (since_knot >= knot_spacing) {
        knots.push_back(pos);
        since_knot = 0.0;
      }
    }
  }
  if (since_knot > 0.25 * knot_spacing)
    knots.push_back(pos);
  return std::make_shared<geom::CenterLane>(
      geom::CenterLane::spline(std::move(knots)));
}

chance::TargetModel sample_target(const geom::CenterLane& lane, double s0,
                                  const SpeedProfile& profile, double T,
                                  double sigma_x, double sigma_y) {
  const int n = static_cast<int>(std::round(4.0 * T)) + 1;
  chance::TargetModel tm;
  tm.mu_x.resize(n);
  tm.mu_y.resize(n);
  tm.sigma_x = sigma_x;
  tm.sigma_y = sigma_y;
  for (int k = 0; k < n; ++k) {
    const double t = T * k / (n - 1);
    const double s = std::min(s0 + profile.distance(t), lane.length());
    const Eigen::Vector2d p = lane.point(s);
    tm.mu_x(k) = p.x();
    tm.mu_y(k) = p.y();
  }
  return tm;
}

vehicle::EgoState ego_at_lane_start(const geom::CenterLane& lane, double v) {
  const Eigen::Vector2d p = lane.point(0.0);
  return vehicle::EgoState{p.x(), p.y(), lane.heading(0.0), v};
}

}  // namespace

void validate_scenario(const Scenario& sc) {
  if (!sc.lane) throw ScenarioError("lane", "missing lane");
  if (!(sc.bounds.half_width > 0.0))
    throw ScenarioError("bounds.half_width", "must be > 0");
  if (sc.bounds.safety_margin < 0.0 ||
      sc.bounds.safety_margin >= sc.bounds.half_width)
    throw ScenarioError("bounds.safety_margin",
                        "must be in [0, half_width)");
  const auto& L = sc.limits;
  if (!(L.v_max > 0.0)) throw ScenarioError("limits.v_max", "must be > 0");
  if (!(L.v_r > 0.0) || L.v_r > L.v_max)
    throw ScenarioError("limits.v_r", "must be in (0, v_max]");
  if (!(L.omega_max > 0.0))
    throw ScenarioError("limits.omega_max", "must be > 0");
  if (!(L.a_max > 0.0)) throw ScenarioError("limits.a_max", "must be > 0");
  if (!(L.j_max > 0.0)) throw ScenarioError("limits.j_max", "must be > 0");
  if (!(L.d_min > 0.0)) throw ScenarioError("limits.d_min", "must be > 0");
  const auto& w = sc.weights;
  const double wsum =
      w.w_g + w.w_v + w.w_a + w.w_omega + w.w_j + w.w_h + w.w_p;
  if (w.w_g < 0 || w.w_v < 0 || w.w_a < 0 || w.w_omega < 0 || w.w_j < 0 ||
      w.w_h < 0 || w.w_p < 0 || !(wsum > 0.0))
    throw ScenarioError("weights", "must be >= 0 with at least one positive");
  if (!(sc.chance.alpha > 0.5 && sc.chance.alpha < 1.0))
    throw ScenarioError("chance.alpha", "must lie in (0.5, 1)");
  if (!(sc.horizon_T > 0.0)) throw ScenarioError("horizon_T", "must be > 0");
  if (!(sc.p_eps > 0.0)) throw ScenarioError("p_eps", "must be > 0");
  if (sc.target.mu_x.size() < 2 ||
      sc.target.mu_x.size() != sc.target.mu_y.size())
    throw ScenarioError("target.mu_x", "needs >= 2 samples matching mu_y");
  if (sc.target.sigma_x < 0.0)
    throw ScenarioError("target.sigma_x", "must be >= 0");
  if (sc.target.sigma_y < 0.0)
    throw ScenarioError("target.sigma_y", "must be >= 0");
  const auto& z = sc.z_init;
  if (!std::isfinite(z.x) || !std::isfinite(z.y) || !std::isfinite(z.theta) ||
      !std::isfinite(z.v) || z.x < 0.0 || z.y < 0.0 || z.v < 0.0)
    throw ScenarioError("z_init", "components must be finite with x, y, v >= 0");
  const double off = sc.lane->lateral_offset({z.x, z.y});
  if (std::abs(off) > sc.bounds.half_width - sc.bounds.safety_margin + 1e-9)
    throw ScenarioError("z_init", "initial position outside the road corridor");
}

Scenario make_urban_scenario(std::uint64_t variant_seed) {
  return make_urban_scenario(variant_seed, 50.0);
}

Scenario make_urban_scenario(std::uint64_t variant_seed, double horizon_T) {
  Rng rng(mix_seed(variant_seed, 0x1));
  Scenario sc;
  sc.id = variant_seed;
  sc.horizon_T = horizon_T;
  sc.limits = vehicle::Limits{40.0, kPi / 6.0, 3.0, 0.6, 5.0, 12.0};
  sc.weights = vehicle::Weights{};  // equal weights
  sc.bounds = geom::RoadBounds{3.5, 0.5};
  sc.chance = chance::ChanceParams{0.95, 5.0, chance::ChanceMode::Separation};
  sc.p_eps = 1.0;

  const double lane_len = sc.limits.v_r * horizon_T * 1.3 + 200.0;
  const Eigen::Vector2d origin(rng.uniform(5.0, 30.0), rng.uniform(15.0, 40.0));
  // headings confined to keep the coordinate-sum separation measure
  // nondegenerate (cos h + sin h bounded away from zero)
  const double h0 = rng.uniform(0.0, kPi / 3.0);

  const int kind = rng.uniform_int(0, 2);
  if (kind == 0) {
    sc.lane = std::make_shared<geom::CenterLane>(
        geom::CenterLane::straight(origin, h0, lane_len));
  } else if (kind == 1) {
    // single bend of radius 50-200 m between straight runs; turn direction
    // chosen to keep the heading inside the cone
    const double r = rng.uniform(50.0, 200.0);
    const double head_lo = -kPi / 12.0, head_hi = kPi / 2.5;
    bool left = rng.uniform() < 0.5;
    double room = left ? head_hi - h0 : h0 - head_lo;
    if (room < 0.3) {
      left = !left;
      room = left ? head_hi - h0 : h0 - head_lo;
    }
    const double sweep = rng.uniform(0.25, std::min(0.8, room));
    const double pre = rng.uniform(120.0, 260.0);
    const double arc_len = sweep * r;
    const double post = std::max(60.0, lane_len - pre - arc_len);
    sc.lane = walk_lane(origin, h0,
                        {{pre, 0.0},
                         {arc_len, (left ? 1.0 : -1.0) / r},
                         {post, 0.0}},
                        std::clamp(0.3 * r, 8.0, 40.0));
  } else {
    // winding lane: alternating gentle curvature sections
    std::vector<std::pair<double, double>> sections;
    double remaining = lane_len;
    double heading = h0;
    double dir = rng.uniform() < 0.5 ? 1.0 : -1.0;
    while (remaining > 0.0) {
      const double len = rng.uniform(140.0, 260.0);
      const double r = rng.uniform(180.0, 450.0);
      double sweep = dir * len / r;
      if (heading + sweep > kPi / 2.5 || heading + sweep < -kPi / 12.0) {
        dir = -dir;
        sweep = -sweep;
      }
      sections.push_back({std::min(len, remaining), dir / r});
      heading += sweep;
      remaining -= len;
      dir = -dir;
    }
    sc.lane = walk_lane(origin, h0, sections, 40.0);
  }

  // leading target: initial gap 10-40 m, initial speed 8-14 m/s, then either
  // a braking event (only with room to spare) or settling toward the flow
  const double gap0 = rng.uniform(10.0, 40.0);
  const double v0 = rng.uniform(8.0, 14.0);
  SpeedProfile prof;
  if (rng.uniform() < 0.3 && gap0 >= 14.0) {
    const double t_brake = rng.uniform(5.0, 0.4 * horizon_T);
    const double v1 = std::max(3.0, v0 - rng.uniform(2.0, 5.0));
    const double dur = std::max(2.0, (v0 - v1) / 0.8);
    prof.t = {0.0, t_brake, t_brake + dur};
    prof.v = {v0, v0, v1};
  } else {
    const double v_flow = rng.uniform(11.5, 14.0);
    const double t_settle = rng.uniform(4.0, 14.0);
    const double dur = std::max(2.0, std::abs(v_flow - v0) / 0.5);
    prof.t = {0.0, t_settle, t_settle + dur};
    prof.v = {v0, v0, v_flow};
  }
  sc.target = sample_target(*sc.lane, gap0, prof, horizon_T, 1.0, 1.0);
  // a driver this close to a slower car is not still at cruise speed; keep
  // the pinned initial state compatible with the separation constraint
  const double v_ego0 =
      std::min(sc.limits.v_r, v0 + 0.25 * std::max(0.0, gap0 - 10.0));
  sc.z_init = ego_at_lane_start(*sc.lane, v_ego0);
  validate_scenario(sc);
  return sc;
}

Scenario make_risky_scenario(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x2));
  Scenario sc;
  sc.id = seed;
  sc.horizon_T = 50.0;
  sc.limits = vehicle::Limits{40.0, kPi / 6.0, 3.0, 0.6, 5.0, 14.0};
  sc.weights = vehicle::Weights{};
  sc.bounds = geom::RoadBounds{3.5, 0.5};
  sc.chance = chance::ChanceParams{0.95, 5.0, chance::ChanceMode::Separation};
  sc.p_eps = 1.0;

  const Eigen::Vector2d origin(rng.uniform(5.0, 15.0), rng.uniform(15.0, 30.0));
  const double lane_len = sc.limits.v_r * sc.horizon_T * 1.3 + 200.0;
  sc.lane = std::make_shared<geom::CenterLane>(
      geom::CenterLane::straight(origin, 0.0, lane_len));

  // lead car brakes from 10 to 6 m/s mid-horizon while the ego wants 14 m/s
  const double t_brake = 0.35 * sc.horizon_T;
  SpeedProfile prof;
  prof.t = {0.0, t_brake, t_brake + 4.0};
  prof.v = {10.0, 10.0, 6.0};
  sc.target = sample_target(*sc.lane, 12.0, prof, sc.horizon_T, 1.0, 1.0);
  sc.z_init = ego_at_lane_start(*sc.lane, 10.0);
  validate_scenario(sc);
  return sc;
}

Scenario make_highspeed_scenario(double v_r, double omega_max,
                                 std::uint64_t seed) {
  const bool vr_ok = std::abs(v_r - 22.0) < 1e-9 || std::abs(v_r - 36.0) < 1e-9;
  const bool om_ok = std::abs(omega_max - kPi / 6.0) < 1e-9 ||
                     std::abs(omega_max - kPi / 4.0) < 1e-9 ||
                     std::abs(omega_max - kPi / 2.0) < 1e-9;
  if (!vr_ok)
    throw std::domain_error("high-speed v_r must be 22 or 36 m/s");
  if (!om_ok)
    throw std::domain_error("high-speed omega_max must be pi/6, pi/4 or pi/2");

  Rng rng(mix_seed(seed, 0x3));
  Scenario sc;
  sc.id = seed;
  sc.horizon_T = 120.0;
  sc.limits = vehicle::Limits{std::max(40.0, 1.4 * v_r), omega_max, 3.0, 0.6,
                              5.0, v_r};
  sc.weights = vehicle::Weights{};
  sc.bounds = geom::RoadBounds{6.0, 0.5};
  sc.chance = chance::ChanceParams{0.95, 5.0, chance::ChanceMode::Separation};
  sc.p_eps = 1.0;

  const double lane_len = v_r * sc.horizon_T * 1.25 + 300.0;
  const Eigen::Vector2d origin(rng.uniform(10.0, 40.0), rng.uniform(20.0, 60.0));
  const double h0 = rng.uniform(0.05, kPi / 3.5);

  // winding road; bends tighten as omega_max grows
  std::vector<std::pair<double, double>> sections;
  double remaining = lane_len;
  double heading = h0;
  double dir = rng.uniform() < 0.5 ? 1.0 : -1.0;
  double r_min_used = std::numeric_limits<double>::infinity();
  sections.push_back({rng.uniform(200.0, 400.0), 0.0});
  remaining -= sections.back().first;
  while (remaining > 0.0) {
    const double r = rng.uniform(2.0, 4.0) * v_r / omega_max;
    r_min_used = std::min(r_min_used, r);
    const double len = rng.uniform(0.35, 0.7) * r;
    double sweep = dir * len / r;
    if (heading + sweep > kPi / 2.5 || heading + sweep < -kPi / 12.0) {
      dir = -dir;
      sweep = -sweep;
    }
    sections.push_back({std::min(len, remaining), dir / r});
    heading += sweep;
    remaining -= len;
    if (remaining <= 0.0) break;
    const double straight = rng.uniform(150.0, 350.0);
    sections.push_back({std::min(straight, remaining), 0.0});
    remaining -= straight;
    dir = -dir;
  }
  sc.lane = walk_lane(origin, h0, sections,
                      std::clamp(0.3 * r_min_used, 8.0, 45.0));

  const double gap0 = rng.uniform(30.0, 80.0);
  const double v0 = v_r * rng.uniform(0.85, 1.15);
  const double v1 = v_r * rng.uniform(0.85, 1.15);
  SpeedProfile prof;
  const double t_shift = rng.uniform(10.0, 50.0);
  prof.t = {0.0, t_shift, t_shift + std::max(4.0, std::abs(v1 - v0) / 0.4)};
  prof.v = {v0, v0, v1};
  sc.target = sample_target(*sc.lane, gap0, prof, sc.horizon_T, 1.0, 1.0);
  sc.z_init = ego_at_lane_start(*sc.lane, std::min(v_r, v0));
  validate_scenario(sc);
  return sc;
}

Scenario make_nominal_scenario() {
  Scenario sc;
  sc.id = 0;
  sc.horizon_T = 50.0;
  sc.limits = vehicle::Limits{40.0, kPi / 6.0, 3.0, 0.6, 5.0, 12.0};
  sc.weights = vehicle::Weights{};
  sc.bounds = geom::RoadBounds{3.5, 0.5};
  sc.chance = chance::ChanceParams{0.95, 5.0, chance::ChanceMode::Separation};
  sc.p_eps = 1.0;
  sc.lane = walk_lane({10.0, 25.0}, 0.1,
                      {{220.0, 0.0}, {90.0, 1.0 / 150.0}, {700.0, 0.0}}, 40.0);
  SpeedProfile prof;
  prof.t = {0.0, 50.0};
  prof.v = {11.5, 11.5};
  sc.target = sample_target(*sc.lane, 25.0, prof, sc.horizon_T, 1.0, 1.0);
  sc.z_init = ego_at_lane_start(*sc.lane, sc.limits.v_r);
  validate_scenario(sc);
  return sc;
}

chance::TargetModel sample_target_on_grid(const Scenario& sc,
                                          const TimeGrid& grid) {
  grid.validate();
  const auto n = sc.target.mu_x.size();
  const double dt_s = sc.horizon_T / static_cast<double>(n - 1);
  chance::TargetModel tm;
  tm.sigma_x = sc.target.sigma_x;
  tm.sigma_y = sc.target.sigma_y;
  tm.mu_x.resize(grid.nodes_M);
  tm.mu_y.resize(grid.nodes_M);
  for (int i = 0; i < grid.nodes_M; ++i) {
    const double t = grid.time(i);
    const double pos = std::clamp(t / dt_s, 0.0, static_cast<double>(n - 1));
    const auto k = std::min<Eigen::Index>(static_cast<Eigen::Index>(pos), n - 2);
    const double f = pos - static_cast<double>(k);
    tm.mu_x(i) = (1.0 - f) * sc.target.mu_x(k) + f * sc.target.mu_x(k + 1);
    tm.mu_y(i) = (1.0 - f) * sc.target.mu_y(k) + f * sc.target.mu_y(k + 1);
  }
  return tm;
}

Realization realize_measurements(const Scenario& sc, const TimeGrid& grid,
                                 std::uint64_t seed) {
  const chance::TargetModel tm = sample_target_on_grid(sc, grid);
  Rng rng(mix_seed(seed, 0x9));
  Realization r;
  r.scenario_id = sc.id;
  r.seed = seed;
  r.x.resize(grid.nodes_M);
  r.y.resize(grid.nodes_M);
  for (int i = 0; i < grid.nodes_M; ++i) {
    r.x(i) = tm.mu_x(i) + tm.sigma_x * rng.normal();
    r.y(i) = tm.mu_y(i) + tm.sigma_y * rng.normal();
  }
  return r;
}

nlohmann::json to_json(const Scenario& sc) {
  nlohmann::json j;
  nlohmann::json lane;
  switch (sc.lane->kind()) {
    case geom::LaneKind::Straight:
      lane["kind"] = "straight";
      lane["params"] = {{"origin", {sc.lane->origin().x(), sc.lane->origin().y()}},
                        {"heading", sc.lane->heading0()},
                        {"length", sc.lane->length()}};
      break;
    case geom::LaneKind::Arc:
      lane["kind"] = "arc";
      lane["params"] = {{"origin", {sc.lane->origin().x(), sc.lane->origin().y()}},
                        {"heading", sc.lane->heading0()},
                        {"radius", sc.lane->radius()},
                        {"length", sc.lane->length()}};
      break;
    case geom::LaneKind::PiecewiseSpline: {
      lane["kind"] = "spline";
      nlohmann::json knots = nlohmann::json::array();
      for (const auto& k : sc.lane->knots()) knots.push_back({k.x(), k.y()});
      lane["params"] = {{"knots", knots}};
      break;
    }
  }
  j["lane"] = lane;
  j["bounds"] = {{"half_width", sc.bounds.half_width},
                 {"safety_margin", sc.bounds.safety_margin}};
  j["limits"] = {{"v_r", sc.limits.v_r},       {"v_max", sc.limits.v_max},
                 {"omega_max", sc.limits.omega_max}, {"a_max", sc.limits.a_max},
                 {"j_max", sc.limits.j_max},   {"d_min", sc.limits.d_min}};
  j["weights"] = {{"w_g", sc.weights.w_g},     {"w_v", sc.weights.w_v},
                  {"w_a", sc.weights.w_a},     {"w_omega", sc.weights.w_omega},
                  {"w_j", sc.weights.w_j},     {"w_h", sc.weights.w_h},
                  {"w_p", sc.weights.w_p}};
  j["target"] = {
      {"mu_x", std::vector<double>(sc.target.mu_x.begin(), sc.target.mu_x.end())},
      {"mu_y", std::vector<double>(sc.target.mu_y.begin(), sc.target.mu_y.end())},
      {"sigma_x", sc.target.sigma_x},
      {"sigma_y", sc.target.sigma_y}};
  j["chance"] = {{"alpha", sc.chance.alpha},
                 {"mode", sc.chance.mode == chance::ChanceMode::Separation
                              ? "separation"
                              : "paper"}};
  j["z_init"] = {sc.z_init.x, sc.z_init.y, sc.z_init.theta, sc.z_init.v};
  j["horizon_T"] = sc.horizon_T;
  j["p_eps"] = sc.p_eps;
  return j;
}

namespace {

template <typename T>
T field(const nlohmann::json& j, const std::string& path) {
  const nlohmann::json* cur = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (!cur->contains(key))
      throw ScenarioError(path, "missing field");
    cur = &(*cur)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  try {
    return cur->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ScenarioError(path, "wrong type");
  }
}

}  // namespace

Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario sc;
  const std::string kind = field<std::string>(j, "lane.kind");
  const nlohmann::json params =
      field<nlohmann::json>(j, "lane.params");
  try {
    if (kind == "straight") {
      const auto o = params.at("origin").get<std::vector<double>>();
      sc.lane = std::make_shared<geom::CenterLane>(geom::CenterLane::straight(
          {o.at(0), o.at(1)}, params.at("heading").get<double>(),
          params.at("length").get<double>()));
    } else if (kind == "arc") {
      const auto o = params.at("origin").get<std::vector<double>>();
      sc.lane = std::make_shared<geom::CenterLane>(geom::CenterLane::arc(
          {o.at(0), o.at(1)}, params.at("heading").get<double>(),
          params.at("radius").get<double>(), params.at("length").get<double>()));
    } else if (kind == "spline") {
      std::vector<Eigen::Vector2d> knots;
      for (const auto& k : params.at("knots"))
        knots.emplace_back(k.at(0).get<double>(), k.at(1).get<double>());
      sc.lane = std::make_shared<geom::CenterLane>(
          geom::CenterLane::spline(std::move(knots)));
    } else {
      throw ScenarioError("lane.kind", "unknown lane kind '" + kind + "'");
    }
  } catch (const nlohmann::json::exception&) {
    throw ScenarioError("lane.params", "malformed lane parameters");
  } catch (const std::invalid_argument& e) {
    throw ScenarioError("lane.params", e.what());
  }

  sc.bounds.half_width = field<double>(j, "bounds.half_width");
  sc.bounds.safety_margin = field<double>(j, "bounds.safety_margin");
  sc.limits.v_r = field<double>(j, "limits.v_r");
  sc.limits.v_max = field<double>(j, "limits.v_max");
  sc.limits.omega_max = field<double>(j, "limits.omega_max");
  sc.limits.a_max = field<double>(j, "limits.a_max");
  sc.limits.j_max = field<double>(j, "limits.j_max");
  sc.limits.d_min = field<double>(j, "limits.d_min");
  sc.weights.w_g = field<double>(j, "weights.w_g");
  sc.weights.w_v = field<double>(j, "weights.w_v");
  sc.weights.w_a = field<double>(j, "weights.w_a");
  sc.weights.w_omega = field<double>(j, "weights.w_omega");
  sc.weights.w_j = field<double>(j, "weights.w_j");
  sc.weights.w_h = field<double>(j, "weights.w_h");
  sc.weights.w_p = field<double>(j, "weights.w_p");

  const auto mx = field<std::vector<double>>(j, "target.mu_x");
  const auto my = field<std::vector<double>>(j, "target.mu_y");
  sc.target.mu_x = Eigen::Map<const Eigen::VectorXd>(mx.data(), mx.size());
  sc.target.mu_y = Eigen::Map<const Eigen::VectorXd>(my.data(), my.size());
  sc.target.sigma_x = field<double>(j, "target.sigma_x");
  sc.target.sigma_y = field<double>(j, "target.sigma_y");

  sc.chance.alpha = field<double>(j, "chance.alpha");
  sc.chance.d_min = sc.limits.d_min;
  if (j.contains("chance") && j["chance"].contains("mode")) {
    const std::string mode = field<std::string>(j, "chance.mode");
    if (mode == "separation")
      sc.chance.mode = chance::ChanceMode::Separation;
    else if (mode == "paper")
      sc.chance.mode = chance::ChanceMode::PaperLiteral;
    else
      throw ScenarioError("chance.mode", "must be 'paper' or 'separation'");
  } else {
    sc.chance.mode = chance::ChanceMode::PaperLiteral;
  }

  const auto z = field<std::vector<double>>(j, "z_init");
  if (z.size() != 4) throw ScenarioError("z_init", "needs [x, y, theta, v]");
  sc.z_init = vehicle::EgoState{z[0], z[1], z[2], z[3]};
  sc.horizon_T = field<double>(j, "horizon_T");
  sc.p_eps = field<double>(j, "p_eps");

  validate_scenario(sc);
  return sc;
}

std::string canonical_json(const Scenario& sc) { return to_json(sc).dump(2) + "\n"; }

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path, "cannot open scenario file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(path, std::string("invalid JSON: ") + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace refplan::scenario
