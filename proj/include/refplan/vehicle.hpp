#ifndef REFPLAN_VEHICLE_HPP
#define REFPLAN_VEHICLE_HPP

#include <Eigen/Dense>

#include "refplan/geometry.hpp"

namespace refplan::vehicle {

using Eigen::Vector2d;
using Eigen::Vector4d;

// Unicycle state [x, y, theta, v].
struct EgoState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // rad, reported wrapped to (-pi, pi]
  double v = 0.0;      // m/s, >= 0

  Vector4d vec() const { return Vector4d(x, y, theta, v); }
  static EgoState from_vec(const Vector4d& z) {
    return EgoState{z(0), z(1), z(2), z(3)};
  }
};

// Control input [a, omega].
struct ControlInput {
  double a = 0.0;      // m/s^2
  double omega = 0.0;  // rad/s
};

// Objective weights; all >= 0, at least one positive.
struct Weights {
  double w_g = 1.0;      // waypoint tracking
  double w_v = 1.0;      // speed tracking
  double w_a = 1.0;      // acceleration effort
  double w_omega = 1.0;  // angular rate effort
  double w_j = 1.0;      // jerk
  double w_h = 1.0;      // heading error
  double w_p = 1.0;      // target potential field
};

// Kinematic limits and the distance/speed references.
struct Limits {
  double v_max = 40.0;                   // m/s
  double omega_max = 0.5235987755982988; // rad/s (pi/6)
  double a_max = 3.0;                    // m/s^2
  double j_max = 0.6;                    // m/s^3
  double d_min = 5.0;                    // m
  double v_r = 12.0;                     // m/s
};

// dz/dt = [v cos(theta), v sin(theta), omega, a]
Vector4d dynamics(const EgoState& z, const ControlInput& u);

// Jacobians of the dynamics: df/dz (4x4) and df/du (4x2).
void dynamics_jacobian(const EgoState& z, const ControlInput& u,
                       Eigen::Matrix4d& dfdz, Eigen::Matrix<double, 4, 2>& dfdu);

// Signed-sum distance surrogate |a - b + c - d|; the vehicle separation
// measure, called as k_distance(x_tgt, ego_x, y_tgt, ego_y).
double k_distance(double x_tgt, double ego_x, double y_tgt, double ego_y);

// Wrapped difference between the ego heading and the lane tangent at
// station s.
double heading_error(double theta, const geom::CenterLane& lane, double s);

// Repulsive field 1 / (gap^2 + p_eps); p_eps > 0 keeps it bounded.
double potential_field(double x_tgt, double y_tgt, double x, double y,
                       double p_eps);

// Road corridor residual |lateral_offset| - (half_width - safety_margin);
// feasible iff <= 0.
double road_constraint(const Vector2d& p, const geom::CenterLane& lane,
                       const geom::RoadBounds& bounds);

// Residuals (|v|-v_max, |omega|-omega_max, |a|-a_max, |jerk|-j_max); each
// feasible iff <= 0.
Vector4d limit_residuals(const EgoState& z, const ControlInput& u, double jerk,
                         const Limits& lim);

// Weighted stage cost of the trajectory objective at one instant.
double stage_cost(const EgoState& z, const ControlInput& u, double jerk,
                  const geom::Waypoint& wp, const Vector2d& target,
                  const Weights& w, double v_r, const geom::CenterLane& lane,
                  double s, double p_eps);

// Gradient of stage_cost w.r.t. (x, y, theta, v, a, omega, jerk).
Eigen::Matrix<double, 7, 1> stage_cost_gradient(
    const EgoState& z, const ControlInput& u, double jerk,
    const geom::Waypoint& wp, const Vector2d& target, const Weights& w,
    double v_r, const geom::CenterLane& lane, double s, double p_eps);

}  // namespace refplan::vehicle

#endif  // REFPLAN_VEHICLE_HPP
