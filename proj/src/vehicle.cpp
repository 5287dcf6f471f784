#include "refplan/vehicle.hpp"

#include <cmath>
#include <stdexcept>

namespace refplan::vehicle {

Vector4d dynamics(const EgoState& z, const ControlInput& u) {
  return Vector4d(z.v * std::cos(z.theta), z.v * std::sin(z.theta), u.omega,
                  u.a);
}

void dynamics_jacobian(const EgoState& z, const ControlInput& /*u*/,
                       Eigen::Matrix4d& dfdz,
                       Eigen::Matrix<double, 4, 2>& dfdu) {
  const double c = std::cos(z.theta), s = std::sin(z.theta);
  dfdz.setZero();
  dfdz(0, 2) = -z.v * s;
  dfdz(0, 3) = c;
  dfdz(1, 2) = z.v * c;
  dfdz(1, 3) = s;
  dfdu.setZero();
  dfdu(2, 1) = 1.0;  // d(theta_dot)/d(omega)
  dfdu(3, 0) = 1.0;  // d(v_dot)/d(a)
}

double k_distance(double x_tgt, double ego_x, double y_tgt, double ego_y) {
  return std::abs(x_tgt - ego_x + y_tgt - ego_y);
}

double heading_error(double theta, const geom::CenterLane& lane, double s) {
  return geom::wrap_angle(theta - geom::lane_heading(lane, s));
}

double potential_field(double x_tgt, double y_tgt, double x, double y,
                       double p_eps) {
  if (!(p_eps > 0.0)) throw std::domain_error("p_eps must be > 0");
  const double dx = x_tgt - x, dy = y_tgt - y;
  return 1.0 / (dx * dx + dy * dy + p_eps);
}

double road_constraint(const Vector2d& p, const geom::CenterLane& lane,
                       const geom::RoadBounds& bounds) {
  return std::abs(lane.lateral_offset(p)) -
         (bounds.half_width - bounds.safety_margin);
}

Vector4d limit_residuals(const EgoState& z, const ControlInput& u, double jerk,
                         const Limits& lim) {
  return Vector4d(std::abs(z.v) - lim.v_max, std::abs(u.omega) - lim.omega_max,
                  std::abs(u.a) - lim.a_max, std::abs(jerk) - lim.j_max);
}

double stage_cost(const EgoState& z, const ControlInput& u, double jerk,
                  const geom::Waypoint& wp, const Vector2d& target,
                  const Weights& w, double v_r, const geom::CenterLane& lane,
                  double s, double p_eps) {
  const double dxw = z.x - wp.x, dyw = z.y - wp.y;
  const double dv = v_r - z.v;
  const double h = heading_error(z.theta, lane, s);
  const double p = potential_field(target.x(), target.y(), z.x, z.y, p_eps);
  return w.w_g * (dxw * dxw + dyw * dyw) + w.w_v * dv * dv + w.w_a * u.a * u.a +
         w.w_omega * u.omega * u.omega + w.w_j * jerk * jerk + w.w_h * h * h +
         w.w_p * p;
}

Eigen::Matrix<double, 7, 1> stage_cost_gradient(
    const EgoState& z, const ControlInput& u, double jerk,
    const geom::Waypoint& wp, const Vector2d& target, const Weights& w,
    double v_r, const geom::CenterLane& lane, double s, double p_eps) {
  Eigen::Matrix<double, 7, 1> g = Eigen::Matrix<double, 7, 1>::Zero();
  const double dxt = target.x() - z.x, dyt = target.y() - z.y;
  const double denom = dxt * dxt + dyt * dyt + p_eps;
  const double p2 = 1.0 / (denom * denom);
  g(0) = 2.0 * w.w_g * (z.x - wp.x) + 2.0 * w.w_p * dxt * p2;
  g(1) = 2.0 * w.w_g * (z.y - wp.y) + 2.0 * w.w_p * dyt * p2;
  g(2) = 2.0 * w.w_h * heading_error(z.theta, lane, s);
  g(3) = -2.0 * w.w_v * (v_r - z.v);
  g(4) = 2.0 * w.w_a * u.a;
  g(5) = 2.0 * w.w_omega * u.omega;
  g(6) = 2.0 * w.w_j * jerk;
  return g;
}

}  // namespace refplan::vehicle
