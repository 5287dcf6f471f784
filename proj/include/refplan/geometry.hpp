#ifndef REFPLAN_GEOMETRY_HPP
#define REFPLAN_GEOMETRY_HPP

#include <Eigen/Dense>
#include <memory>
#include <vector>

namespace refplan::geom {

using Eigen::Vector2d;

// Wrap an angle into (-pi, pi].
double wrap_angle(double a);

enum class LaneKind { Straight, Arc, PiecewiseSpline };

struct RoadBounds {
  double half_width = 3.5;     // m, > 0
  double safety_margin = 0.5;  // m, >= 0, < half_width
};

struct Waypoint {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // lane tangent angle at the waypoint, in (-pi, pi]
};

struct WaypointQuery {
  Waypoint point;
  bool clamped = false;  // true when the requested station ran off the lane end
};

// Arc-length parameterized center lane. Immutable after construction; all
// queries are const and safe to call concurrently.
//
// Conventions: arc radius is signed, positive turning left; lateral offsets
// are positive to the left of the travel direction. All curves are C1 in
// arc length and the minimum turn radius is 10 m.
class CenterLane {
 public:
  // Straight segment from `origin` along `heading`.
  static CenterLane straight(const Vector2d& origin, double heading,
                             double length);
  // Circular arc; `radius` signed by turn direction (left positive),
  // |radius| >= 10.
  static CenterLane arc(const Vector2d& origin, double heading, double radius,
                        double length);
  // C1 cubic spline through planar knots, reparameterized by arc length.
  static CenterLane spline(std::vector<Vector2d> knots);

  LaneKind kind() const { return kind_; }
  double length() const { return length_; }
  double min_radius() const { return min_radius_; }
  const Vector2d& origin() const { return origin_; }
  double heading0() const { return heading0_; }
  double radius() const { return radius_; }
  const std::vector<Vector2d>& knots() const { return knots_; }

  // Point on the curve at arc length s in [0, length].
  Vector2d point(double s) const;
  // Tangent angle at arc length s, wrapped to (-pi, pi].
  double heading(double s) const;

  // Signed perpendicular distance from p to the lane (left positive). Points
  // beyond the lane ends project onto the tangent extension, keeping the
  // function smooth when a trajectory drifts past the final station.
  double lateral_offset(const Vector2d& p) const;
  // Gradient of lateral_offset w.r.t. p: the unit left normal at the foot
  // point (signed-distance property).
  Vector2d lateral_offset_gradient(const Vector2d& p) const;

 private:
  CenterLane() = default;
  void check_range(double s) const;

  // Spline internals (Hermite segments over knots + arc-length tables).
  Vector2d spline_eval(int seg, double u) const;
  Vector2d spline_deriv(int seg, double u) const;
  Vector2d spline_second(int seg, double u) const;
  double spline_param(double s, int* seg_out) const;
  void spline_project(const Vector2d& p, int* seg, double* u) const;
  void build_spline_tables();

  LaneKind kind_ = LaneKind::Straight;
  double length_ = 0.0;
  double min_radius_ = 0.0;  // 0 means straight (infinite radius)

  // straight / arc
  Vector2d origin_ = Vector2d::Zero();
  double heading0_ = 0.0;
  double radius_ = 0.0;  // signed; arcs only
  Vector2d center_ = Vector2d::Zero();

  // spline
  std::vector<Vector2d> knots_;
  std::vector<Vector2d> tangents_;
  // cumulative arc length at sampled (segment, u) stations
  std::vector<double> tbl_s_;
  std::vector<double> tbl_u_;   // global parameter seg + u in [0, n_seg]
  std::vector<Vector2d> tbl_p_;
};

using LanePtr = std::shared_ptr<const CenterLane>;

// Point on the lane at arc length s. Throws std::domain_error (naming the
// valid interval) for s outside [0, length].
Vector2d lane_point(const CenterLane& lane, double s);

// Tangent angle at arc length s, wrapped to (-pi, pi]. Same domain as
// lane_point.
double lane_heading(const CenterLane& lane, double s);

// Signed perpendicular distance from p to the lane, positive left of travel.
double lateral_offset(const CenterLane& lane, const Vector2d& p);

// Waypoint at arc length v_r * t. Stations past the lane end clamp to the
// end and are flagged.
WaypointQuery waypoint_at(const CenterLane& lane, double t, double v_r);

}  // namespace refplan::geom

#endif  // REFPLAN_GEOMETRY_HPP
