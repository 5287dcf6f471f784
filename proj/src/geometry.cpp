#include "refplan/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace refplan::geom {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMinRadius = 10.0;

// 8-point Gauss-Legendre nodes/weights on [0, 1].
constexpr double kGlNode[8] = {0.0198550717512319, 0.1016667612931866,
                               0.2372337950418355, 0.4082826787521751,
                               0.5917173212478249, 0.7627662049581645,
                               0.8983332387068134, 0.9801449282487681};
constexpr double kGlWeight[8] = {0.0506142681451881, 0.1111905172266872,
                                 0.1568533229389436, 0.1813418916891810,
                                 0.1813418916891810, 0.1568533229389436,
                                 0.1111905172266872, 0.0506142681451881};

Eigen::Matrix2d rot(double a) {
  Eigen::Matrix2d r;
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r;
}

}  // namespace

double wrap_angle(double a) {
  double w = std::fmod(a, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  if (w > kPi) w -= 2.0 * kPi;
  return w;
}

CenterLane CenterLane::straight(const Vector2d& origin, double heading,
                                double length) {
  if (!(length > 0.0)) throw std::invalid_argument("lane length must be > 0");
  CenterLane lane;
  lane.kind_ = LaneKind::Straight;
  lane.origin_ = origin;
  lane.heading0_ = heading;
  lane.length_ = length;
  lane.min_radius_ = 0.0;
  return lane;
}

CenterLane CenterLane::arc(const Vector2d& origin, double heading,
                           double radius, double length) {
  if (!(length > 0.0)) throw std::invalid_argument("lane length must be > 0");
  if (std::abs(radius) < kMinRadius)
    throw std::invalid_argument("arc radius magnitude must be >= 10 m");
  CenterLane lane;
  lane.kind_ = LaneKind::Arc;
  lane.origin_ = origin;
  lane.heading0_ = heading;
  lane.radius_ = radius;
  lane.length_ = length;
  lane.min_radius_ = std::abs(radius);
  // Center sits on the left normal for left turns, right normal otherwise.
  const Vector2d left_normal(-std::sin(heading), std::cos(heading));
  lane.center_ = origin + radius * left_normal;
  return lane;
}

CenterLane CenterLane::spline(std::vector<Vector2d> knots) {
  if (knots.size() < 2)
    throw std::invalid_argument("spline lane needs at least 2 knots");
  CenterLane lane;
  lane.kind_ = LaneKind::PiecewiseSpline;
  lane.knots_ = std::move(knots);
  const int n = static_cast<int>(lane.knots_.size());
  lane.tangents_.resize(n);
  lane.tangents_[0] = lane.knots_[1] - lane.knots_[0];
  lane.tangents_[n - 1] = lane.knots_[n - 1] - lane.knots_[n - 2];
  for (int i = 1; i + 1 < n; ++i)
    lane.tangents_[i] = 0.5 * (lane.knots_[i + 1] - lane.knots_[i - 1]);
  lane.build_spline_tables();
  if (lane.min_radius_ < kMinRadius)
    throw std::invalid_argument("spline curvature exceeds 1/10 m^-1");
  return lane;
}

Vector2d CenterLane::spline_eval(int seg, double u) const {
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * knots_[seg] + (u3 - 2 * u2 + u) * tangents_[seg] +
         (-2 * u3 + 3 * u2) * knots_[seg + 1] + (u3 - u2) * tangents_[seg + 1];
}

Vector2d CenterLane::spline_deriv(int seg, double u) const {
  const double u2 = u * u;
  return (6 * u2 - 6 * u) * knots_[seg] + (3 * u2 - 4 * u + 1) * tangents_[seg] +
         (-6 * u2 + 6 * u) * knots_[seg + 1] + (3 * u2 - 2 * u) * tangents_[seg + 1];
}

Vector2d CenterLane::spline_second(int seg, double u) const {
  return (12 * u - 6) * knots_[seg] + (6 * u - 4) * tangents_[seg] +
         (-12 * u + 6) * knots_[seg + 1] + (6 * u - 2) * tangents_[seg + 1];
}

void CenterLane::build_spline_tables() {
  const int n_seg = static_cast<int>(knots_.size()) - 1;
  // table resolution ~2-5 m regardless of knot spacing
  double chord = 0.0;
  for (int i = 0; i + 1 < static_cast<int>(knots_.size()); ++i)
    chord += (knots_[i + 1] - knots_[i]).norm();
  const int sub = std::clamp(
      static_cast<int>(std::lround(chord / n_seg / 4.0)), 2, 32);
  tbl_s_.clear();
  tbl_u_.clear();
  tbl_p_.clear();
  tbl_s_.push_back(0.0);
  tbl_u_.push_back(0.0);
  tbl_p_.push_back(knots_.front());
  double s = 0.0;
  double min_r = std::numeric_limits<double>::infinity();
  for (int seg = 0; seg < n_seg; ++seg) {
    for (int j = 0; j < sub; ++j) {
      const double ua = static_cast<double>(j) / sub;
      const double ub = static_cast<double>(j + 1) / sub;
      double len = 0.0;
      for (int g = 0; g < 8; ++g) {
        const double u = ua + (ub - ua) * kGlNode[g];
        const Vector2d d = spline_deriv(seg, u);
        const Vector2d dd = spline_second(seg, u);
        const double speed = d.norm();
        len += kGlWeight[g] * speed;
        const double cross = d.x() * dd.y() - d.y() * dd.x();
        if (std::abs(cross) > 1e-12) {
          const double r = speed * speed * speed / std::abs(cross);
          min_r = std::min(min_r, r);
        }
      }
      s += len * (ub - ua);
      tbl_s_.push_back(s);
      tbl_u_.push_back(seg + ub);
      tbl_p_.push_back(spline_eval(seg, ub));
    }
  }
  length_ = s;
  min_radius_ = std::isfinite(min_r) ? min_r : 0.0;
}

double CenterLane::spline_param(double s, int* seg_out) const {
  // Bracket in the cumulative table, then Newton on arc length.
  const auto it = std::upper_bound(tbl_s_.begin(), tbl_s_.end(), s);
  int hi = std::min<int>(static_cast<int>(it - tbl_s_.begin()),
                         static_cast<int>(tbl_s_.size()) - 1);
  int lo = std::max(0, hi - 1);
  const double frac = (tbl_s_[hi] > tbl_s_[lo])
                          ? (s - tbl_s_[lo]) / (tbl_s_[hi] - tbl_s_[lo])
                          : 0.0;
  double g = tbl_u_[lo] + frac * (tbl_u_[hi] - tbl_u_[lo]);
  const int n_seg = static_cast<int>(knots_.size()) - 1;
  for (int iter = 0; iter < 4; ++iter) {
    g = std::clamp(g, 0.0, static_cast<double>(n_seg));
    int seg = std::min(static_cast<int>(g), n_seg - 1);
    double u = g - seg;
    // arc length from table anchor lo to g via 8-pt GL
    int anchor = lo;
    double s_anchor = tbl_s_[anchor];
    double ga = tbl_u_[anchor];
    double len = 0.0;
    // integrate along possibly multiple table cells; cells are short, one GL
    // pass over [ga, g] within the same segment is accurate enough
    if (static_cast<int>(ga) == seg || g == ga) {
      const double ua = ga - seg;
      for (int k = 0; k < 8; ++k) {
        const double uu = ua + (u - ua) * kGlNode[k];
        len += kGlWeight[k] * spline_deriv(seg, uu).norm();
      }
      len *= (u - ua);
    } else {
      // crossed a segment boundary; fall back to local linearization
      len = s - s_anchor;
    }
    const double err = (s_anchor + len) - s;
    const double speed = spline_deriv(seg, u).norm();
    if (std::abs(err) < 1e-12 || speed < 1e-12) break;
    g -= err / speed;
  }
  g = std::clamp(g, 0.0, static_cast<double>(n_seg));
  int seg = std::min(static_cast<int>(g), n_seg - 1);
  if (seg_out) *seg_out = seg;
  return g - seg;
}

void CenterLane::spline_project(const Vector2d& p, int* seg_out,
                                double* u_out) const {
  // Coarse scan over table samples (strided for long lanes, then a local
  // window), followed by Newton on (P(u)-p).P'(u) = 0. The strided pass is
  // safe because lanes never self-approach: headings stay within a half
  // cone, so arc length is monotone along any fixed direction in it.
  const int n_tbl = static_cast<int>(tbl_p_.size());
  const int stride = std::max(1, n_tbl / 256);
  int best = 0;
  double best_d2 = (tbl_p_[0] - p).squaredNorm();
  for (int i = stride; i < n_tbl; i += stride) {
    const double d2 = (tbl_p_[i] - p).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  if (stride > 1) {
    const int lo = std::max(0, best - stride);
    const int hi = std::min(n_tbl - 1, best + stride);
    for (int i = lo; i <= hi; ++i) {
      const double d2 = (tbl_p_[i] - p).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = i;
      }
    }
  }
  const int n_seg = static_cast<int>(knots_.size()) - 1;
  double g = tbl_u_[best];
  for (int iter = 0; iter < 8; ++iter) {
    g = std::clamp(g, 0.0, static_cast<double>(n_seg));
    const int seg = std::min(static_cast<int>(g), n_seg - 1);
    const double u = g - seg;
    const Vector2d e = spline_eval(seg, u) - p;
    const Vector2d d = spline_deriv(seg, u);
    const Vector2d dd = spline_second(seg, u);
    const double f = e.dot(d);
    const double fp = d.squaredNorm() + e.dot(dd);
    if (std::abs(fp) < 1e-12) break;
    const double step = f / fp;
    g -= step;
    if (std::abs(step) < 1e-13) break;
  }
  g = std::clamp(g, 0.0, static_cast<double>(n_seg));
  const int seg = std::min(static_cast<int>(g), n_seg - 1);
  if (seg_out) *seg_out = seg;
  if (u_out) *u_out = g - seg;
}

void CenterLane::check_range(double s) const {
  if (s < 0.0 || s > length_ + 1e-9) {
    std::ostringstream msg;
    msg << "arc length " << s << " outside lane range [0, " << length_ << "]";
    throw std::domain_error(msg.str());
  }
}

Vector2d CenterLane::point(double s) const {
  check_range(s);
  s = std::clamp(s, 0.0, length_);
  switch (kind_) {
    case LaneKind::Straight:
      return origin_ + s * Vector2d(std::cos(heading0_), std::sin(heading0_));
    case LaneKind::Arc:
      return center_ + rot(s / radius_) * (origin_ - center_);
    case LaneKind::PiecewiseSpline: {
      int seg = 0;
      const double u = spline_param(s, &seg);
      return spline_eval(seg, u);
    }
  }
  return origin_;
}

double CenterLane::heading(double s) const {
  check_range(s);
  s = std::clamp(s, 0.0, length_);
  switch (kind_) {
    case LaneKind::Straight:
      return wrap_angle(heading0_);
    case LaneKind::Arc:
      return wrap_angle(heading0_ + s / radius_);
    case LaneKind::PiecewiseSpline: {
      int seg = 0;
      const double u = spline_param(s, &seg);
      const Vector2d d = spline_deriv(seg, u);
      return std::atan2(d.y(), d.x());
    }
  }
  return heading0_;
}

double CenterLane::lateral_offset(const Vector2d& p) const {
  switch (kind_) {
    case LaneKind::Straight: {
      const Vector2d n(-std::sin(heading0_), std::cos(heading0_));
      return n.dot(p - origin_);
    }
    case LaneKind::Arc: {
      const double rho = (p - center_).norm();
      if (rho < 1e-9)
        throw std::runtime_error("ambiguous projection: point at arc center");
      return (radius_ > 0.0) ? (radius_ - rho) : (rho + radius_);
    }
    case LaneKind::PiecewiseSpline: {
      int seg = 0;
      double u = 0.0;
      spline_project(p, &seg, &u);
      const Vector2d c = spline_eval(seg, u);
      const Vector2d d = spline_deriv(seg, u);
      const double speed = d.norm();
      if (speed < 1e-12) throw std::runtime_error("degenerate spline tangent");
      const Vector2d e = p - c;
      // signed by the left normal; off-end feet reduce to the tangent line
      return (d.x() * e.y() - d.y() * e.x()) / speed;
    }
  }
  return 0.0;
}

Vector2d CenterLane::lateral_offset_gradient(const Vector2d& p) const {
  switch (kind_) {
    case LaneKind::Straight:
      return Vector2d(-std::sin(heading0_), std::cos(heading0_));
    case LaneKind::Arc: {
      const double rho = (p - center_).norm();
      if (rho < 1e-9)
        throw std::runtime_error("ambiguous projection: point at arc center");
      return -((radius_ > 0.0) ? 1.0 : -1.0) / rho * (p - center_);
    }
    case LaneKind::PiecewiseSpline: {
      int seg = 0;
      double u = 0.0;
      spline_project(p, &seg, &u);
      const Vector2d d = spline_deriv(seg, u).normalized();
      return Vector2d(-d.y(), d.x());
    }
  }
  return Vector2d::Zero();
}

Vector2d lane_point(const CenterLane& lane, double s) { return lane.point(s); }

double lane_heading(const CenterLane& lane, double s) {
  return lane.heading(s);
}

double lateral_offset(const CenterLane& lane, const Vector2d& p) {
  return lane.lateral_offset(p);
}

WaypointQuery waypoint_at(const CenterLane& lane, double t, double v_r) {
  if (t < 0.0) throw std::domain_error("waypoint time must be >= 0");
  if (!(v_r > 0.0)) throw std::domain_error("reference speed must be > 0");
  double s = v_r * t;
  WaypointQuery q;
  if (s > lane.length()) {
    s = lane.length();
    q.clamped = true;
  }
  const Vector2d p = lane.point(s);
  q.point = Waypoint{p.x(), p.y(), lane.heading(s)};
  return q;
}

}  // namespace refplan::geom
