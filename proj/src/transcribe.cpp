#include "refplan/transcribe.hpp"

#include <cmath>
#include <stdexcept>

#include "refplan/chance.hpp"

namespace refplan::transcribe {

namespace {

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

NlpProblem build_nlp(const scenario::Scenario& sc, const TimeGrid& grid,
                     const vehicle::Weights& w, bool stochastic,
                     DynamicsKind dynamics, const TargetData* target) {
  grid.validate();
  const int m = grid.nodes_M;

  NlpProblem nlp;
  nlp.grid_ = grid;
  nlp.dynamics_ = dynamics;
  nlp.lane_ = sc.lane;
  nlp.bounds_ = sc.bounds;
  nlp.limits_ = sc.limits;
  nlp.weights_ = w;
  nlp.p_eps_ = sc.p_eps;
  nlp.z_init_ = sc.z_init.vec();

  if (sc.z_init.x < 0.0 || sc.z_init.y < 0.0 || sc.z_init.v < 0.0)
    throw std::invalid_argument(
        "initial state violates the variable bounds (x, y, v >= 0)");

  if (!stochastic) {
    nlp.distance_ = DistanceKind::DeterministicK;
  } else {
    nlp.distance_ = sc.chance.mode == chance::ChanceMode::Separation
                        ? DistanceKind::ChanceSeparation
                        : DistanceKind::ChanceBand;
  }

  if (target && (target->x.size() != m || target->y.size() != m))
    throw std::invalid_argument("target data does not match the grid");

  const chance::TargetModel tm = sample_target_on_grid(sc, grid);
  nlp.nodes_.resize(m);
  for (int i = 0; i < m; ++i) {
    NlpProblem::NodeRef& nd = nlp.nodes_[i];
    nd.t = grid.time(i);
    const auto wq = geom::waypoint_at(*sc.lane, nd.t, sc.limits.v_r);
    nd.station = std::min(sc.limits.v_r * nd.t, sc.lane->length());
    nd.wx = wq.point.x;
    nd.wy = wq.point.y;
    nd.lane_heading = wq.point.theta;
    nd.tx = target ? (*target).x(i) : tm.mu_x(i);
    nd.ty = target ? (*target).y(i) : tm.mu_y(i);
    if (nlp.distance_ == DistanceKind::ChanceBand) {
      const auto b = chance::det_equiv_bounds(nd.tx, nd.ty, tm.sigma_x,
                                              tm.sigma_y, sc.chance);
      nd.band_lo = b.lower;
      nd.band_hi = b.upper;
    } else if (nlp.distance_ == DistanceKind::ChanceSeparation) {
      nd.band_hi = chance::separation_upper_bound(nd.tx, nd.ty, tm.sigma_x,
                                                  tm.sigma_y, sc.chance);
      nd.band_lo = -std::numeric_limits<double>::infinity();
    }
  }

  nlp.n_vars_ = kVarsPerNode * m;
  nlp.census_.init_pin = 4;
  nlp.census_.defect = 4 * (m - 1);
  nlp.census_.road = m;
  nlp.census_.speed = 2 * m;
  nlp.census_.angular = 2 * m;
  nlp.census_.accel = 2 * m;
  nlp.census_.jerk = 2 * (m - 1);
  nlp.census_.distance =
      nlp.distance_ == DistanceKind::ChanceBand ? 2 * m : m;
  nlp.n_eq_ = nlp.census_.total_eq();
  nlp.n_ineq_ = nlp.census_.total_ineq();

  nlp.lb_ = VectorXd::Constant(nlp.n_vars_, -std::numeric_limits<double>::infinity());
  nlp.ub_ = VectorXd::Constant(nlp.n_vars_, std::numeric_limits<double>::infinity());
  for (int i = 0; i < m; ++i) {
    nlp.lb_(var_index(i, kX)) = 0.0;
    nlp.lb_(var_index(i, kY)) = 0.0;
    nlp.lb_(var_index(i, kV)) = 0.0;
  }
  return nlp;
}

NlpProblem build_continuous_nlp(const scenario::Scenario& sc,
                                const TimeGrid& grid,
                                const vehicle::Weights& w, bool stochastic) {
  return build_nlp(sc, grid, w, stochastic, DynamicsKind::Trapezoidal, nullptr);
}

NlpProblem build_continuous_nlp(const scenario::Scenario& sc,
                                const TimeGrid& grid,
                                const vehicle::Weights& w, bool stochastic,
                                const TargetData& target) {
  return build_nlp(sc, grid, w, stochastic, DynamicsKind::Trapezoidal, &target);
}

NlpProblem build_discrete_nlp(const scenario::Scenario& sc, int steps_N,
                              double dt, const vehicle::Weights& w,
                              bool stochastic) {
  if (steps_N < 2) throw std::invalid_argument("discrete model needs N >= 2");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  TimeGrid grid{dt * (steps_N - 1), steps_N};
  return build_nlp(sc, grid, w, stochastic, DynamicsKind::ForwardEuler, nullptr);
}

NlpProblem build_discrete_nlp(const scenario::Scenario& sc, int steps_N,
                              double dt, const vehicle::Weights& w,
                              bool stochastic, const TargetData& target) {
  if (steps_N < 2) throw std::invalid_argument("discrete model needs N >= 2");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  TimeGrid grid{dt * (steps_N - 1), steps_N};
  return build_nlp(sc, grid, w, stochastic, DynamicsKind::ForwardEuler, &target);
}

double NlpProblem::objective(const VectorXd& x, VectorXd* grad) const {
  if (x.size() != n_vars_)
    throw std::invalid_argument("objective: decision vector size mismatch");
  const int m = grid_.nodes_M;
  const double h = grid_.dt();
  if (grad) grad->setZero(n_vars_);

  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    // trapezoid weights for the collocation objective, plain dt-weighted sum
    // for the forward-Euler baseline
    const double q = (dynamics_ == DynamicsKind::Trapezoidal)
                         ? ((i == 0 || i == m - 1) ? 0.5 * h : h)
                         : h;
    const NodeRef& nd = nodes_[i];
    const double xi = x(var_index(i, kX));
    const double yi = x(var_index(i, kY));
    const double th = x(var_index(i, kTheta));
    const double vi = x(var_index(i, kV));
    const double ai = x(var_index(i, kA));
    const double wi = x(var_index(i, kOmega));

    const double dxw = xi - nd.wx, dyw = yi - nd.wy;
    const double dv = limits_.v_r - vi;
    const double he = geom::wrap_angle(th - nd.lane_heading);
    const double dxt = nd.tx - xi, dyt = nd.ty - yi;
    const double denom = dxt * dxt + dyt * dyt + p_eps_;

    total += q * (weights_.w_g * (dxw * dxw + dyw * dyw) +
                  weights_.w_v * dv * dv + weights_.w_a * ai * ai +
                  weights_.w_omega * wi * wi + weights_.w_h * he * he +
                  weights_.w_p / denom);
    if (grad) {
      const double p2 = 1.0 / (denom * denom);
      (*grad)(var_index(i, kX)) +=
          q * (2.0 * weights_.w_g * dxw + 2.0 * weights_.w_p * dxt * p2);
      (*grad)(var_index(i, kY)) +=
          q * (2.0 * weights_.w_g * dyw + 2.0 * weights_.w_p * dyt * p2);
      (*grad)(var_index(i, kTheta)) += q * 2.0 * weights_.w_h * he;
      (*grad)(var_index(i, kV)) += -q * 2.0 * weights_.w_v * dv;
      (*grad)(var_index(i, kA)) += q * 2.0 * weights_.w_a * ai;
      (*grad)(var_index(i, kOmega)) += q * 2.0 * weights_.w_omega * wi;
    }
  }

  // jerk contribution: a(t) piecewise linear makes (da/dt)^2 piecewise
  // constant, so its exact integral is the per-interval sum below
  for (int k = 0; k + 1 < m; ++k) {
    const double jerk = (x(var_index(k + 1, kA)) - x(var_index(k, kA))) / h;
    total += weights_.w_j * jerk * jerk * h;
    if (grad) {
      (*grad)(var_index(k, kA)) += -2.0 * weights_.w_j * jerk;
      (*grad)(var_index(k + 1, kA)) += 2.0 * weights_.w_j * jerk;
    }
  }
  return total;
}

void NlpProblem::equalities(const VectorXd& x, VectorXd& c, SpMat* jac) const {
  if (x.size() != n_vars_)
    throw std::invalid_argument("equalities: decision vector size mismatch");
  const int m = grid_.nodes_M;
  const double h = grid_.dt();
  c.resize(n_eq_);
  std::vector<Eigen::Triplet<double>> trips;
  if (jac) trips.reserve(16 * m);

  // initial-state pins
  for (int d = 0; d < 4; ++d) {
    c(d) = x(var_index(0, static_cast<Component>(d))) - z_init_(d);
    if (jac) trips.emplace_back(d, var_index(0, static_cast<Component>(d)), 1.0);
  }

  Eigen::Matrix4d dfdz_k, dfdz_n;
  Eigen::Matrix<double, 4, 2> dfdu_k, dfdu_n;
  for (int k = 0; k + 1 < m; ++k) {
    const int row0 = 4 + 4 * k;
    const auto zk = vehicle::EgoState{x(var_index(k, kX)), x(var_index(k, kY)),
                                      x(var_index(k, kTheta)), x(var_index(k, kV))};
    const auto uk = vehicle::ControlInput{x(var_index(k, kA)), x(var_index(k, kOmega))};
    const auto zn = vehicle::EgoState{x(var_index(k + 1, kX)), x(var_index(k + 1, kY)),
                                      x(var_index(k + 1, kTheta)), x(var_index(k + 1, kV))};
    const auto un = vehicle::ControlInput{x(var_index(k + 1, kA)), x(var_index(k + 1, kOmega))};
    const Eigen::Vector4d fk = vehicle::dynamics(zk, uk);

    Eigen::Vector4d defect;
    if (dynamics_ == DynamicsKind::Trapezoidal) {
      const Eigen::Vector4d fn = vehicle::dynamics(zn, un);
      defect = zn.vec() - zk.vec() - 0.5 * h * (fk + fn);
    } else {
      defect = zn.vec() - zk.vec() - h * fk;
    }
    c.segment<4>(row0) = defect;

    if (jac) {
      vehicle::dynamics_jacobian(zk, uk, dfdz_k, dfdu_k);
      const double wk = (dynamics_ == DynamicsKind::Trapezoidal) ? 0.5 * h : h;
      for (int r = 0; r < 4; ++r) {
        for (int cc = 0; cc < 4; ++cc) {
          double val = (r == cc ? -1.0 : 0.0) - wk * dfdz_k(r, cc);
          if (val != 0.0)
            trips.emplace_back(row0 + r, var_index(k, static_cast<Component>(cc)), val);
        }
        for (int cc = 0; cc < 2; ++cc) {
          const double val = -wk * dfdu_k(r, cc);
          if (val != 0.0)
            trips.emplace_back(row0 + r, var_index(k, static_cast<Component>(4 + cc)), val);
        }
      }
      if (dynamics_ == DynamicsKind::Trapezoidal) {
        vehicle::dynamics_jacobian(zn, un, dfdz_n, dfdu_n);
        for (int r = 0; r < 4; ++r) {
          for (int cc = 0; cc < 4; ++cc) {
            double val = (r == cc ? 1.0 : 0.0) - 0.5 * h * dfdz_n(r, cc);
            if (val != 0.0)
              trips.emplace_back(row0 + r, var_index(k + 1, static_cast<Component>(cc)), val);
          }
          for (int cc = 0; cc < 2; ++cc) {
            const double val = -0.5 * h * dfdu_n(r, cc);
            if (val != 0.0)
              trips.emplace_back(row0 + r, var_index(k + 1, static_cast<Component>(4 + cc)), val);
          }
        }
      } else {
        for (int r = 0; r < 4; ++r)
          trips.emplace_back(row0 + r, var_index(k + 1, static_cast<Component>(r)), 1.0);
      }
    }
  }

  if (jac) {
    jac->resize(n_eq_, n_vars_);
    jac->setFromTriplets(trips.begin(), trips.end());
  }
}

void NlpProblem::inequalities(const VectorXd& x, VectorXd& c, SpMat* jac) const {
  if (x.size() != n_vars_)
    throw std::invalid_argument("inequalities: decision vector size mismatch");
  const int m = grid_.nodes_M;
  const double h = grid_.dt();
  const double corridor = bounds_.half_width - bounds_.safety_margin;
  c.resize(n_ineq_);
  std::vector<Eigen::Triplet<double>> trips;
  if (jac) trips.reserve(12 * m);

  int row = 0;
  // road corridor
  for (int i = 0; i < m; ++i, ++row) {
    const Eigen::Vector2d p(x(var_index(i, kX)), x(var_index(i, kY)));
    const double off = lane_->lateral_offset(p);
    c(row) = std::abs(off) - corridor;
    if (jac) {
      const Eigen::Vector2d n = lane_->lateral_offset_gradient(p) * sgn(off);
      trips.emplace_back(row, var_index(i, kX), n.x());
      trips.emplace_back(row, var_index(i, kY), n.y());
    }
  }
  // |v| <= v_max, split
  for (int i = 0; i < m; ++i) {
    const double v = x(var_index(i, kV));
    c(row) = v - limits_.v_max;
    if (jac) trips.emplace_back(row, var_index(i, kV), 1.0);
    ++row;
    c(row) = -v - limits_.v_max;
    if (jac) trips.emplace_back(row, var_index(i, kV), -1.0);
    ++row;
  }
  // |omega| <= omega_max
  for (int i = 0; i < m; ++i) {
    const double w = x(var_index(i, kOmega));
    c(row) = w - limits_.omega_max;
    if (jac) trips.emplace_back(row, var_index(i, kOmega), 1.0);
    ++row;
    c(row) = -w - limits_.omega_max;
    if (jac) trips.emplace_back(row, var_index(i, kOmega), -1.0);
    ++row;
  }
  // |a| <= a_max
  for (int i = 0; i < m; ++i) {
    const double a = x(var_index(i, kA));
    c(row) = a - limits_.a_max;
    if (jac) trips.emplace_back(row, var_index(i, kA), 1.0);
    ++row;
    c(row) = -a - limits_.a_max;
    if (jac) trips.emplace_back(row, var_index(i, kA), -1.0);
    ++row;
  }
  // |jerk| <= j_max per interval
  for (int k = 0; k + 1 < m; ++k) {
    const double jerk = (x(var_index(k + 1, kA)) - x(var_index(k, kA))) / h;
    c(row) = jerk - limits_.j_max;
    if (jac) {
      trips.emplace_back(row, var_index(k, kA), -1.0 / h);
      trips.emplace_back(row, var_index(k + 1, kA), 1.0 / h);
    }
    ++row;
    c(row) = -jerk - limits_.j_max;
    if (jac) {
      trips.emplace_back(row, var_index(k, kA), 1.0 / h);
      trips.emplace_back(row, var_index(k + 1, kA), -1.0 / h);
    }
    ++row;
  }
  // vehicle separation
  for (int i = 0; i < m; ++i) {
    const NodeRef& nd = nodes_[i];
    const double xi = x(var_index(i, kX));
    const double yi = x(var_index(i, kY));
    switch (distance_) {
      case DistanceKind::DeterministicK: {
        const double g = nd.tx - xi + nd.ty - yi;
        c(row) = limits_.d_min - std::abs(g);
        if (jac) {
          trips.emplace_back(row, var_index(i, kX), sgn(g));
          trips.emplace_back(row, var_index(i, kY), sgn(g));
        }
        ++row;
        break;
      }
      case DistanceKind::ChanceBand: {
        c(row) = (xi + yi) - nd.band_hi;
        if (jac) {
          trips.emplace_back(row, var_index(i, kX), 1.0);
          trips.emplace_back(row, var_index(i, kY), 1.0);
        }
        ++row;
        c(row) = nd.band_lo - (xi + yi);
        if (jac) {
          trips.emplace_back(row, var_index(i, kX), -1.0);
          trips.emplace_back(row, var_index(i, kY), -1.0);
        }
        ++row;
        break;
      }
      case DistanceKind::ChanceSeparation: {
        c(row) = (xi + yi) - nd.band_hi;
        if (jac) {
          trips.emplace_back(row, var_index(i, kX), 1.0);
          trips.emplace_back(row, var_index(i, kY), 1.0);
        }
        ++row;
        break;
      }
    }
  }

  if (jac) {
    jac->resize(n_ineq_, n_vars_);
    jac->setFromTriplets(trips.begin(), trips.end());
  }
}

EvalBundle evaluate(const NlpProblem& nlp, const VectorXd& x) {
  EvalBundle out;
  out.objective = nlp.objective(x, &out.gradient);
  nlp.equalities(x, out.eq, &out.jac_eq);
  nlp.inequalities(x, out.ineq, &out.jac_ineq);
  return out;
}

EgoTrajectory unpack(const NlpProblem& nlp, const VectorXd& x) {
  if (x.size() != nlp.n_vars())
    throw std::invalid_argument("unpack: decision vector size mismatch");
  const int m = nlp.grid().nodes_M;
  const double h = nlp.grid().dt();
  EgoTrajectory traj;
  traj.grid = nlp.grid();
  traj.states.resize(m);
  traj.controls.resize(m);
  traj.jerks.resize(m - 1);
  for (int i = 0; i < m; ++i) {
    traj.states[i] = vehicle::EgoState{x(var_index(i, kX)), x(var_index(i, kY)),
                                       x(var_index(i, kTheta)), x(var_index(i, kV))};
    traj.controls[i] =
        vehicle::ControlInput{x(var_index(i, kA)), x(var_index(i, kOmega))};
  }
  for (int k = 0; k + 1 < m; ++k)
    traj.jerks(k) = (traj.controls[k + 1].a - traj.controls[k].a) / h;
  return traj;
}

VectorXd pack(const TimeGrid& grid, const EgoTrajectory& traj) {
  const int m = grid.nodes_M;
  if (static_cast<int>(traj.states.size()) != m ||
      static_cast<int>(traj.controls.size()) != m)
    throw std::invalid_argument("pack: trajectory does not match the grid");
  VectorXd x(kVarsPerNode * m);
  for (int i = 0; i < m; ++i) {
    x(var_index(i, kX)) = traj.states[i].x;
    x(var_index(i, kY)) = traj.states[i].y;
    x(var_index(i, kTheta)) = traj.states[i].theta;
    x(var_index(i, kV)) = traj.states[i].v;
    x(var_index(i, kA)) = traj.controls[i].a;
    x(var_index(i, kOmega)) = traj.controls[i].omega;
  }
  return x;
}

}  // namespace refplan::transcribe
