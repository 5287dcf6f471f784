#include "refplan/solve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace refplan::solver {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Workspace evaluating the PHR augmented Lagrangian
//   L_A = f + lam.ce + (rho/2)|ce|^2 + (1/2rho) sum(max(0, mu + rho ci)^2 - mu^2)
// with variable bounds folded in as extra hinge rows.
class AugLag {
 public:
  AugLag(const ProblemFunctions& p, const SolveOptions& opts)
      : p_(p), opts_(opts) {
    for (int i = 0; i < p_.n_vars; ++i) {
      if (p_.lb.size() == p_.n_vars && std::isfinite(p_.lb(i)))
        bound_rows_.push_back({i, -1.0, p_.lb(i)});
      if (p_.ub.size() == p_.n_vars && std::isfinite(p_.ub(i)))
        bound_rows_.push_back({i, 1.0, p_.ub(i)});
    }
    lam_ = VectorXd::Zero(p_.n_eq);
    mu_ = VectorXd::Zero(p_.n_ineq + static_cast<int>(bound_rows_.size()));
    rho_ = opts.penalty_init;
  }

  int n_hinge() const { return static_cast<int>(mu_.size()); }

  // lb - x <= 0 (sign -1) or x - ub <= 0 (sign +1)
  struct BoundRow {
    int var;
    double sign;
    double limit;
  };

  void eval_constraints(const VectorXd& x, VectorXd& ce, VectorXd& ci) const {
    if (p_.n_eq > 0)
      p_.equalities(x, ce, nullptr);
    else
      ce.resize(0);
    VectorXd user;
    if (p_.n_ineq > 0)
      p_.inequalities(x, user, nullptr);
    else
      user.resize(0);
    ci.resize(n_hinge());
    ci.head(p_.n_ineq) = user;
    for (std::size_t b = 0; b < bound_rows_.size(); ++b) {
      const BoundRow& r = bound_rows_[b];
      ci(p_.n_ineq + static_cast<int>(b)) =
          r.sign > 0 ? x(r.var) - r.limit : r.limit - x(r.var);
    }
  }

  double value(const VectorXd& x) const {
    const double f = p_.objective(x, nullptr);
    VectorXd ce, ci;
    eval_constraints(x, ce, ci);
    double val = f;
    if (ce.size() > 0) val += lam_.dot(ce) + 0.5 * rho_ * ce.squaredNorm();
    for (Eigen::Index i = 0; i < ci.size(); ++i) {
      const double t = std::max(0.0, mu_(i) + rho_ * ci(i));
      val += (t * t - mu_(i) * mu_(i)) / (2.0 * rho_);
    }
    if (!std::isfinite(val)) val = std::numeric_limits<double>::infinity();
    return val;
  }

  double value_and_grad(const VectorXd& x, VectorXd& grad) const {
    const double f = p_.objective(x, &grad);
    double val = f;
    if (p_.n_eq > 0) {
      VectorXd ce;
      SpMat je;
      p_.equalities(x, ce, &je);
      val += lam_.dot(ce) + 0.5 * rho_ * ce.squaredNorm();
      grad.noalias() += je.transpose() * (lam_ + rho_ * ce);
    }
    VectorXd ci(n_hinge());
    if (p_.n_ineq > 0) {
      VectorXd user;
      SpMat ji;
      p_.inequalities(x, user, &ji);
      ci.head(p_.n_ineq) = user;
      VectorXd y(p_.n_ineq);
      for (int i = 0; i < p_.n_ineq; ++i)
        y(i) = std::max(0.0, mu_(i) + rho_ * user(i));
      grad.noalias() += ji.transpose() * y;
      for (int i = 0; i < p_.n_ineq; ++i)
        val += (y(i) * y(i) - mu_(i) * mu_(i)) / (2.0 * rho_);
    }
    for (std::size_t b = 0; b < bound_rows_.size(); ++b) {
      const BoundRow& r = bound_rows_[b];
      const int i = p_.n_ineq + static_cast<int>(b);
      const double c = r.sign > 0 ? x(r.var) - r.limit : r.limit - x(r.var);
      const double t = std::max(0.0, mu_(i) + rho_ * c);
      val += (t * t - mu_(i) * mu_(i)) / (2.0 * rho_);
      grad(r.var) += t * r.sign;
    }
    return val;
  }

  // First-order residuals at x with candidate multipliers lam+, mu+.
  // Stationarity is scaled by the objective-gradient magnitude so the
  // tolerance means the same thing across differently scaled problems.
  struct Kkt {
    double stationarity;
    double violation;
  };
  Kkt kkt_with_updated_multipliers(const VectorXd& x, VectorXd& lam_next,
                                   VectorXd& mu_next) const {
    VectorXd grad;
    p_.objective(x, &grad);
    const double scale = std::max(1.0, grad.cwiseAbs().maxCoeff());
    double viol = 0.0;
    if (p_.n_eq > 0) {
      VectorXd ce;
      SpMat je;
      p_.equalities(x, ce, &je);
      lam_next = lam_ + rho_ * ce;
      grad.noalias() += je.transpose() * lam_next;
      viol = std::max(viol, ce.cwiseAbs().maxCoeff());
    } else {
      lam_next.resize(0);
    }
    mu_next.resize(n_hinge());
    if (p_.n_ineq > 0) {
      VectorXd user;
      SpMat ji;
      p_.inequalities(x, user, &ji);
      for (int i = 0; i < p_.n_ineq; ++i) {
        mu_next(i) = std::max(0.0, mu_(i) + rho_ * user(i));
        viol = std::max(viol, user(i));
      }
      grad.noalias() += ji.transpose() * mu_next.head(p_.n_ineq);
    }
    for (std::size_t b = 0; b < bound_rows_.size(); ++b) {
      const BoundRow& r = bound_rows_[b];
      const int i = p_.n_ineq + static_cast<int>(b);
      const double c = x(r.var) * r.sign - r.limit * r.sign;
      mu_next(i) = std::max(0.0, mu_(i) + rho_ * c);
      grad(r.var) += mu_next(i) * r.sign;
      viol = std::max(viol, c);
    }
    return Kkt{grad.cwiseAbs().maxCoeff() / scale, std::max(viol, 0.0)};
  }

  double gradient_scale(const VectorXd& x) const {
    VectorXd grad;
    p_.objective(x, &grad);
    return std::max(1.0, grad.cwiseAbs().maxCoeff());
  }

  void adopt(const VectorXd& lam, const VectorXd& mu) {
    lam_ = lam;
    mu_ = mu;
  }
  double rho() const { return rho_; }
  void grow_rho() { rho_ = std::min(rho_ * opts_.penalty_growth, 1e12); }

  // Diagonal curvature estimate of the AL at x (objective floor plus the
  // Gauss-Newton penalty contribution); preconditions the inner L-BFGS.
  VectorXd precondition_diag(const VectorXd& x) const {
    VectorXd d = VectorXd::Constant(p_.n_vars, 1.0);
    if (p_.n_eq > 0) {
      VectorXd ce;
      SpMat je;
      p_.equalities(x, ce, &je);
      for (int k = 0; k < je.outerSize(); ++k)
        for (SpMat::InnerIterator it(je, k); it; ++it)
          d(it.col()) += rho_ * it.value() * it.value();
    }
    if (p_.n_ineq > 0) {
      VectorXd ci;
      SpMat ji;
      p_.inequalities(x, ci, &ji);
      for (int k = 0; k < ji.outerSize(); ++k)
        for (SpMat::InnerIterator it(ji, k); it; ++it)
          if (mu_(it.row()) + rho_ * ci(it.row()) > 0.0)
            d(it.col()) += rho_ * it.value() * it.value();
    }
    for (std::size_t b = 0; b < bound_rows_.size(); ++b) {
      const BoundRow& r = bound_rows_[b];
      const int i = p_.n_ineq + static_cast<int>(b);
      const double c = x(r.var) * r.sign - r.limit * r.sign;
      if (mu_(i) + rho_ * c > 0.0) d(r.var) += rho_;
    }
    return d;
  }

 private:
  const ProblemFunctions& p_;
  const SolveOptions& opts_;
  std::vector<BoundRow> bound_rows_;
  VectorXd lam_, mu_;
  double rho_;
};

// L-BFGS with diagonal initial metric and Armijo backtracking; returns
// inner iterations used.
int lbfgs_minimize(const AugLag& al, VectorXd& x, const VectorXd& precond,
                   double grad_tol, int max_iters, Clock::time_point t0,
                   double time_limit) {
  constexpr int kMemory = 10;
  constexpr double kArmijoC = 1e-4;
  std::deque<VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  const VectorXd dinv = precond.cwiseInverse();

  VectorXd grad(x.size());
  double f = al.value_and_grad(x, grad);
  if (!std::isfinite(f)) throw std::runtime_error("non-finite merit at start");

  int it = 0;
  for (; it < max_iters; ++it) {
    if (grad.cwiseAbs().maxCoeff() <= grad_tol) break;
    if ((it & 15) == 0 && seconds_since(t0) > time_limit) break;

    // two-loop recursion with H0 = gamma * diag(precond)^-1
    VectorXd q = grad;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q.noalias() -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty()) {
      const VectorXd& y = y_hist.back();
      const double gamma =
          s_hist.back().dot(y) / y.dot(dinv.cwiseProduct(y));
      q = gamma * dinv.cwiseProduct(q);
    } else {
      q = dinv.cwiseProduct(q);
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q.noalias() += (alpha[i] - beta) * s_hist[i];
    }
    VectorXd dir = -q;
    double slope = grad.dot(dir);
    if (slope >= 0.0) {  // safeguard: fall back to steepest descent
      dir = -grad;
      slope = -grad.squaredNorm();
    }

    double step = 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    VectorXd x_new;
    for (int ls = 0; ls < 50; ++ls) {
      x_new = x + step * dir;
      f_new = al.value(x_new);
      if (f_new <= f + kArmijoC * step * slope) break;
      step *= 0.5;
    }
    if (!(f_new <= f + kArmijoC * step * slope)) break;  // line search failed

    VectorXd grad_new(x.size());
    const double f_check = al.value_and_grad(x_new, grad_new);
    (void)f_check;
    const VectorXd s = x_new - x;
    const VectorXd y = grad_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > kMemory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    x = x_new;
    grad = grad_new;
    const double df = f - f_new;
    f = f_new;
    if (df < 1e-16 * (1.0 + std::abs(f))) break;  // stalled
  }
  return it;
}

}  // namespace

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::IterLimit: return "iter_limit";
    case SolveStatus::TimeLimit: return "time_limit";
  }
  return "unknown";
}

SolveReport solve(const ProblemFunctions& prob, const VectorXd& x0,
                  const SolveOptions& opts) {
  if (x0.size() != prob.n_vars)
    throw std::invalid_argument("solve: x0 size does not match n_vars");
  const auto t0 = Clock::now();

  {
    VectorXd g;
    const double f0 = prob.objective(x0, &g);
    if (!std::isfinite(f0))
      throw std::runtime_error("solve: objective non-finite at x0");
    for (Eigen::Index i = 0; i < g.size(); ++i)
      if (!std::isfinite(g(i)))
        throw std::runtime_error("solve: gradient non-finite at x0, index " +
                                 std::to_string(i));
  }

  AugLag al(prob, opts);
  SolveReport rep;
  VectorXd x = x0;

  // inner tolerance tightens as the outer loop progresses; multipliers
  // update every iteration and the penalty grows only when the violation
  // stops contracting
  double viol_prev = std::numeric_limits<double>::infinity();
  double omega = 0.1;

  for (int outer = 0; outer < opts.max_outer_iters; ++outer) {
    OuterRecord rec;
    rec.penalty = al.rho();
    rec.merit_start = al.value(x);

    const double inner_tol =
        std::max(omega, 0.3 * opts.kkt_tol) * al.gradient_scale(x);
    rec.inner_iters =
        lbfgs_minimize(al, x, al.precondition_diag(x), inner_tol,
                       opts.max_inner_iters, t0, opts.time_limit);
    rep.iterations += rec.inner_iters;
    rec.merit_end = al.value(x);

    VectorXd lam_next, mu_next;
    const auto kkt = al.kkt_with_updated_multipliers(x, lam_next, mu_next);
    rec.kkt = kkt.stationarity;
    rec.violation = kkt.violation;
    rep.outer_trace.push_back(rec);
    rep.kkt_residual = kkt.stationarity;
    rep.max_violation = kkt.violation;

    if (kkt.stationarity <= opts.kkt_tol && kkt.violation <= opts.feas_tol) {
      rep.status = SolveStatus::Converged;
      break;
    }
    if (seconds_since(t0) > opts.time_limit) {
      rep.status = SolveStatus::TimeLimit;
      break;
    }
    if (al.rho() > 1e10 && kkt.violation > 100.0 * opts.feas_tol) {
      rep.status = SolveStatus::Infeasible;
      break;
    }

    al.adopt(lam_next, mu_next);
    // grow the penalty on stagnation, but once nearly feasible leave the
    // work to the multiplier updates: high penalties only degrade the
    // inner conditioning there
    const bool stagnant =
        kkt.violation > std::max(0.5 * viol_prev, opts.feas_tol);
    const bool near_feasible = kkt.violation <= 100.0 * opts.feas_tol;
    if (stagnant && !(near_feasible && al.rho() >= 1e5)) al.grow_rho();
    viol_prev = kkt.violation;
    omega = std::max(0.2 * omega, 0.25 * opts.kkt_tol);
  }

  rep.solution = x;
  rep.objective = prob.objective(x, nullptr);
  rep.wall_time = seconds_since(t0);
  return rep;
}

SolveReport solve(const transcribe::NlpProblem& nlp, const VectorXd& x0,
                  const SolveOptions& opts) {
  ProblemFunctions p;
  p.n_vars = nlp.n_vars();
  p.n_eq = nlp.n_eq();
  p.n_ineq = nlp.n_ineq();
  p.lb = nlp.lower_bounds();
  p.ub = nlp.upper_bounds();
  p.objective = [&nlp](const VectorXd& x, VectorXd* g) {
    return nlp.objective(x, g);
  };
  p.equalities = [&nlp](const VectorXd& x, VectorXd& c, SpMat* j) {
    nlp.equalities(x, c, j);
  };
  p.inequalities = [&nlp](const VectorXd& x, VectorXd& c, SpMat* j) {
    nlp.inequalities(x, c, j);
  };
  SolveReport rep = solve(p, x0, opts);
  rep.trajectory = transcribe::unpack(nlp, rep.solution);
  return rep;
}

VectorXd initial_guess(const scenario::Scenario& sc, const TimeGrid& grid) {
  grid.validate();
  const int m = grid.nodes_M;
  VectorXd x = VectorXd::Zero(transcribe::kVarsPerNode * m);
  double prev_heading = 0.0;
  for (int i = 0; i < m; ++i) {
    const auto wq = geom::waypoint_at(*sc.lane, grid.time(i), sc.limits.v_r);
    // keep headings continuous (unwrapped) so collocation defects stay smooth
    double th = wq.point.theta;
    if (i > 0) th = prev_heading + geom::wrap_angle(th - prev_heading);
    prev_heading = th;
    x(transcribe::var_index(i, transcribe::kX)) = wq.point.x;
    x(transcribe::var_index(i, transcribe::kY)) = wq.point.y;
    x(transcribe::var_index(i, transcribe::kTheta)) = th;
    x(transcribe::var_index(i, transcribe::kV)) = sc.limits.v_r;
  }
  return x;
}

}  // namespace refplan::solver
