#ifndef REFPLAN_SOLVE_HPP
#define REFPLAN_SOLVE_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "refplan/scenario.hpp"
#include "refplan/transcribe.hpp"

namespace refplan::solver {

using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

enum class SolveStatus { Converged, Infeasible, IterLimit, TimeLimit };
const char* status_name(SolveStatus s);

struct SolveOptions {
  int max_outer_iters = 50;
  int max_inner_iters = 200;
  double kkt_tol = 1e-4;
  double feas_tol = 1e-6;
  double penalty_init = 10.0;
  double penalty_growth = 10.0;
  double time_limit = std::numeric_limits<double>::infinity();  // s
};

struct OuterRecord {
  double merit_start = 0.0;  // augmented Lagrangian at the iterate entering
  double merit_end = 0.0;    // ... and leaving this outer iteration
  double kkt = 0.0;
  double violation = 0.0;
  double penalty = 0.0;
  int inner_iters = 0;
};

struct SolveReport {
  SolveStatus status = SolveStatus::IterLimit;
  int iterations = 0;  // total inner (quasi-Newton) iterations
  double kkt_residual = std::numeric_limits<double>::infinity();
  double max_violation = std::numeric_limits<double>::infinity();
  double objective = std::numeric_limits<double>::quiet_NaN();
  double wall_time = 0.0;  // s
  VectorXd solution;
  std::optional<transcribe::EgoTrajectory> trajectory;
  std::vector<OuterRecord> outer_trace;
};

// Generic constrained problem view consumed by the solver. Equality and
// inequality callbacks may be empty when the corresponding count is zero;
// inequalities are feasible iff <= 0. Bound vectors may be empty (all free).
struct ProblemFunctions {
  int n_vars = 0;
  int n_eq = 0;
  int n_ineq = 0;
  VectorXd lb, ub;
  std::function<double(const VectorXd&, VectorXd*)> objective;
  std::function<void(const VectorXd&, VectorXd&, SpMat*)> equalities;
  std::function<void(const VectorXd&, VectorXd&, SpMat*)> inequalities;
};

// Augmented-Lagrangian outer loop (equality multipliers, squared-hinge
// inequality terms) around an L-BFGS inner minimizer with Armijo
// backtracking. Deterministic for fixed inputs.
SolveReport solve(const ProblemFunctions& prob, const VectorXd& x0,
                  const SolveOptions& opts = {});

SolveReport solve(const transcribe::NlpProblem& nlp, const VectorXd& x0,
                  const SolveOptions& opts = {});

// Lane-following start: states along the center lane at arc length v_r * t
// with the lane heading and v = v_r; all controls zero.
VectorXd initial_guess(const scenario::Scenario& sc, const TimeGrid& grid);

}  // namespace refplan::solver

#endif  // REFPLAN_SOLVE_HPP
