#ifndef REFPLAN_TRANSCRIBE_HPP
#define REFPLAN_TRANSCRIBE_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "refplan/grid.hpp"
#include "refplan/scenario.hpp"
#include "refplan/vehicle.hpp"

namespace refplan::transcribe {

using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

// Decision-vector layout: node-major, 6 entries per node.
enum Component { kX = 0, kY = 1, kTheta = 2, kV = 3, kA = 4, kOmega = 5 };
constexpr int kVarsPerNode = 6;

inline int var_index(int node, Component c) { return kVarsPerNode * node + c; }

enum class DynamicsKind { Trapezoidal, ForwardEuler };
enum class DistanceKind { DeterministicK, ChanceBand, ChanceSeparation };

// Time-gridded solution form: states and controls at every node, jerks per
// interval (forward differences of a).
struct EgoTrajectory {
  TimeGrid grid;
  std::vector<vehicle::EgoState> states;
  std::vector<vehicle::ControlInput> controls;
  VectorXd jerks;  // M-1
};

struct ConstraintCensus {
  int init_pin = 0;
  int defect = 0;
  int road = 0;
  int speed = 0;
  int angular = 0;
  int accel = 0;
  int jerk = 0;
  int distance = 0;
  int total_eq() const { return init_pin + defect; }
  int total_ineq() const { return road + speed + angular + accel + jerk + distance; }
};

// Grid-aligned target positions consumed by the builder (scenario means or a
// measurement realization).
struct TargetData {
  VectorXd x;
  VectorXd y;
};

// Finite-dimensional program assembled from a scenario. Immutable; the
// evaluators are reentrant and hold no mutable state.
class NlpProblem {
 public:
  int n_vars() const { return n_vars_; }
  int n_eq() const { return n_eq_; }
  int n_ineq() const { return n_ineq_; }
  const VectorXd& lower_bounds() const { return lb_; }
  const VectorXd& upper_bounds() const { return ub_; }
  const ConstraintCensus& census() const { return census_; }
  const TimeGrid& grid() const { return grid_; }
  DynamicsKind dynamics_kind() const { return dynamics_; }
  DistanceKind distance_kind() const { return distance_; }

  double objective(const VectorXd& x, VectorXd* grad = nullptr) const;
  void equalities(const VectorXd& x, VectorXd& c, SpMat* jac = nullptr) const;
  void inequalities(const VectorXd& x, VectorXd& c, SpMat* jac = nullptr) const;

  // Node-station data used by the objective (exposed for tests/diagnostics).
  struct NodeRef {
    double t = 0.0;
    double station = 0.0;     // arc length v_r * t, clamped to the lane
    double wx = 0.0, wy = 0.0;
    double lane_heading = 0.0;
    double tx = 0.0, ty = 0.0;  // target position data
    double band_lo = 0.0, band_hi = 0.0;  // chance bounds (mode-dependent)
  };
  const std::vector<NodeRef>& nodes() const { return nodes_; }
  const vehicle::Limits& limits() const { return limits_; }
  const vehicle::Weights& weights() const { return weights_; }

 private:
  friend NlpProblem build_nlp(const scenario::Scenario&, const TimeGrid&,
                              const vehicle::Weights&, bool, DynamicsKind,
                              const TargetData*);

  int n_vars_ = 0, n_eq_ = 0, n_ineq_ = 0;
  TimeGrid grid_;
  DynamicsKind dynamics_ = DynamicsKind::Trapezoidal;
  DistanceKind distance_ = DistanceKind::DeterministicK;
  geom::LanePtr lane_;
  geom::RoadBounds bounds_;
  vehicle::Limits limits_;
  vehicle::Weights weights_;
  double p_eps_ = 1.0;
  Eigen::Vector4d z_init_ = Eigen::Vector4d::Zero();
  std::vector<NodeRef> nodes_;
  VectorXd lb_, ub_;
  ConstraintCensus census_;
};

// Direct collocation with trapezoidal defects; the continuous-time
// transcription.
NlpProblem build_continuous_nlp(const scenario::Scenario& sc,
                                const TimeGrid& grid,
                                const vehicle::Weights& w, bool stochastic);
NlpProblem build_continuous_nlp(const scenario::Scenario& sc,
                                const TimeGrid& grid,
                                const vehicle::Weights& w, bool stochastic,
                                const TargetData& target);

// Forward-Euler baseline over steps_N nodes spaced dt.
NlpProblem build_discrete_nlp(const scenario::Scenario& sc, int steps_N,
                              double dt, const vehicle::Weights& w,
                              bool stochastic);
NlpProblem build_discrete_nlp(const scenario::Scenario& sc, int steps_N,
                              double dt, const vehicle::Weights& w,
                              bool stochastic, const TargetData& target);

struct EvalBundle {
  double objective = 0.0;
  VectorXd gradient;
  VectorXd eq;
  VectorXd ineq;
  SpMat jac_eq;
  SpMat jac_ineq;
};

// Full evaluation at x: objective, constraint vectors and all derivatives.
EvalBundle evaluate(const NlpProblem& nlp, const VectorXd& x);

// Inverse of the packing map; jerks recomputed from a-differences.
EgoTrajectory unpack(const NlpProblem& nlp, const VectorXd& x);
VectorXd pack(const TimeGrid& grid, const EgoTrajectory& traj);

}  // namespace refplan::transcribe

#endif  // REFPLAN_TRANSCRIBE_HPP
