#ifndef REFPLAN_HARNESS_HPP
#define REFPLAN_HARNESS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "refplan/scenario.hpp"
#include "refplan/solve.hpp"
#include "refplan/transcribe.hpp"

namespace refplan::harness {

using Eigen::VectorXd;

// Per-run violation metrics: margins d_min - K per node plus kinematic
// aggregates of the planned trajectory.
struct ViolationReport {
  VectorXd margins;
  int violation_count = 0;
  double valid_proportion = 1.0;
  double avg_speed = 0.0;      // mean v
  double avg_accel_mag = 0.0;  // mean |a|
  double avg_ang_vel_mag = 0.0;  // mean |omega|
  double avg_gap = 0.0;        // mean Euclidean ego-target distance
  double wall_time = 0.0;      // s, filled by the pipeline
};

ViolationReport count_violations(const transcribe::EgoTrajectory& traj,
                                 const VectorXd& target_x,
                                 const VectorXd& target_y, double d_min);

enum class ModelKind {
  ContinuousDeterministic,
  ContinuousStochastic,
  DiscreteDeterministic,
  DiscreteStochastic,
};
std::string model_name(ModelKind m);
bool model_is_continuous(ModelKind m);
bool model_is_stochastic(ModelKind m);

struct RunRecord {
  int run_id = 0;
  ModelKind model = ModelKind::ContinuousStochastic;
  std::uint64_t scenario_seed = 0;
  std::uint64_t noise_seed = 0;
  std::string status;  // solver status or "error"
  ViolationReport report;
};

struct ExperimentSummary {
  std::string experiment;
  TimeGrid grid;
  std::vector<RunRecord> runs;

  std::map<int, int> violation_histogram(ModelKind m) const;
  double mean_violations(ModelKind m) const;
  int converged_count(ModelKind m) const;
  int run_count(ModelKind m) const;
};

// Builds and solves one model variant of a scenario. When `target` is
// non-null the planner consumes those positions as its target data
// (measurement-fed planning); otherwise it plans on the scenario means.
solver::SolveReport solve_model(const scenario::Scenario& sc,
                                const TimeGrid& grid, ModelKind model,
                                const transcribe::TargetData* target,
                                const solver::SolveOptions& opts = {});

// Experiment 1: many measurement realizations of the single risky scenario;
// continuous- and discrete-stochastic planners consume each realization and
// are judged against it.
ExperimentSummary run_experiment1(int n_realizations, const TimeGrid& grid,
                                  std::uint64_t seed_base, int parallelism = 1);

// Experiment 2: one realization each of n distinct urban scenarios.
ExperimentSummary run_experiment2(int n_scenarios, const TimeGrid& grid,
                                  std::uint64_t seed_base, int parallelism = 1);

// Deterministic-model study: all four model variants plan on the scenario
// means over a mixed-risk corpus and are judged under realized noise.
ExperimentSummary run_deterministic_study(int n_scenarios, const TimeGrid& grid,
                                          std::uint64_t seed_base,
                                          int parallelism = 1);

struct SweepRow {
  std::string ratio;  // "5:1:1:1:1:1:1"
  double horizon_T = 0.0;
  int n = 0;
  double mean_wall_time = 0.0;
  double mean_accel = 0.0;
  double mean_ang_vel = 0.0;
  double mean_speed = 0.0;
  double mean_gap = 0.0;
};

std::vector<vehicle::Weights> default_sweep_ratios();
std::string ratio_label(const vehicle::Weights& w);

// Table-2-style aggregates of the continuous-stochastic model across weight
// ratios and horizons. Grid nodes chosen so h ~ 1 s, capped at max_nodes
// (0 means uncapped).
std::vector<SweepRow> run_weight_sweep(const std::vector<vehicle::Weights>& ratios,
                                       const std::vector<double>& horizons,
                                       int n_scenarios, std::uint64_t seed_base,
                                       int parallelism = 1, int max_nodes = 0);

struct FeasibilityCell {
  double v_r = 0.0;
  double omega_max = 0.0;
  ModelKind model = ModelKind::ContinuousStochastic;
  int n = 0;
  int converged = 0;
};

// Table-3-style feasibility counts over the six (v_r, omega_max) cells.
std::vector<FeasibilityCell> run_feasibility_study(int n_per_cell,
                                                   std::uint64_t seed_base,
                                                   int parallelism = 1,
                                                   int nodes_M = 50);

struct AlphaValidation {
  double threshold = 0.95;
  int n_runs = 0;
  int n_meeting = 0;
  double fraction_meeting = 0.0;
  double mean_proportion = 0.0;
};

// Fraction of runs whose valid proportion reaches alpha, plus the mean
// proportion. Considers converged runs of the given model.
AlphaValidation alpha_validation(const ExperimentSummary& summary, double alpha,
                                 ModelKind model);

// ---- CSV / JSON output --------------------------------------------------

// Shortest round-trip decimal formatting.
std::string format_double(double v);

void write_runs_csv(const std::string& path, const ExperimentSummary& summary);
void write_margins_csv(const std::string& path,
                       const ExperimentSummary& summary);
void write_cells_csv(const std::string& path,
                     const std::vector<FeasibilityCell>& cells);
void write_sweep_csv(const std::string& path,
                     const std::vector<SweepRow>& rows);

// Parses a runs.csv written by write_runs_csv (numeric fields exact).
struct RunsCsvRow {
  int run_id;
  std::string model;
  std::uint64_t scenario_seed;
  std::uint64_t noise_seed;
  std::string status;
  int violations;
  double valid_proportion;
  double avg_speed;
  double avg_accel;
  double avg_ang_vel;
  double avg_gap;
  double wall_time_s;
};
std::vector<RunsCsvRow> read_runs_csv(const std::string& path);

// Maps f(0..n-1) over a worker pool; results must be written to
// pre-allocated per-index slots so the outcome is schedule-independent.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace refplan::harness

#endif  // REFPLAN_HARNESS_HPP
