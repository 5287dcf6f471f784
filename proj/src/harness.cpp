#include "refplan/harness.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "refplan/rng.hpp"
#include "refplan/vehicle.hpp"

namespace refplan::harness {

ViolationReport count_violations(const transcribe::EgoTrajectory& traj,
                                 const VectorXd& target_x,
                                 const VectorXd& target_y, double d_min) {
  const int m = static_cast<int>(traj.states.size());
  if (target_x.size() != m || target_y.size() != m)
    throw std::invalid_argument("count_violations: grid mismatch");
  ViolationReport rep;
  rep.margins.resize(m);
  double sv = 0.0, sa = 0.0, sw = 0.0, sg = 0.0;
  for (int i = 0; i < m; ++i) {
    const auto& z = traj.states[i];
    const double k = vehicle::k_distance(target_x(i), z.x, target_y(i), z.y);
    rep.margins(i) = d_min - k;
    if (rep.margins(i) > 0.0) ++rep.violation_count;
    sv += z.v;
    sa += std::abs(traj.controls[i].a);
    sw += std::abs(traj.controls[i].omega);
    sg += std::hypot(target_x(i) - z.x, target_y(i) - z.y);
  }
  rep.valid_proportion = 1.0 - static_cast<double>(rep.violation_count) / m;
  rep.avg_speed = sv / m;
  rep.avg_accel_mag = sa / m;
  rep.avg_ang_vel_mag = sw / m;
  rep.avg_gap = sg / m;
  return rep;
}

std::string model_name(ModelKind m) {
  switch (m) {
    case ModelKind::ContinuousDeterministic: return "continuous-deterministic";
    case ModelKind::ContinuousStochastic: return "continuous-stochastic";
    case ModelKind::DiscreteDeterministic: return "discrete-deterministic";
    case ModelKind::DiscreteStochastic: return "discrete-stochastic";
  }
  return "unknown";
}

bool model_is_continuous(ModelKind m) {
  return m == ModelKind::ContinuousDeterministic ||
         m == ModelKind::ContinuousStochastic;
}

bool model_is_stochastic(ModelKind m) {
  return m == ModelKind::ContinuousStochastic ||
         m == ModelKind::DiscreteStochastic;
}

std::map<int, int> ExperimentSummary::violation_histogram(ModelKind m) const {
  std::map<int, int> hist;
  for (const auto& r : runs)
    if (r.model == m) ++hist[r.report.violation_count];
  return hist;
}

double ExperimentSummary::mean_violations(ModelKind m) const {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : runs)
    if (r.model == m) {
      sum += r.report.violation_count;
      ++n;
    }
  return n > 0 ? sum / n : 0.0;
}

int ExperimentSummary::converged_count(ModelKind m) const {
  int n = 0;
  for (const auto& r : runs)
    if (r.model == m && r.status == "converged") ++n;
  return n;
}

int ExperimentSummary::run_count(ModelKind m) const {
  int n = 0;
  for (const auto& r : runs)
    if (r.model == m) ++n;
  return n;
}

solver::SolveReport solve_model(const scenario::Scenario& sc,
                                const TimeGrid& grid, ModelKind model,
                                const transcribe::TargetData* target,
                                const solver::SolveOptions& opts) {
  const bool stochastic = model_is_stochastic(model);
  transcribe::NlpProblem nlp;
  if (model_is_continuous(model)) {
    nlp = target ? transcribe::build_continuous_nlp(sc, grid, sc.weights,
                                                    stochastic, *target)
                 : transcribe::build_continuous_nlp(sc, grid, sc.weights,
                                                    stochastic);
  } else {
    nlp = target ? transcribe::build_discrete_nlp(sc, grid.nodes_M, grid.dt(),
                                                  sc.weights, stochastic,
                                                  *target)
                 : transcribe::build_discrete_nlp(sc, grid.nodes_M, grid.dt(),
                                                  sc.weights, stochastic);
  }
  return solver::solve(nlp, solver::initial_guess(sc, grid), opts);
}

namespace {

RunRecord make_record(int run_id, ModelKind model, std::uint64_t scenario_seed,
                      std::uint64_t noise_seed, const scenario::Scenario& sc,
                      const TimeGrid& grid,
                      const transcribe::TargetData* plan_target,
                      const VectorXd& judge_x, const VectorXd& judge_y) {
  RunRecord rec;
  rec.run_id = run_id;
  rec.model = model;
  rec.scenario_seed = scenario_seed;
  rec.noise_seed = noise_seed;
  try {
    const auto rep = solve_model(sc, grid, model, plan_target);
    rec.status = solver::status_name(rep.status);
    rec.report =
        count_violations(*rep.trajectory, judge_x, judge_y, sc.limits.d_min);
    rec.report.wall_time = rep.wall_time;
  } catch (const std::exception&) {
    rec.status = "error";
    rec.report = ViolationReport{};
    rec.report.margins = VectorXd::Zero(grid.nodes_M);
    rec.report.valid_proportion = 0.0;
  }
  return rec;
}

}  // namespace

ExperimentSummary run_experiment1(int n_realizations, const TimeGrid& grid,
                                  std::uint64_t seed_base, int parallelism) {
  ExperimentSummary out;
  out.experiment = "exp1";
  out.grid = grid;
  const scenario::Scenario sc = scenario::make_risky_scenario(seed_base);
  out.runs.resize(2 * n_realizations);
  parallel_for(n_realizations, parallelism, [&](int i) {
    const std::uint64_t noise_seed = seed_base + static_cast<std::uint64_t>(i);
    const auto real = scenario::realize_measurements(sc, grid, noise_seed);
    const transcribe::TargetData td{real.x, real.y};
    out.runs[2 * i] = make_record(2 * i, ModelKind::ContinuousStochastic,
                                  sc.id, noise_seed, sc, grid, &td, real.x,
                                  real.y);
    out.runs[2 * i + 1] = make_record(2 * i + 1, ModelKind::DiscreteStochastic,
                                      sc.id, noise_seed, sc, grid, &td, real.x,
                                      real.y);
  });
  return out;
}

ExperimentSummary run_experiment2(int n_scenarios, const TimeGrid& grid,
                                  std::uint64_t seed_base, int parallelism) {
  ExperimentSummary out;
  out.experiment = "exp2";
  out.grid = grid;
  out.runs.resize(2 * n_scenarios);
  parallel_for(n_scenarios, parallelism, [&](int i) {
    const std::uint64_t scenario_seed = seed_base + static_cast<std::uint64_t>(i);
    const auto sc = scenario::make_urban_scenario(scenario_seed);
    const std::uint64_t noise_seed = mix_seed(scenario_seed, 0x51);
    const auto real = scenario::realize_measurements(sc, grid, noise_seed);
    const transcribe::TargetData td{real.x, real.y};
    out.runs[2 * i] = make_record(2 * i, ModelKind::ContinuousStochastic,
                                  scenario_seed, noise_seed, sc, grid, &td,
                                  real.x, real.y);
    out.runs[2 * i + 1] = make_record(2 * i + 1, ModelKind::DiscreteStochastic,
                                      scenario_seed, noise_seed, sc, grid, &td,
                                      real.x, real.y);
  });
  return out;
}

ExperimentSummary run_deterministic_study(int n_scenarios, const TimeGrid& grid,
                                          std::uint64_t seed_base,
                                          int parallelism) {
  ExperimentSummary out;
  out.experiment = "det-study";
  out.grid = grid;
  constexpr ModelKind kModels[4] = {
      ModelKind::ContinuousDeterministic, ModelKind::DiscreteDeterministic,
      ModelKind::ContinuousStochastic, ModelKind::DiscreteStochastic};
  out.runs.resize(4 * n_scenarios);
  parallel_for(n_scenarios, parallelism, [&](int i) {
    const std::uint64_t scenario_seed = seed_base + static_cast<std::uint64_t>(i);
    const auto sc = scenario::make_urban_scenario(scenario_seed);
    const std::uint64_t noise_seed = mix_seed(scenario_seed, 0x52);
    const auto real = scenario::realize_measurements(sc, grid, noise_seed);
    for (int k = 0; k < 4; ++k) {
      // all variants plan on the scenario means; realized noise judges them
      out.runs[4 * i + k] =
          make_record(4 * i + k, kModels[k], scenario_seed, noise_seed, sc,
                      grid, nullptr, real.x, real.y);
    }
  });
  return out;
}

std::vector<vehicle::Weights> default_sweep_ratios() {
  std::vector<vehicle::Weights> ratios;
  for (int boost = 0; boost < 7; ++boost) {
    vehicle::Weights w;
    double* fields[7] = {&w.w_g, &w.w_v, &w.w_a, &w.w_omega,
                         &w.w_j, &w.w_h, &w.w_p};
    *fields[boost] = 5.0;
    ratios.push_back(w);
  }
  ratios.push_back(vehicle::Weights{});  // 1:1:1:1:1:1:1
  return ratios;
}

std::string ratio_label(const vehicle::Weights& w) {
  std::ostringstream os;
  os << w.w_g << ":" << w.w_v << ":" << w.w_a << ":" << w.w_omega << ":"
     << w.w_j << ":" << w.w_h << ":" << w.w_p;
  return os.str();
}

std::vector<SweepRow> run_weight_sweep(const std::vector<vehicle::Weights>& ratios,
                                       const std::vector<double>& horizons,
                                       int n_scenarios, std::uint64_t seed_base,
                                       int parallelism, int max_nodes) {
  if (ratios.empty()) throw std::invalid_argument("sweep needs ratios");
  std::vector<SweepRow> rows;
  for (const auto& w : ratios) {
    for (double T : horizons) {
      int nodes = static_cast<int>(std::lround(T)) + 1;  // h ~ 1 s
      if (max_nodes > 0) nodes = std::min(nodes, max_nodes);
      const TimeGrid grid{T, nodes};
      std::vector<ViolationReport> reps(n_scenarios);
      std::vector<bool> ok(n_scenarios, false);
      parallel_for(n_scenarios, parallelism, [&](int i) {
        const std::uint64_t seed = seed_base + static_cast<std::uint64_t>(i);
        auto sc = scenario::make_urban_scenario(seed, T);
        sc.weights = w;
        const std::uint64_t noise_seed = mix_seed(seed, 0x53);
        const auto real = scenario::realize_measurements(sc, grid, noise_seed);
        const transcribe::TargetData td{real.x, real.y};
        try {
          const auto rep = solve_model(sc, grid,
                                       ModelKind::ContinuousStochastic, &td);
          reps[i] = count_violations(*rep.trajectory, real.x, real.y,
                                     sc.limits.d_min);
          reps[i].wall_time = rep.wall_time;
          ok[i] = true;
        } catch (const std::exception&) {
          ok[i] = false;
        }
      });
      SweepRow row;
      row.ratio = ratio_label(w);
      row.horizon_T = T;
      for (int i = 0; i < n_scenarios; ++i) {
        if (!ok[i]) continue;
        ++row.n;
        row.mean_wall_time += reps[i].wall_time;
        row.mean_accel += reps[i].avg_accel_mag;
        row.mean_ang_vel += reps[i].avg_ang_vel_mag;
        row.mean_speed += reps[i].avg_speed;
        row.mean_gap += reps[i].avg_gap;
      }
      if (row.n > 0) {
        row.mean_wall_time /= row.n;
        row.mean_accel /= row.n;
        row.mean_ang_vel /= row.n;
        row.mean_speed /= row.n;
        row.mean_gap /= row.n;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<FeasibilityCell> run_feasibility_study(int n_per_cell,
                                                   std::uint64_t seed_base,
                                                   int parallelism,
                                                   int nodes_M) {
  constexpr double kPi = 3.141592653589793;
  const double speeds[2] = {22.0, 36.0};
  const double omegas[3] = {kPi / 6.0, kPi / 4.0, kPi / 2.0};
  std::vector<FeasibilityCell> cells;
  for (double v_r : speeds) {
    for (double om : omegas) {
      for (ModelKind model : {ModelKind::ContinuousStochastic,
                              ModelKind::DiscreteStochastic}) {
        FeasibilityCell cell;
        cell.v_r = v_r;
        cell.omega_max = om;
        cell.model = model;
        cell.n = n_per_cell;
        std::vector<int> conv(std::max(n_per_cell, 1), 0);
        parallel_for(n_per_cell, parallelism, [&](int i) {
          const std::uint64_t seed =
              mix_seed(seed_base, static_cast<std::uint64_t>(
                                      1000 * v_r + 100 * om)) +
              static_cast<std::uint64_t>(i);
          try {
            const auto sc = scenario::make_highspeed_scenario(v_r, om, seed);
            const TimeGrid grid{sc.horizon_T, nodes_M};
            const auto rep = solve_model(sc, grid, model, nullptr);
            conv[i] = rep.status == solver::SolveStatus::Converged ? 1 : 0;
          } catch (const std::exception&) {
            conv[i] = 0;
          }
        });
        for (int i = 0; i < n_per_cell; ++i) cell.converged += conv[i];
        cells.push_back(cell);
      }
    }
  }
  return cells;
}

AlphaValidation alpha_validation(const ExperimentSummary& summary, double alpha,
                                 ModelKind model) {
  AlphaValidation out;
  out.threshold = alpha;
  double sum = 0.0;
  for (const auto& r : summary.runs) {
    if (r.model != model || r.status != "converged") continue;
    ++out.n_runs;
    sum += r.report.valid_proportion;
    if (r.report.valid_proportion >= alpha) ++out.n_meeting;
  }
  if (out.n_runs > 0) {
    out.fraction_meeting = static_cast<double>(out.n_meeting) / out.n_runs;
    out.mean_proportion = sum / out.n_runs;
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_runs_csv(const std::string& path, const ExperimentSummary& summary) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "run_id,model,scenario_seed,noise_seed,status,violations,"
         "valid_proportion,avg_speed,avg_accel,avg_ang_vel,avg_gap,"
         "wall_time_s\n";
  for (const auto& r : summary.runs) {
    out << r.run_id << ',' << model_name(r.model) << ',' << r.scenario_seed
        << ',' << r.noise_seed << ',' << r.status << ','
        << r.report.violation_count << ','
        << format_double(r.report.valid_proportion) << ','
        << format_double(r.report.avg_speed) << ','
        << format_double(r.report.avg_accel_mag) << ','
        << format_double(r.report.avg_ang_vel_mag) << ','
        << format_double(r.report.avg_gap) << ','
        << format_double(r.report.wall_time) << '\n';
  }
}

void write_margins_csv(const std::string& path,
                       const ExperimentSummary& summary) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "run_id,node_index,t,margin_m\n";
  for (const auto& r : summary.runs) {
    for (Eigen::Index i = 0; i < r.report.margins.size(); ++i) {
      out << r.run_id << ',' << i << ','
          << format_double(summary.grid.time(static_cast<int>(i))) << ','
          << format_double(r.report.margins(i)) << '\n';
    }
  }
}

void write_cells_csv(const std::string& path,
                     const std::vector<FeasibilityCell>& cells) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "v_r,omega_max,model,n,converged\n";
  for (const auto& c : cells) {
    out << format_double(c.v_r) << ',' << format_double(c.omega_max) << ','
        << model_name(c.model) << ',' << c.n << ',' << c.converged << '\n';
  }
}

void write_sweep_csv(const std::string& path,
                     const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "ratio,T,n,mean_wall_time_s,mean_accel,mean_ang_vel,mean_speed,"
         "mean_gap\n";
  for (const auto& r : rows) {
    out << r.ratio << ',' << format_double(r.horizon_T) << ',' << r.n << ','
        << format_double(r.mean_wall_time) << ',' << format_double(r.mean_accel)
        << ',' << format_double(r.mean_ang_vel) << ','
        << format_double(r.mean_speed) << ',' << format_double(r.mean_gap)
        << '\n';
  }
}

std::vector<RunsCsvRow> read_runs_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<RunsCsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    RunsCsvRow r;
    auto next = [&]() {
      std::getline(ls, tok, ',');
      return tok;
    };
    r.run_id = std::stoi(next());
    r.model = next();
    r.scenario_seed = std::stoull(next());
    r.noise_seed = std::stoull(next());
    r.status = next();
    r.violations = std::stoi(next());
    r.valid_proportion = std::stod(next());
    r.avg_speed = std::stod(next());
    r.avg_accel = std::stod(next());
    r.avg_ang_vel = std::stod(next());
    r.avg_gap = std::stod(next());
    r.wall_time_s = std::stod(next());
    rows.push_back(r);
  }
  return rows;
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace refplan::harness
