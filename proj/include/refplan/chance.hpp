#ifndef REFPLAN_CHANCE_HPP
#define REFPLAN_CHANCE_HPP

#include <Eigen/Dense>
#include <cstdint>

namespace refplan::chance {

using Eigen::VectorXd;

// Gaussian target-position model: per-node means plus horizon-constant
// standard deviations.
struct TargetModel {
  VectorXd mu_x;  // m, one entry per node
  VectorXd mu_y;  // m, one entry per node
  double sigma_x = 1.0;
  double sigma_y = 1.0;
};

enum class ChanceMode { PaperLiteral, Separation };

struct ChanceParams {
  double alpha = 0.95;  // in (0.5, 1)
  double d_min = 5.0;   // m, > 0
  ChanceMode mode = ChanceMode::PaperLiteral;
};

// Standard normal CDF.
double normal_cdf(double z);

// Inverse standard normal CDF; rational approximation refined by Newton
// steps on the erfc-based CDF, absolute error well below 1e-7. Throws
// std::domain_error outside (0, 1).
double normal_quantile(double p);

struct DetEquivBounds {
  double lower;
  double upper;
};

// Deterministic-equivalent band on the ego coordinate sum x + y:
//   upper = mu_x + mu_y + d_min + sqrt(sx^2+sy^2) * F^-1(alpha/2)
//   lower = mu_x + mu_y - d_min + sqrt(sx^2+sy^2) * F^-1(1-alpha/2)
DetEquivBounds det_equiv_bounds(double mu_x, double mu_y, double sigma_x,
                                double sigma_y, const ChanceParams& cp);

// One-sided trailing-separation bound:
//   x + y <= mu_x + mu_y - d_min + sqrt(sx^2+sy^2) * F^-1(1-alpha)
double separation_upper_bound(double mu_x, double mu_y, double sigma_x,
                              double sigma_y, const ChanceParams& cp);

struct McEstimate {
  VectorXd per_node;   // estimated P(|x_tgt - x + y_tgt - y| >= d_min)
  double horizon_min;  // min over nodes
};

// Monte-Carlo estimate of the per-node chance-constraint satisfaction for
// given ego coordinate sums. Deterministic for a fixed seed.
McEstimate chance_satisfaction_mc(const VectorXd& ego_sum,
                                  const TargetModel& tm,
                                  const ChanceParams& cp, int n_samples,
                                  std::uint64_t seed);

}  // namespace refplan::chance

#endif  // REFPLAN_CHANCE_HPP
