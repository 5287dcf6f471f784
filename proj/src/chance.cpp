#include "refplan/chance.hpp"

#include <cmath>
#include <stdexcept>

#include "refplan/rng.hpp"

namespace refplan::chance {

namespace {

constexpr double kSqrt1_2 = 0.7071067811865476;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

// Acklam's rational approximation to the inverse normal CDF.
double quantile_seed(double p) {
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425, p_high = 1.0 - p_low;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
            c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > p_high) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
             c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5, r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
         q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z * kSqrt1_2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("quantile probability must lie in (0, 1)");
  double z = quantile_seed(p);
  for (int i = 0; i < 2; ++i) {
    const double pdf = normal_pdf(z);
    if (pdf < 1e-300) break;
    z -= (normal_cdf(z) - p) / pdf;
  }
  return z;
}

DetEquivBounds det_equiv_bounds(double mu_x, double mu_y, double sigma_x,
                                double sigma_y, const ChanceParams& cp) {
  const double mu_sum = mu_x + mu_y;
  const double sigma = std::hypot(sigma_x, sigma_y);
  const double q_hi = sigma > 0.0 ? normal_quantile(cp.alpha / 2.0) : 0.0;
  const double q_lo = sigma > 0.0 ? normal_quantile(1.0 - cp.alpha / 2.0) : 0.0;
  return DetEquivBounds{mu_sum - cp.d_min + sigma * q_lo,
                        mu_sum + cp.d_min + sigma * q_hi};
}

double separation_upper_bound(double mu_x, double mu_y, double sigma_x,
                              double sigma_y, const ChanceParams& cp) {
  const double sigma = std::hypot(sigma_x, sigma_y);
  const double q = sigma > 0.0 ? normal_quantile(1.0 - cp.alpha) : 0.0;
  return mu_x + mu_y - cp.d_min + sigma * q;
}

McEstimate chance_satisfaction_mc(const VectorXd& ego_sum,
                                  const TargetModel& tm,
                                  const ChanceParams& cp, int n_samples,
                                  std::uint64_t seed) {
  const auto n = ego_sum.size();
  if (tm.mu_x.size() != n || tm.mu_y.size() != n)
    throw std::invalid_argument(
        "chance_satisfaction_mc: target grid does not match ego grid");
  if (n_samples < 1000)
    throw std::invalid_argument("chance_satisfaction_mc: n_samples < 1000");
  McEstimate est;
  est.per_node.resize(n);
  Rng rng(seed);
  for (Eigen::Index i = 0; i < n; ++i) {
    long hits = 0;
    for (int s = 0; s < n_samples; ++s) {
      const double xt = tm.mu_x(i) + tm.sigma_x * rng.normal();
      const double yt = tm.mu_y(i) + tm.sigma_y * rng.normal();
      if (std::abs(xt + yt - ego_sum(i)) >= cp.d_min) ++hits;
    }
    est.per_node(i) = static_cast<double>(hits) / n_samples;
  }
  est.horizon_min = n > 0 ? est.per_node.minCoeff() : 1.0;
  return est;
}

}  // namespace refplan::chance
