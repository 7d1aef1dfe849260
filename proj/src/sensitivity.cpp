#include "cpb/sensitivity.hpp"

#include <cmath>

#include "cpb/benefit.hpp"

namespace cpb {

SensitivityBand sensitivity_bounds(const Cohort& cohort,
                                   const Eigen::VectorXd& phi,
                                   const PolicyEvaluation& evaluation,
                                   const NuisanceFits& fits, double gamma,
                                   double alpha) {
  if (gamma < 0.0) throw std::invalid_argument("gamma must be >= 0");
  const Eigen::Index n = cohort.n();
  if (phi.size() != n || fits.pi.size() != n ||
      static_cast<Eigen::Index>(evaluation.contacted.size()) != n) {
    throw std::invalid_argument("sensitivity inputs must align with cohort");
  }

  SensitivityBand band;
  band.gamma = gamma;
  band.value = evaluation.value;
  band.width_bound = 2.0 * gamma * evaluation.delta;
  band.gap_bound = optimal_gap_bound(gamma, evaluation.delta);

  const Eigen::VectorXd c_hat = suboptimal_prob(fits);
  double width_sum = 0.0, c_sum = 0.0;
  Eigen::VectorXd width_if(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double contact = evaluation.contacted[static_cast<std::size_t>(i)];
    const double h = fits.h_star[static_cast<std::size_t>(i)];
    const double a = cohort.treatment()[static_cast<std::size_t>(i)];
    width_if(i) = contact * (h + (1.0 - 2.0 * h) * (a - fits.pi(i)));
    width_sum += width_if(i);
    c_sum += contact * c_hat(i);
  }
  band.half_width = gamma * width_sum / static_cast<double>(n);
  band.lower = band.value - band.half_width;
  band.upper = band.value + band.half_width;
  band.contacted_suboptimal = c_sum / static_cast<double>(n);

  // Endpoint standard error: influence term of the value estimator plus the
  // Gamma-scaled empirical-mean term entering the half width.
  const double center = evaluation.value - evaluation.delta * evaluation.threshold;
  const double width_mean = width_sum / static_cast<double>(n);
  double ss_lower = 0.0, ss_upper = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double contact = evaluation.contacted[static_cast<std::size_t>(i)];
    const double value_if = contact * (phi(i) - evaluation.threshold) +
                            cohort.outcome()(i) - center;
    const double width_term = gamma * (width_if(i) - width_mean);
    ss_lower += (value_if - width_term) * (value_if - width_term);
    ss_upper += (value_if + width_term) * (value_if + width_term);
  }
  const double z = normal_quantile(1.0 - alpha / 2.0);
  const double inv_n = 1.0 / static_cast<double>(n);
  band.lower_ci = band.lower - z * std::sqrt(ss_lower * inv_n) * std::sqrt(inv_n);
  band.upper_ci = band.upper + z * std::sqrt(ss_upper * inv_n) * std::sqrt(inv_n);
  return band;
}

double optimal_gap_bound(double gamma, double delta) {
  if (gamma < 0.0) throw std::invalid_argument("gamma must be >= 0");
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("delta must lie in [0, 1]");
  }
  return gamma * (4.0 + delta);
}

}  // namespace cpb
