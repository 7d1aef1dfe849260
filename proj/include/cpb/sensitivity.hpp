#pragma once

#include <Eigen/Dense>

#include "cpb/nuisance.hpp"
#include "cpb/policy.hpp"

namespace cpb {

/// Sharp value band under the outcome-based confounding model
/// |nu_a - mu_a| <= Gamma:
///   V_hat +/- Gamma * mean[contact * (h* + (1 - 2h*)(a - pi))].
struct SensitivityBand {
  double gamma = 0.0;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double half_width = 0.0;
  double width_bound = 0.0;       // 2 * Gamma * delta
  double gap_bound = 0.0;         // Gamma * (4 + delta)
  double contacted_suboptimal = 0.0;  // mean(contact * c), should be <= delta
  double lower_ci = 0.0;          // Wald endpoints for the band limits
  double upper_ci = 0.0;
};

SensitivityBand sensitivity_bounds(const Cohort& cohort,
                                   const Eigen::VectorXd& phi,
                                   const PolicyEvaluation& evaluation,
                                   const NuisanceFits& fits, double gamma,
                                   double alpha = 0.05);

/// Bound on the value gap to the (unidentified) confounding-optimal rule.
double optimal_gap_bound(double gamma, double delta);

}  // namespace cpb
