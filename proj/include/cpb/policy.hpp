#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "cpb/errors.hpp"

namespace cpb {

/// Order-statistic budget threshold: with k = floor(delta * n) and descending
/// order statistics, the threshold is the (k+1)-th largest score (or min - 1
/// when k = n). Contact is strict (score > threshold), so ties under-contact.
struct BudgetQuantile {
  double delta = 0.0;
  double threshold = 0.0;
  double contacted_fraction = 0.0;
};

BudgetQuantile budget_quantile(const Eigen::VectorXd& scores, double delta);

/// Contact indicators 1(score > threshold).
std::vector<std::uint8_t> contact_rule(const Eigen::VectorXd& scores,
                                       double threshold);

struct PolicyEvaluation {
  double delta = 0.0;
  double threshold = 0.0;
  double contacted_fraction = 0.0;
  double value = 0.0;
  double sigma = 0.0;  // plug-in sd of the influence term
  double alpha = 0.05;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  std::vector<std::uint8_t> contacted;

  double standard_error(Eigen::Index n) const {
    return sigma / std::sqrt(static_cast<double>(n));
  }
};

/// Value of the thresholded contact rule: mean(contact * phi + y), with the
/// plug-in variance sigma^2 = mean[(contact*(phi - q) + y - (V - delta*q))^2]
/// and a Wald interval at level alpha.
PolicyEvaluation estimate_value(const Eigen::VectorXd& outcome,
                                const Eigen::VectorXd& phi,
                                const Eigen::VectorXd& scores, double delta,
                                double alpha = 0.05);

/// Shared machinery for value estimation when the thresholded scores differ
/// from the pseudo-outcomes entering the average (restricted policies reuse
/// this with their own score/pseudo-outcome pairs).
PolicyEvaluation evaluate_thresholded(const Eigen::VectorXd& outcome,
                                      const Eigen::VectorXd& phi,
                                      const Eigen::VectorXd& scores,
                                      double delta, double alpha);

struct GapReport {
  double gap = 0.0;         // V_1 - V_delta
  double bound = 0.0;       // (1 - delta) * q_{1 - delta}
  bool within_bound = true; // gap <= bound + 2(se_1 + se_delta)
};

GapReport gap_to_unconstrained(const PolicyEvaluation& at_delta,
                               const PolicyEvaluation& at_one, Eigen::Index n);

struct AupbcResult {
  double area = 0.0;            // grid integral of mean(phi * (contact - delta))
  double normalized = 0.0;      // 2 * integral(mean(phi * contact)) / mean(phi) - 1
  bool normalized_defined = true;
  double kappa2 = 0.0;          // variance of the per-unit area influence term
  double zeta2 = 0.0;           // variance for the normalized version
  double area_ci_lower = 0.0, area_ci_upper = 0.0;
  double norm_ci_lower = 0.0, norm_ci_upper = 0.0;
};

/// Trapezoid-rule area estimates over the delta grid (ascending, spanning
/// [0,1] with endpoints included).
AupbcResult aupbc(const Eigen::VectorXd& outcome, const Eigen::VectorXd& phi,
                  const Eigen::VectorXd& scores,
                  const std::vector<double>& grid, double alpha = 0.05);

struct QiniReport {
  std::vector<double> grid;
  std::vector<double> values_raw;
  std::vector<double> values_monotone;  // ascending rearrangement of raw
  std::vector<double> thresholds;
  std::vector<double> standard_errors;
  double alpha = 0.05;
  AupbcResult area;
};

QiniReport qini_curve(const Eigen::VectorXd& outcome,
                      const Eigen::VectorXd& phi,
                      const Eigen::VectorXd& scores,
                      const std::vector<double>& grid, double alpha = 0.05);

std::vector<double> default_delta_grid(int points = 101);

/// Counts of |v| falling into [0,e1), [e1,e2), ... for ascending edges;
/// descriptive margin diagnostic, no inferential claim attached.
std::vector<int> margin_histogram(const Eigen::VectorXd& values,
                                  const std::vector<double>& edges);

double normal_quantile(double p);

}  // namespace cpb
