#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "cpb/dataset.hpp"
#include "cpb/learners.hpp"

namespace cpb {

/// Cross-fitted per-unit nuisance predictions: each unit's values come from
/// models fitted without that unit's fold.
struct NuisanceFits {
  Eigen::VectorXd pi;    // clipped to [eps, 1 - eps]
  Eigen::VectorXd mu0;
  Eigen::VectorXd mu1;
  Eigen::VectorXd tau;   // mu1 - mu0
  std::vector<int> h_star;  // 1(tau > 0)
  double eps = 0.01;
  FoldAssignment folds;
};

/// K-fold cross-fitting of the propensity and both arm-wise outcome
/// regressions. Throws PositivityError when a training complement lacks an
/// arm, std::invalid_argument for eps outside (0, 0.5).
NuisanceFits crossfit_nuisances(const Cohort& cohort,
                                const FoldAssignment& folds,
                                const LearnerSpec& spec_propensity,
                                const LearnerSpec& spec_outcome,
                                double eps = 0.01);

void save_nuisances_csv(const NuisanceFits& fits, const Eigen::VectorXd& phi,
                        const Eigen::VectorXd& beta, const std::string& path);

}  // namespace cpb
