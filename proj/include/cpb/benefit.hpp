#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cpb/dataset.hpp"
#include "cpb/nuisance.hpp"

namespace cpb {

/// Doubly-robust pseudo-outcome for one unit:
///   (h* - pi)[a/pi - (1-a)/(1-pi)](y - mu_a) + tau(h* - a).
/// Its conditional mean equals the potential-benefit score beta = tau(h* - pi).
double pseudo_outcome(int a, double y, double pi, double mu0, double mu1);

/// Per-unit pseudo-outcomes from cross-fitted nuisances.
Eigen::VectorXd pseudo_outcomes(const Cohort& cohort, const NuisanceFits& fits);

/// Second-stage regression of pseudo-outcomes on a covariate view, one model
/// per fold with predictions averaged (the swap-and-average scheme). With
/// swap_average = false a single pooled regression is used instead.
class CpbModel {
 public:
  double predict(const Eigen::VectorXd& view_row) const;
  Eigen::VectorXd predict_rows(const Eigen::MatrixXd& view_rows) const;

 private:
  friend CpbModel dr_learn_cpb(const Cohort&, const NuisanceFits&,
                               const CovariateView&, const LearnerSpec&, bool);
  std::vector<FittedRegression> stages_;
};

CpbModel dr_learn_cpb(const Cohort& cohort, const NuisanceFits& fits,
                      const CovariateView& target, const LearnerSpec& spec,
                      bool swap_average = true);

/// Plug-in score tau(h* - pi) per unit; non-negative by construction.
Eigen::VectorXd plugin_cpb(const NuisanceFits& fits);

/// Probability of naturally receiving the suboptimal arm:
/// c = h*(1 - pi) + (1 - h*)pi.
Eigen::VectorXd suboptimal_prob(const NuisanceFits& fits);

}  // namespace cpb
