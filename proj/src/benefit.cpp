#include "cpb/benefit.hpp"

namespace cpb {

double pseudo_outcome(int a, double y, double pi, double mu0, double mu1) {
  if (!(pi > 0.0 && pi < 1.0)) {
    throw NumericError("pseudo-outcome requires propensity in (0,1)");
  }
  const double tau = mu1 - mu0;
  const double h_star = tau > 0.0 ? 1.0 : 0.0;
  const double mu_a = a == 1 ? mu1 : mu0;
  const double ipw = a == 1 ? 1.0 / pi : -1.0 / (1.0 - pi);
  return (h_star - pi) * ipw * (y - mu_a) + tau * (h_star - a);
}

Eigen::VectorXd pseudo_outcomes(const Cohort& cohort,
                                const NuisanceFits& fits) {
  const Eigen::Index n = cohort.n();
  if (fits.pi.size() != n) {
    throw std::invalid_argument("nuisance fits do not match cohort size");
  }
  Eigen::VectorXd phi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    phi(i) = pseudo_outcome(cohort.treatment()[static_cast<std::size_t>(i)],
                            cohort.outcome()(i), fits.pi(i), fits.mu0(i),
                            fits.mu1(i));
  }
  return phi;
}

double CpbModel::predict(const Eigen::VectorXd& view_row) const {
  double sum = 0.0;
  for (const auto& stage : stages_) sum += stage.predict(view_row);
  return sum / static_cast<double>(stages_.size());
}

Eigen::VectorXd CpbModel::predict_rows(const Eigen::MatrixXd& view_rows) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(view_rows.rows());
  for (const auto& stage : stages_) out += stage.predict_rows(view_rows);
  return out / static_cast<double>(stages_.size());
}

CpbModel dr_learn_cpb(const Cohort& cohort, const NuisanceFits& fits,
                      const CovariateView& target, const LearnerSpec& spec,
                      bool swap_average) {
  const Eigen::VectorXd phi = pseudo_outcomes(cohort, fits);
  const Eigen::MatrixXd view = target.matrix();

  CpbModel model;
  if (!swap_average || target.dim() == 0) {
    model.stages_.push_back(fit_regression(spec, view, phi));
    return model;
  }
  // One second-stage fit per fold: a fold's pseudo-outcomes were built from
  // nuisances trained on its complement, so each (nuisance, second-stage)
  // pair sees disjoint data; predictions average across the swaps.
  for (int f = 0; f < fits.folds.k; ++f) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < cohort.n(); ++i) {
      if (fits.folds.assignment[static_cast<std::size_t>(i)] == f) idx.push_back(i);
    }
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(idx.size()), view.cols());
    Eigen::VectorXd targets(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) {
      rows.row(static_cast<Eigen::Index>(r)) = view.row(idx[r]);
      targets(static_cast<Eigen::Index>(r)) = phi(idx[r]);
    }
    model.stages_.push_back(fit_regression(spec, rows, targets));
  }
  return model;
}

Eigen::VectorXd plugin_cpb(const NuisanceFits& fits) {
  Eigen::VectorXd beta(fits.tau.size());
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    const double h = fits.h_star[static_cast<std::size_t>(i)];
    beta(i) = fits.tau(i) * (h - fits.pi(i));
  }
  return beta;
}

Eigen::VectorXd suboptimal_prob(const NuisanceFits& fits) {
  Eigen::VectorXd c(fits.pi.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const double h = fits.h_star[static_cast<std::size_t>(i)];
    c(i) = h * (1.0 - fits.pi(i)) + (1.0 - h) * fits.pi(i);
  }
  return c;
}

}  // namespace cpb
