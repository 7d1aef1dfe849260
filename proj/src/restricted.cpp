#include "cpb/restricted.hpp"

namespace cpb {

namespace {

// Fold-wise second-stage smoothing of a per-unit target onto the view, with
// predictions averaged across the per-fold models (same scheme as the
// unrestricted second stage, so identity views reproduce it exactly).
Eigen::VectorXd fold_smooth(const Cohort& cohort, const FoldAssignment& folds,
                            const CovariateView& view,
                            const Eigen::VectorXd& targets,
                            const LearnerSpec& spec) {
  const Eigen::MatrixXd w = view.matrix();
  const Eigen::Index n = cohort.n();
  if (view.dim() == 0) {
    return Eigen::VectorXd::Constant(n, targets.mean());
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int f = 0; f < folds.k; ++f) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (folds.assignment[static_cast<std::size_t>(i)] == f) idx.push_back(i);
    }
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(idx.size()), w.cols());
    Eigen::VectorXd t(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) {
      rows.row(static_cast<Eigen::Index>(r)) = w.row(idx[r]);
      t(static_cast<Eigen::Index>(r)) = targets(idx[r]);
    }
    out += fit_regression(spec, rows, t).predict_rows(w);
  }
  return out / static_cast<double>(folds.k);
}

Eigen::VectorXd pseudo_with_policy(const Cohort& cohort,
                                   const NuisanceFits& fits,
                                   const std::vector<int>& h) {
  const Eigen::Index n = cohort.n();
  Eigen::VectorXd phi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int a = cohort.treatment()[static_cast<std::size_t>(i)];
    const double pi = fits.pi(i);
    const double hw = h[static_cast<std::size_t>(i)];
    const double mu_a = a == 1 ? fits.mu1(i) : fits.mu0(i);
    const double ipw = a == 1 ? 1.0 / pi : -1.0 / (1.0 - pi);
    phi(i) = (hw - pi) * ipw * (cohort.outcome()(i) - mu_a) +
             fits.tau(i) * (hw - a);
  }
  return phi;
}

}  // namespace

RestrictedScores restricted_scores_both(const Cohort& cohort,
                                        const NuisanceFits& fits,
                                        const CovariateView& view,
                                        const LearnerSpec& spec) {
  RestrictedScores scores;
  scores.mode = RestrictionMode::kBoth;

  if (view.is_identity()) {
    // Identity coarsening: re-smoothing tau would only add second-stage
    // noise, so the unrestricted policy carries over unchanged.
    scores.h = fits.h_star;
  } else {
    const Eigen::VectorXd tau_w =
        fold_smooth(cohort, fits.folds, view, fits.tau, spec);
    scores.h.resize(static_cast<std::size_t>(cohort.n()));
    for (Eigen::Index i = 0; i < cohort.n(); ++i) {
      scores.h[static_cast<std::size_t>(i)] = tau_w(i) > 0.0 ? 1 : 0;
    }
  }
  scores.pseudo = pseudo_with_policy(cohort, fits, scores.h);
  scores.score = fold_smooth(cohort, fits.folds, view, scores.pseudo, spec);
  return scores;
}

Eigen::VectorXd restricted_plugin_both(const Cohort& cohort,
                                       const NuisanceFits& fits,
                                       const CovariateView& view,
                                       const LearnerSpec& spec) {
  const Eigen::VectorXd tau_w =
      fold_smooth(cohort, fits.folds, view, fits.tau, spec);
  const Eigen::VectorXd xi_w = fold_smooth(
      cohort, fits.folds, view,
      (fits.tau.array() * fits.pi.array()).matrix(), spec);
  Eigen::VectorXd beta_w(cohort.n());
  for (Eigen::Index i = 0; i < cohort.n(); ++i) {
    beta_w(i) = tau_w(i) * (tau_w(i) > 0.0 ? 1.0 : 0.0) - xi_w(i);
  }
  return beta_w;
}

RestrictedScores restricted_scores_contact_only(const Cohort& cohort,
                                                const NuisanceFits& fits,
                                                const Eigen::VectorXd& phi,
                                                const CovariateView& view,
                                                const LearnerSpec& spec) {
  if (phi.size() != cohort.n()) {
    throw std::invalid_argument("pseudo-outcomes must align with cohort");
  }
  RestrictedScores scores;
  scores.mode = RestrictionMode::kContactOnly;
  scores.h = fits.h_star;
  scores.pseudo = phi;
  scores.score = fold_smooth(cohort, fits.folds, view, phi, spec);
  return scores;
}

PolicyEvaluation restricted_value(const Eigen::VectorXd& outcome,
                                  const RestrictedScores& scores, double delta,
                                  double alpha) {
  return evaluate_thresholded(outcome, scores.pseudo, scores.score, delta,
                              alpha);
}

AupbcResult restricted_aupbc(const Eigen::VectorXd& outcome,
                             const RestrictedScores& scores,
                             const std::vector<double>& grid, double alpha) {
  if (scores.mode != RestrictionMode::kContactOnly) {
    throw std::invalid_argument(
        "restricted area metric requires contact-only scores; both-restricted "
        "values are not comparable to the unrestricted curve");
  }
  return aupbc(outcome, scores.pseudo, scores.score, grid, alpha);
}

}  // namespace cpb
