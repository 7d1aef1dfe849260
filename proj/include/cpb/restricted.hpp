#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cpb/benefit.hpp"
#include "cpb/dataset.hpp"
#include "cpb/nuisance.hpp"
#include "cpb/policy.hpp"

namespace cpb {

enum class RestrictionMode {
  kBoth,         // contact rule and policy depend only on W
  kContactOnly,  // contact rule depends on W, policy stays unrestricted
};

/// Per-unit restricted priority scores and the pseudo-outcome that enters the
/// value average; both are functions of the selected view only.
struct RestrictedScores {
  RestrictionMode mode = RestrictionMode::kBoth;
  Eigen::VectorXd score;        // beta_w (both) or conditional-mean score (contact-only)
  Eigen::VectorXd pseudo;       // phi_w (both) or the unrestricted phi (contact-only)
  std::vector<int> h;           // h*_w (both) or h* (contact-only)
};

/// Both-restricted scores: smooth tau onto W, derive h*_w, rebuild the
/// pseudo-outcome with h*_w, then regress it on W (the robust route).
RestrictedScores restricted_scores_both(const Cohort& cohort,
                                        const NuisanceFits& fits,
                                        const CovariateView& view,
                                        const LearnerSpec& spec);

/// Debug-path plug-in tau_w * h*_w - xi_w with xi_w from regressing tau*pi on W.
Eigen::VectorXd restricted_plugin_both(const Cohort& cohort,
                                       const NuisanceFits& fits,
                                       const CovariateView& view,
                                       const LearnerSpec& spec);

/// Contact-only scores: regress the unrestricted pseudo-outcome on W.
RestrictedScores restricted_scores_contact_only(const Cohort& cohort,
                                                const NuisanceFits& fits,
                                                const Eigen::VectorXd& phi,
                                                const CovariateView& view,
                                                const LearnerSpec& spec);

/// Value of the restricted rule at budget delta; the mode's pseudo-outcome
/// and matching plug-in variance are used.
PolicyEvaluation restricted_value(const Eigen::VectorXd& outcome,
                                  const RestrictedScores& scores, double delta,
                                  double alpha = 0.05);

/// W-restricted area metric; only contact-only scores are value-comparable
/// to the unrestricted curve, so mode kBoth is rejected.
AupbcResult restricted_aupbc(const Eigen::VectorXd& outcome,
                             const RestrictedScores& scores,
                             const std::vector<double>& grid,
                             double alpha = 0.05);

}  // namespace cpb
