#include "cpb/nuisance.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace cpb {

NuisanceFits crossfit_nuisances(const Cohort& cohort,
                                const FoldAssignment& folds,
                                const LearnerSpec& spec_propensity,
                                const LearnerSpec& spec_outcome, double eps) {
  if (!(eps > 0.0 && eps < 0.5)) {
    throw std::invalid_argument("clip level eps must lie in (0, 0.5)");
  }
  const Eigen::Index n = cohort.n();
  if (static_cast<Eigen::Index>(folds.assignment.size()) != n) {
    throw std::invalid_argument("fold assignment does not match cohort size");
  }

  NuisanceFits fits;
  fits.eps = eps;
  fits.folds = folds;
  fits.pi.resize(n);
  fits.mu0.resize(n);
  fits.mu1.resize(n);

  const Eigen::MatrixXd& x = cohort.covariates();
  const std::vector<int>& a = cohort.treatment();
  const Eigen::VectorXd& y = cohort.outcome();

  for (int f = 0; f < folds.k; ++f) {
    std::vector<Eigen::Index> train, eval, arm0, arm1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (folds.assignment[static_cast<std::size_t>(i)] == f) {
        eval.push_back(i);
      } else {
        train.push_back(i);
        (a[static_cast<std::size_t>(i)] == 1 ? arm1 : arm0).push_back(i);
      }
    }
    if (arm0.empty() || arm1.empty()) {
      throw PositivityError("training complement of fold " + std::to_string(f) +
                            " is missing a treatment arm");
    }

    auto rows = [&](const std::vector<Eigen::Index>& idx) {
      Eigen::MatrixXd m(static_cast<Eigen::Index>(idx.size()), cohort.dim());
      for (std::size_t r = 0; r < idx.size(); ++r) m.row(static_cast<Eigen::Index>(r)) = x.row(idx[r]);
      return m;
    };
    auto vals = [&](const std::vector<Eigen::Index>& idx,
                    auto&& get) {
      Eigen::VectorXd v(static_cast<Eigen::Index>(idx.size()));
      for (std::size_t r = 0; r < idx.size(); ++r) v(static_cast<Eigen::Index>(r)) = get(idx[r]);
      return v;
    };

    const FittedRegression prop = fit_regression(
        spec_propensity, rows(train),
        vals(train, [&](Eigen::Index i) {
          return static_cast<double>(a[static_cast<std::size_t>(i)]);
        }));
    const FittedRegression out0 = fit_regression(
        spec_outcome, rows(arm0), vals(arm0, [&](Eigen::Index i) { return y(i); }));
    const FittedRegression out1 = fit_regression(
        spec_outcome, rows(arm1), vals(arm1, [&](Eigen::Index i) { return y(i); }));

    for (Eigen::Index i : eval) {
      const Eigen::VectorXd xi = x.row(i).transpose();
      fits.pi(i) = std::clamp(prop.predict(xi), eps, 1.0 - eps);
      fits.mu0(i) = out0.predict(xi);
      fits.mu1(i) = out1.predict(xi);
    }
  }

  fits.tau = fits.mu1 - fits.mu0;
  fits.h_star.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    fits.h_star[static_cast<std::size_t>(i)] = fits.tau(i) > 0.0 ? 1 : 0;
  }
  return fits;
}

void save_nuisances_csv(const NuisanceFits& fits, const Eigen::VectorXd& phi,
                        const Eigen::VectorXd& beta, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write file: " + path);
  out << "unit,pi_hat,mu0_hat,mu1_hat,tau_hat,h_star,phi_hat,beta_hat\n";
  char buf[256];
  for (Eigen::Index i = 0; i < fits.pi.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g\n",
                  static_cast<long long>(i), fits.pi(i), fits.mu0(i),
                  fits.mu1(i), fits.tau(i),
                  fits.h_star[static_cast<std::size_t>(i)],
                  phi.size() > i ? phi(i) : 0.0,
                  beta.size() > i ? beta(i) : 0.0);
    out << buf;
  }
}

}  // namespace cpb
