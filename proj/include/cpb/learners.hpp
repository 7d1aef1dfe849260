#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>

#include "cpb/errors.hpp"

namespace cpb {

enum class LearnerKind {
  kGlobalLinear,    // ridge-penalized linear fit
  kNearestNeighbor, // k-NN average
  kKernelSmoother,  // Nadaraya-Watson, Gaussian kernel
  kLocalLinear,     // locally weighted linear fit, Gaussian kernel
};

/// Learner selection plus hyperparameters. Bandwidth 0 means "choose by the
/// per-dimension rule 1.06 * sd * n^(-1/5)".
struct LearnerSpec {
  LearnerKind kind = LearnerKind::kKernelSmoother;
  double ridge = 0.0;
  int neighbors = 5;
  double bandwidth = 0.0;

  /// Parse "linear[:lambda=L]", "knn[:k=K]", "kernel[:h=H]", "loclin[:h=H]".
  static LearnerSpec parse(const std::string& text);
  std::string to_string() const;
};

/// Immutable fitted regression; prediction is reentrant and shareable.
class FittedRegression {
 public:
  FittedRegression() = default;

  double predict(const Eigen::VectorXd& x) const;
  /// Predict for every row of a feature matrix.
  Eigen::VectorXd predict_rows(const Eigen::MatrixXd& features) const;

  struct Impl;

 private:
  friend FittedRegression fit_regression(const LearnerSpec&,
                                         const Eigen::MatrixXd&,
                                         const Eigen::VectorXd&);
  std::shared_ptr<const Impl> impl_;
};

/// Fit targets on feature rows. A zero-column feature matrix is legal and
/// yields the constant mean-of-targets fit.
FittedRegression fit_regression(const LearnerSpec& spec,
                                const Eigen::MatrixXd& features,
                                const Eigen::VectorXd& targets);

/// 1.06 * sd * n^(-1/5), floored at a small positive value.
double silverman_bandwidth(const Eigen::VectorXd& column);

}  // namespace cpb
