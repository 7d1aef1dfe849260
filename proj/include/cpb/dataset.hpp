#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "cpb/errors.hpp"

namespace cpb {

/// Immutable observational cohort: named real covariate columns, a binary
/// treatment indicator and a real outcome per unit. Row order is unit order.
class Cohort {
 public:
  Cohort(std::vector<std::string> covariate_names, Eigen::MatrixXd covariates,
         std::vector<int> treatment, Eigen::VectorXd outcome);

  Eigen::Index n() const { return outcome_.size(); }
  Eigen::Index dim() const { return covariates_.cols(); }
  const std::vector<std::string>& covariate_names() const { return names_; }
  const Eigen::MatrixXd& covariates() const { return covariates_; }
  const std::vector<int>& treatment() const { return treatment_; }
  const Eigen::VectorXd& outcome() const { return outcome_; }

  /// Index of a named column, or SchemaError.
  Eigen::Index column_index(const std::string& name) const;

 private:
  std::vector<std::string> names_;
  Eigen::MatrixXd covariates_;  // n x d
  std::vector<int> treatment_;  // entries in {0,1}, both arms non-empty
  Eigen::VectorXd outcome_;
};

struct CsvSchema {
  std::vector<std::string> covariates;  // empty = every column not named below
  std::string treatment = "a";
  std::string outcome = "y";
};

Cohort load_csv(const std::string& path, const CsvSchema& schema);
void save_csv(const Cohort& cohort, const std::string& path);

/// Read-only selection of covariate columns. An empty selection is the
/// intercept-only (constant) view.
class CovariateView {
 public:
  CovariateView(const Cohort& parent, std::vector<Eigen::Index> selected);

  const Cohort& parent() const { return *parent_; }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(selected_.size()); }
  bool is_identity() const;

  /// n x |selected| matrix of the chosen columns (n x 0 when empty).
  Eigen::MatrixXd matrix() const;
  /// Selected entries of one covariate row.
  Eigen::VectorXd select_row(const Eigen::VectorXd& full_row) const;

 private:
  const Cohort* parent_;
  std::vector<Eigen::Index> selected_;
};

CovariateView select_covariates(const Cohort& cohort,
                                const std::vector<std::string>& names);

/// Balanced k-fold assignment, reproducible across platforms from the seed.
struct FoldAssignment {
  int k = 2;
  std::vector<int> assignment;  // per-unit fold index in [0, k)
  std::uint64_t seed = 0;
};

FoldAssignment make_folds(Eigen::Index n, int k, std::uint64_t seed);

}  // namespace cpb
