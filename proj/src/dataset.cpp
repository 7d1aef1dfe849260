#include "cpb/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace cpb {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& cell, const std::string& column,
                  std::size_t row) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &pos);
  } catch (const std::exception&) {
    throw ParseError("non-numeric value '" + cell + "' in column '" + column +
                     "', row " + std::to_string(row));
  }
  // Allow trailing whitespace only.
  for (std::size_t i = pos; i < cell.size(); ++i) {
    if (!std::isspace(static_cast<unsigned char>(cell[i]))) {
      throw ParseError("non-numeric value '" + cell + "' in column '" + column +
                       "', row " + std::to_string(row));
    }
  }
  if (!std::isfinite(v)) {
    throw ParseError("non-finite value in column '" + column + "', row " +
                     std::to_string(row));
  }
  return v;
}

}  // namespace

Cohort::Cohort(std::vector<std::string> covariate_names,
               Eigen::MatrixXd covariates, std::vector<int> treatment,
               Eigen::VectorXd outcome)
    : names_(std::move(covariate_names)),
      covariates_(std::move(covariates)),
      treatment_(std::move(treatment)),
      outcome_(std::move(outcome)) {
  const auto n = outcome_.size();
  if (covariates_.rows() != n ||
      static_cast<Eigen::Index>(treatment_.size()) != n) {
    throw SchemaError("column lengths disagree");
  }
  if (static_cast<Eigen::Index>(names_.size()) != covariates_.cols()) {
    throw SchemaError("covariate name count does not match column count");
  }
  if (n == 0) throw SchemaError("empty cohort");
  if (!covariates_.allFinite() || !outcome_.allFinite()) {
    throw ParseError("non-finite value in cohort");
  }
  int n1 = 0;
  for (int a : treatment_) {
    if (a != 0 && a != 1) throw ParseError("treatment value outside {0,1}");
    n1 += a;
  }
  if (n1 == 0 || n1 == static_cast<int>(n)) {
    throw PositivityError("cohort contains a single treatment arm");
  }
}

Eigen::Index Cohort::column_index(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) {
    throw SchemaError("unknown covariate column '" + name + "'");
  }
  return static_cast<Eigen::Index>(it - names_.begin());
}

Cohort load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_line(line);

  auto find = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw SchemaError("missing column '" + name + "' in " + path);
    }
    return static_cast<std::size_t>(it - header.begin());
  };

  std::vector<std::string> cov_names = schema.covariates;
  if (cov_names.empty()) {
    for (const auto& h : header) {
      if (h != schema.treatment && h != schema.outcome) cov_names.push_back(h);
    }
  }
  std::vector<std::size_t> cov_idx;
  cov_idx.reserve(cov_names.size());
  for (const auto& name : cov_names) cov_idx.push_back(find(name));
  const std::size_t a_idx = find(schema.treatment);
  const std::size_t y_idx = find(schema.outcome);

  std::vector<std::vector<double>> rows;
  std::vector<int> treatment;
  std::vector<double> outcome;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw ParseError("wrong cell count in row " + std::to_string(row));
    }
    std::vector<double> xrow(cov_idx.size());
    for (std::size_t j = 0; j < cov_idx.size(); ++j) {
      xrow[j] = parse_cell(cells[cov_idx[j]], header[cov_idx[j]], row);
    }
    const double a = parse_cell(cells[a_idx], schema.treatment, row);
    if (a != 0.0 && a != 1.0) {
      throw ParseError("treatment not in {0,1} in row " + std::to_string(row));
    }
    treatment.push_back(static_cast<int>(a));
    outcome.push_back(parse_cell(cells[y_idx], schema.outcome, row));
    rows.push_back(std::move(xrow));
  }
  if (rows.empty()) throw SchemaError("no data rows in " + path);

  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(cov_idx.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cov_idx.size(); ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return Cohort(std::move(cov_names), std::move(x), std::move(treatment),
                Eigen::Map<Eigen::VectorXd>(outcome.data(),
                                            static_cast<Eigen::Index>(
                                                outcome.size())));
}

void save_csv(const Cohort& cohort, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write file: " + path);
  for (const auto& name : cohort.covariate_names()) out << name << ',';
  out << "a,y\n";
  char buf[32];
  for (Eigen::Index i = 0; i < cohort.n(); ++i) {
    for (Eigen::Index j = 0; j < cohort.dim(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", cohort.covariates()(i, j));
      out << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", cohort.outcome()(i));
    out << cohort.treatment()[static_cast<std::size_t>(i)] << ',' << buf << '\n';
  }
}

CovariateView::CovariateView(const Cohort& parent,
                             std::vector<Eigen::Index> selected)
    : parent_(&parent), selected_(std::move(selected)) {
  for (Eigen::Index j : selected_) {
    if (j < 0 || j >= parent.dim()) throw SchemaError("column index out of range");
  }
}

bool CovariateView::is_identity() const {
  if (dim() != parent_->dim()) return false;
  for (Eigen::Index j = 0; j < dim(); ++j) {
    if (selected_[static_cast<std::size_t>(j)] != j) return false;
  }
  return true;
}

Eigen::MatrixXd CovariateView::matrix() const {
  Eigen::MatrixXd out(parent_->n(), dim());
  for (Eigen::Index j = 0; j < dim(); ++j) {
    out.col(j) = parent_->covariates().col(selected_[static_cast<std::size_t>(j)]);
  }
  return out;
}

Eigen::VectorXd CovariateView::select_row(const Eigen::VectorXd& full_row) const {
  Eigen::VectorXd out(dim());
  for (Eigen::Index j = 0; j < dim(); ++j) {
    out(j) = full_row(selected_[static_cast<std::size_t>(j)]);
  }
  return out;
}

CovariateView select_covariates(const Cohort& cohort,
                                const std::vector<std::string>& names) {
  std::vector<Eigen::Index> idx;
  idx.reserve(names.size());
  for (const auto& name : names) idx.push_back(cohort.column_index(name));
  return CovariateView(cohort, std::move(idx));
}

FoldAssignment make_folds(Eigen::Index n, int k, std::uint64_t seed) {
  if (k < 2 || static_cast<Eigen::Index>(k) > n) {
    throw std::invalid_argument("fold count must satisfy 2 <= k <= n");
  }
  // Balanced labels 0,1,...,k-1,0,1,... permuted by an explicit Fisher-Yates
  // shuffle; splitmix64 keeps the draw identical across standard libraries.
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labels[i] = static_cast<int>(i % static_cast<std::size_t>(k));
  }
  std::uint64_t state = seed;
  auto next = [&state]() {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  for (std::size_t i = labels.size() - 1; i > 0; --i) {
    // Rejection sampling for an unbiased bounded draw.
    const std::uint64_t bound = i + 1;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t r;
    do {
      r = next();
    } while (r >= limit);
    std::swap(labels[i], labels[r % bound]);
  }
  return FoldAssignment{k, std::move(labels), seed};
}

}  // namespace cpb
