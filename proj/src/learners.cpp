#include "cpb/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

namespace cpb {

namespace {

constexpr double kWeightFloor = 1e-300;
// 1-d smoothers switch to a precomputed-grid evaluation above this size.
constexpr Eigen::Index kBinnedThreshold = 2000;
constexpr int kGridPoints = 4096;
constexpr double kKernelCutoff = 8.0;  // in bandwidth units

double parse_value(const std::string& text, const std::string& key) {
  const auto pos = text.find(key + "=");
  if (pos == std::string::npos) {
    throw std::invalid_argument("learner spec '" + text + "' missing '" + key +
                                "='");
  }
  return std::stod(text.substr(pos + key.size() + 1));
}

}  // namespace

LearnerSpec LearnerSpec::parse(const std::string& text) {
  LearnerSpec spec;
  const std::string kind = text.substr(0, text.find(':'));
  const bool has_param = text.find(':') != std::string::npos;
  if (kind == "linear") {
    spec.kind = LearnerKind::kGlobalLinear;
    spec.ridge = has_param ? parse_value(text, "lambda") : 0.0;
    if (spec.ridge < 0) throw std::invalid_argument("ridge penalty must be >= 0");
  } else if (kind == "knn") {
    spec.kind = LearnerKind::kNearestNeighbor;
    spec.neighbors = has_param ? static_cast<int>(parse_value(text, "k")) : 5;
    if (spec.neighbors < 1) throw std::invalid_argument("knn requires k >= 1");
  } else if (kind == "kernel" || kind == "loclin") {
    spec.kind = kind == "kernel" ? LearnerKind::kKernelSmoother
                                 : LearnerKind::kLocalLinear;
    spec.bandwidth = has_param ? parse_value(text, "h") : 0.0;
    if (spec.bandwidth < 0) throw std::invalid_argument("bandwidth must be > 0");
  } else {
    throw std::invalid_argument("unknown learner kind '" + kind + "'");
  }
  return spec;
}

std::string LearnerSpec::to_string() const {
  std::ostringstream out;
  switch (kind) {
    case LearnerKind::kGlobalLinear:
      out << "linear:lambda=" << ridge;
      break;
    case LearnerKind::kNearestNeighbor:
      out << "knn:k=" << neighbors;
      break;
    case LearnerKind::kKernelSmoother:
      out << "kernel:h=" << bandwidth;
      break;
    case LearnerKind::kLocalLinear:
      out << "loclin:h=" << bandwidth;
      break;
  }
  return out.str();
}

double silverman_bandwidth(const Eigen::VectorXd& column) {
  const double n = static_cast<double>(column.size());
  const double mean = column.mean();
  const double var = (column.array() - mean).square().sum() / std::max(n - 1, 1.0);
  const double h = 1.06 * std::sqrt(var) * std::pow(n, -0.2);
  return std::max(h, 1e-9);
}

struct FittedRegression::Impl {
  virtual ~Impl() = default;
  virtual double predict(const Eigen::VectorXd& x) const = 0;
};

namespace {

struct ConstantModel final : FittedRegression::Impl {
  double value = 0.0;
  double predict(const Eigen::VectorXd&) const override { return value; }
};

struct LinearModel final : FittedRegression::Impl {
  double intercept = 0.0;
  Eigen::VectorXd coef;
  double predict(const Eigen::VectorXd& x) const override {
    return intercept + coef.dot(x);
  }
};

struct KnnModel final : FittedRegression::Impl {
  Eigen::MatrixXd train_x;
  Eigen::VectorXd train_y;
  int k = 1;

  double predict(const Eigen::VectorXd& x) const override {
    const Eigen::Index n = train_x.rows();
    std::vector<std::pair<double, Eigen::Index>> dist(
        static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      dist[static_cast<std::size_t>(i)] = {
          (train_x.row(i).transpose() - x).squaredNorm(), i};
    }
    std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end());
    double sum = 0.0;
    for (int j = 0; j < k; ++j) sum += train_y(dist[static_cast<std::size_t>(j)].second);
    return sum / k;
  }
};

// Gaussian product-kernel weights shared by the smoother models.
double gaussian_weight(const Eigen::MatrixXd& train_x, Eigen::Index row,
                       const Eigen::VectorXd& x, const Eigen::VectorXd& inv_h) {
  double z2 = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double z = (train_x(row, j) - x(j)) * inv_h(j);
    z2 += z * z;
  }
  return std::exp(-0.5 * z2);
}

struct KernelModel final : FittedRegression::Impl {
  Eigen::MatrixXd train_x;
  Eigen::VectorXd train_y;
  Eigen::VectorXd inv_h;

  double predict(const Eigen::VectorXd& x) const override {
    double wsum = 0.0, ysum = 0.0;
    double best = std::numeric_limits<double>::infinity();
    double nearest = train_y(0);
    for (Eigen::Index i = 0; i < train_x.rows(); ++i) {
      const double w = gaussian_weight(train_x, i, x, inv_h);
      wsum += w;
      ysum += w * train_y(i);
      const double d = (train_x.row(i).transpose() - x).squaredNorm();
      if (d < best) {
        best = d;
        nearest = train_y(i);
      }
    }
    if (wsum < kWeightFloor) return nearest;  // far outside the support
    return ysum / wsum;
  }
};

struct LocalLinearModel final : FittedRegression::Impl {
  Eigen::MatrixXd train_x;
  Eigen::VectorXd train_y;
  Eigen::VectorXd inv_h;

  double predict(const Eigen::VectorXd& x) const override {
    const Eigen::Index d = x.size();
    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(d + 1, d + 1);
    Eigen::VectorXd xty = Eigen::VectorXd::Zero(d + 1);
    double wsum = 0.0;
    double best = std::numeric_limits<double>::infinity();
    double nearest = train_y(0);
    Eigen::VectorXd z(d + 1);
    for (Eigen::Index i = 0; i < train_x.rows(); ++i) {
      const double w = gaussian_weight(train_x, i, x, inv_h);
      const double dist = (train_x.row(i).transpose() - x).squaredNorm();
      if (dist < best) {
        best = dist;
        nearest = train_y(i);
      }
      if (w < kWeightFloor) continue;
      z(0) = 1.0;
      z.tail(d) = train_x.row(i).transpose() - x;
      xtx.noalias() += w * z * z.transpose();
      xty.noalias() += w * train_y(i) * z;
      wsum += w;
    }
    if (wsum < kWeightFloor) return nearest;
    // Light regularization keeps near-degenerate neighborhoods solvable.
    xtx.diagonal().array() += 1e-10 * wsum;
    return xtx.ldlt().solve(xty)(0);
  }
};

// 1-d smoother evaluated on a fixed grid at fit time; prediction is linear
// interpolation. Cuts cost from O(n) to O(1) per query at large n.
struct BinnedModel final : FittedRegression::Impl {
  double lo = 0.0, step = 1.0;
  Eigen::VectorXd values;

  double predict(const Eigen::VectorXd& x) const override {
    const double t = (x(0) - lo) / step;
    if (t <= 0.0) return values(0);
    const Eigen::Index last = values.size() - 1;
    if (t >= static_cast<double>(last)) return values(last);
    const auto i = static_cast<Eigen::Index>(t);
    const double frac = t - static_cast<double>(i);
    return values(i) * (1.0 - frac) + values(i + 1) * frac;
  }
};

std::shared_ptr<BinnedModel> fit_binned_1d(const Eigen::MatrixXd& features,
                                           const Eigen::VectorXd& targets,
                                           double h, bool local_linear) {
  const Eigen::Index n = features.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return features(a, 0) < features(b, 0);
  });
  Eigen::VectorXd xs(n), ys(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    xs(i) = features(order[static_cast<std::size_t>(i)], 0);
    ys(i) = targets(order[static_cast<std::size_t>(i)]);
  }

  auto model = std::make_shared<BinnedModel>();
  const double margin = 1e-9 * std::max(1.0, std::abs(xs(n - 1) - xs(0)));
  model->lo = xs(0) - margin;
  const double hi = xs(n - 1) + margin;
  model->step = (hi - model->lo) / (kGridPoints - 1);
  if (model->step <= 0) model->step = 1.0;
  model->values.resize(kGridPoints);

  const double cutoff = kKernelCutoff * h;
  const double inv_h = 1.0 / h;
  for (int g = 0; g < kGridPoints; ++g) {
    const double x0 = model->lo + g * model->step;
    const auto begin = std::lower_bound(xs.data(), xs.data() + n, x0 - cutoff) -
                       xs.data();
    auto end = std::upper_bound(xs.data(), xs.data() + n, x0 + cutoff) -
               xs.data();
    double wsum = 0.0, ysum = 0.0, sxw = 0.0, sxxw = 0.0, sxyw = 0.0;
    for (auto i = begin; i < end; ++i) {
      const double z = (xs(i) - x0) * inv_h;
      const double w = std::exp(-0.5 * z * z);
      const double dx = xs(i) - x0;
      wsum += w;
      ysum += w * ys(i);
      if (local_linear) {
        sxw += w * dx;
        sxxw += w * dx * dx;
        sxyw += w * dx * ys(i);
      }
    }
    if (wsum < kWeightFloor) {
      // Empty window: take the nearest sample.
      const auto i = std::min<Eigen::Index>(
          n - 1, std::lower_bound(xs.data(), xs.data() + n, x0) - xs.data());
      model->values(g) = ys(i);
      continue;
    }
    if (local_linear) {
      const double det = wsum * sxxw - sxw * sxw;
      model->values(g) = det > 1e-12 * wsum * wsum
                             ? (sxxw * ysum - sxw * sxyw) / det
                             : ysum / wsum;
    } else {
      model->values(g) = ysum / wsum;
    }
  }
  return model;
}

Eigen::VectorXd bandwidths(const LearnerSpec& spec,
                           const Eigen::MatrixXd& features) {
  Eigen::VectorXd h(features.cols());
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    h(j) = spec.bandwidth > 0 ? spec.bandwidth
                              : silverman_bandwidth(features.col(j));
  }
  return h;
}

}  // namespace

double FittedRegression::predict(const Eigen::VectorXd& x) const {
  if (!impl_) throw std::logic_error("predict on unfitted regression");
  return impl_->predict(x);
}

Eigen::VectorXd FittedRegression::predict_rows(
    const Eigen::MatrixXd& features) const {
  Eigen::VectorXd out(features.rows());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    out(i) = predict(features.row(i).transpose());
  }
  return out;
}

FittedRegression fit_regression(const LearnerSpec& spec,
                                const Eigen::MatrixXd& features,
                                const Eigen::VectorXd& targets) {
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  if (n == 0 || targets.size() != n) {
    throw std::invalid_argument("regression requires >= 1 aligned training row");
  }

  FittedRegression fitted;
  if (d == 0) {
    auto model = std::make_shared<ConstantModel>();
    model->value = targets.mean();
    fitted.impl_ = std::move(model);
    return fitted;
  }

  switch (spec.kind) {
    case LearnerKind::kGlobalLinear: {
      Eigen::MatrixXd design(n, d + 1);
      design.col(0).setOnes();
      design.rightCols(d) = features;
      Eigen::VectorXd coef;
      if (spec.ridge > 0) {
        Eigen::MatrixXd gram = design.transpose() * design;
        // Intercept stays unpenalized.
        gram.diagonal().tail(d).array() += spec.ridge;
        coef = gram.ldlt().solve(design.transpose() * targets);
      } else {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
        if (qr.rank() < d + 1) {
          throw NumericError(
              "singular unpenalized design; refit with ridge lambda > 0");
        }
        coef = qr.solve(targets);
      }
      auto model = std::make_shared<LinearModel>();
      model->intercept = coef(0);
      model->coef = coef.tail(d);
      fitted.impl_ = std::move(model);
      return fitted;
    }
    case LearnerKind::kNearestNeighbor: {
      if (spec.neighbors > n) {
        throw std::invalid_argument("knn requires k <= training size");
      }
      auto model = std::make_shared<KnnModel>();
      model->train_x = features;
      model->train_y = targets;
      model->k = spec.neighbors;
      fitted.impl_ = std::move(model);
      return fitted;
    }
    case LearnerKind::kKernelSmoother:
    case LearnerKind::kLocalLinear: {
      const Eigen::VectorXd h = bandwidths(spec, features);
      const bool local = spec.kind == LearnerKind::kLocalLinear;
      if (d == 1 && n >= kBinnedThreshold) {
        fitted.impl_ = fit_binned_1d(features, targets, h(0), local);
        return fitted;
      }
      if (local) {
        auto model = std::make_shared<LocalLinearModel>();
        model->train_x = features;
        model->train_y = targets;
        model->inv_h = h.cwiseInverse();
        fitted.impl_ = std::move(model);
      } else {
        auto model = std::make_shared<KernelModel>();
        model->train_x = features;
        model->train_y = targets;
        model->inv_h = h.cwiseInverse();
        fitted.impl_ = std::move(model);
      }
      return fitted;
    }
  }
  throw std::invalid_argument("unknown learner kind");
}

}  // namespace cpb
