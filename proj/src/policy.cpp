#include "cpb/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cpb {

namespace {

void check_grid(const std::vector<double>& grid) {
  if (grid.size() < 2 || grid.front() != 0.0 || grid.back() != 1.0) {
    throw std::invalid_argument("delta grid must span [0, 1] inclusive");
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw std::invalid_argument("delta grid must be strictly ascending");
    }
  }
}

}  // namespace

double normal_quantile(double p) {
  // Acklam's rational approximation, |relative error| < 1.2e-9.
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal quantile requires p in (0,1)");
  }
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double q, r;
  if (p < plow) {
    q = std::sqrt(-2 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  if (p > 1 - plow) {
    q = std::sqrt(-2 * std::log(1 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  q = p - 0.5;
  r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

BudgetQuantile budget_quantile(const Eigen::VectorXd& scores, double delta) {
  const Eigen::Index n = scores.size();
  if (n == 0) throw std::invalid_argument("empty score vector");
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("budget delta must lie in [0, 1]");
  }
  std::vector<double> sorted(scores.data(), scores.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const auto k = static_cast<Eigen::Index>(
      std::floor(delta * static_cast<double>(n)));
  BudgetQuantile q;
  q.delta = delta;
  q.threshold = k < n ? sorted[static_cast<std::size_t>(k)]
                      : sorted.back() - 1.0;
  Eigen::Index contacted = 0;
  for (Eigen::Index i = 0; i < n; ++i) contacted += scores(i) > q.threshold;
  q.contacted_fraction = static_cast<double>(contacted) / static_cast<double>(n);
  return q;
}

std::vector<std::uint8_t> contact_rule(const Eigen::VectorXd& scores,
                                       double threshold) {
  std::vector<std::uint8_t> contacted(static_cast<std::size_t>(scores.size()));
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    contacted[static_cast<std::size_t>(i)] = scores(i) > threshold ? 1 : 0;
  }
  return contacted;
}

PolicyEvaluation evaluate_thresholded(const Eigen::VectorXd& outcome,
                                      const Eigen::VectorXd& phi,
                                      const Eigen::VectorXd& scores,
                                      double delta, double alpha) {
  const Eigen::Index n = outcome.size();
  if (phi.size() != n || scores.size() != n) {
    throw std::invalid_argument("outcome, phi and scores must align");
  }
  const BudgetQuantile q = budget_quantile(scores, delta);

  PolicyEvaluation eval;
  eval.delta = delta;
  eval.threshold = q.threshold;
  eval.contacted_fraction = q.contacted_fraction;
  eval.alpha = alpha;
  eval.contacted = contact_rule(scores, q.threshold);

  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    sum += eval.contacted[static_cast<std::size_t>(i)] * phi(i) + outcome(i);
  }
  eval.value = sum / static_cast<double>(n);

  const double center = eval.value - delta * q.threshold;
  double ss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double term =
        eval.contacted[static_cast<std::size_t>(i)] * (phi(i) - q.threshold) +
        outcome(i) - center;
    ss += term * term;
  }
  eval.sigma = std::sqrt(ss / static_cast<double>(n));
  const double half =
      normal_quantile(1.0 - alpha / 2.0) * eval.standard_error(n);
  eval.ci_lower = eval.value - half;
  eval.ci_upper = eval.value + half;
  return eval;
}

PolicyEvaluation estimate_value(const Eigen::VectorXd& outcome,
                                const Eigen::VectorXd& phi,
                                const Eigen::VectorXd& scores, double delta,
                                double alpha) {
  return evaluate_thresholded(outcome, phi, scores, delta, alpha);
}

GapReport gap_to_unconstrained(const PolicyEvaluation& at_delta,
                               const PolicyEvaluation& at_one,
                               Eigen::Index n) {
  GapReport report;
  report.gap = at_one.value - at_delta.value;
  report.bound = (1.0 - at_delta.delta) * at_delta.threshold;
  report.within_bound =
      report.gap <=
      report.bound + 2.0 * (at_one.standard_error(n) + at_delta.standard_error(n));
  return report;
}

AupbcResult aupbc(const Eigen::VectorXd& outcome, const Eigen::VectorXd& phi,
                  const Eigen::VectorXd& scores,
                  const std::vector<double>& grid, double alpha) {
  check_grid(grid);
  const Eigen::Index n = outcome.size();
  const auto g = grid.size();
  const double z = normal_quantile(1.0 - alpha / 2.0);

  // Per-grid thresholds, then per-unit contact indicators via score > q.
  std::vector<double> thresholds(g), mean_centered(g), mean_contacted(g);
  for (std::size_t j = 0; j < g; ++j) {
    const BudgetQuantile q = budget_quantile(scores, grid[j]);
    thresholds[j] = q.threshold;
    double sc = 0.0, scd = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double contact = scores(i) > q.threshold ? 1.0 : 0.0;
      sc += contact * phi(i);
      scd += (contact - grid[j]) * phi(i);
    }
    mean_contacted[j] = sc / static_cast<double>(n);
    mean_centered[j] = scd / static_cast<double>(n);
  }

  auto trapezoid = [&](const std::vector<double>& f) {
    double area = 0.0;
    for (std::size_t j = 1; j < g; ++j) {
      area += 0.5 * (f[j] + f[j - 1]) * (grid[j] - grid[j - 1]);
    }
    return area;
  };

  AupbcResult result;
  result.area = trapezoid(mean_centered);
  const double phi_mean = phi.mean();
  result.normalized_defined = phi_mean > 0.0;
  if (result.normalized_defined) {
    result.normalized = 2.0 * trapezoid(mean_contacted) / phi_mean - 1.0;
  }

  // Per-unit influence term: integral of contact*phi - q*(contact - delta)
  // over the budget grid, minus phi/2.
  Eigen::VectorXd area_if(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> integrand(g);
    for (std::size_t j = 0; j < g; ++j) {
      const double contact = scores(i) > thresholds[j] ? 1.0 : 0.0;
      integrand[j] = contact * phi(i) - thresholds[j] * (contact - grid[j]);
    }
    area_if(i) = trapezoid(integrand) - 0.5 * phi(i);
  }
  const double n_mean = area_if.mean();
  result.kappa2 =
      (area_if.array() - n_mean).square().sum() / static_cast<double>(n);
  const double se_area = std::sqrt(result.kappa2 / static_cast<double>(n));
  result.area_ci_lower = result.area - z * se_area;
  result.area_ci_upper = result.area + z * se_area;

  if (result.normalized_defined) {
    Eigen::VectorXd norm_if =
        (2.0 * area_if - result.normalized * phi) / phi_mean;
    const double m = norm_if.mean();
    result.zeta2 =
        (norm_if.array() - m).square().sum() / static_cast<double>(n);
    const double se_norm = std::sqrt(result.zeta2 / static_cast<double>(n));
    result.norm_ci_lower = result.normalized - z * se_norm;
    result.norm_ci_upper = result.normalized + z * se_norm;
  }
  return result;
}

QiniReport qini_curve(const Eigen::VectorXd& outcome,
                      const Eigen::VectorXd& phi,
                      const Eigen::VectorXd& scores,
                      const std::vector<double>& grid, double alpha) {
  check_grid(grid);
  QiniReport report;
  report.grid = grid;
  report.alpha = alpha;
  for (double delta : grid) {
    PolicyEvaluation eval = evaluate_thresholded(outcome, phi, scores, delta, alpha);
    report.values_raw.push_back(eval.value);
    report.thresholds.push_back(eval.threshold);
    report.standard_errors.push_back(eval.standard_error(outcome.size()));
  }
  report.values_monotone = report.values_raw;
  std::sort(report.values_monotone.begin(), report.values_monotone.end());
  report.area = aupbc(outcome, phi, scores, grid, alpha);
  return report;
}

std::vector<double> default_delta_grid(int points) {
  if (points < 2) throw std::invalid_argument("grid needs >= 2 points");
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int j = 0; j < points; ++j) {
    grid[static_cast<std::size_t>(j)] =
        static_cast<double>(j) / static_cast<double>(points - 1);
  }
  grid.front() = 0.0;
  grid.back() = 1.0;
  return grid;
}

std::vector<int> margin_histogram(const Eigen::VectorXd& values,
                                  const std::vector<double>& edges) {
  std::vector<int> counts(edges.size(), 0);
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double v = std::abs(values(i));
    for (std::size_t j = 0; j < edges.size(); ++j) {
      if (v < edges[j]) {
        ++counts[j];
        break;
      }
    }
  }
  return counts;
}

}  // namespace cpb
