#include "cpb/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "cpb/rng.hpp"

namespace cpb {

namespace {

double expit(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Structural (true) functions; for the confounded variant these are the
// U-marginal pieces entering Y(a) = (a - pi) tau + lambda_out (2U - 1) + eps.
double structural_propensity(ScenarioId id, double x) {
  switch (id) {
    case ScenarioId::kS1:
    case ScenarioId::kS2:
    case ScenarioId::kConfounded:
      return 0.5;
    case ScenarioId::kS1Star:
      return 1.0 - std::abs(x) / 2.0;
    case ScenarioId::kS2Star: {
      const double q = std::pow(x / 2.0, 4);
      return x > 0.0 ? 1.0 - q : q;
    }
  }
  return 0.5;
}

double structural_cate(ScenarioId id, double x) {
  switch (id) {
    case ScenarioId::kS1:
    case ScenarioId::kConfounded:
      return x;
    case ScenarioId::kS1Star:
      return 1.0;
    case ScenarioId::kS2:
      return 3.0 / 16.0 * std::pow(x, 5);
    case ScenarioId::kS2Star:
      return 1.5 * x;
  }
  return 0.0;
}

bool is_s2_family(ScenarioId id) {
  return id == ScenarioId::kS2 || id == ScenarioId::kS2Star;
}

// Empirical (1-delta)-quantile under the same order-statistic rule used by
// the estimators: the (floor(delta*m)+1)-th largest value.
double empirical_quantile(std::vector<double> values, double delta) {
  std::sort(values.begin(), values.end(), std::greater<>());
  const auto k = static_cast<std::size_t>(
      std::floor(delta * static_cast<double>(values.size())));
  return k < values.size() ? values[k] : values.back() - 1.0;
}

}  // namespace

ScenarioId parse_scenario(const std::string& name) {
  if (name == "S1") return ScenarioId::kS1;
  if (name == "S1star") return ScenarioId::kS1Star;
  if (name == "S2") return ScenarioId::kS2;
  if (name == "S2star") return ScenarioId::kS2Star;
  if (name == "confounded") return ScenarioId::kConfounded;
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

std::string scenario_name(ScenarioId id) {
  switch (id) {
    case ScenarioId::kS1: return "S1";
    case ScenarioId::kS1Star: return "S1star";
    case ScenarioId::kS2: return "S2";
    case ScenarioId::kS2Star: return "S2star";
    case ScenarioId::kConfounded: return "confounded";
  }
  return "?";
}

double scenario_propensity(const ScenarioSpec& spec, double x) {
  return structural_propensity(spec.id, x);
}

double scenario_cate(const ScenarioSpec& spec, double x) {
  if (spec.id == ScenarioId::kConfounded) {
    // Observational contrast mu_1 - mu_0 absorbs the hidden shift.
    return x + 2.0 * spec.lambda_out * std::tanh(spec.lambda_trt / 2.0);
  }
  return structural_cate(spec.id, x);
}

double scenario_beta(const ScenarioSpec& spec, double x) {
  const double tau = scenario_cate(spec, x);
  const double pi = scenario_propensity(spec, x);
  return tau * ((tau > 0.0 ? 1.0 : 0.0) - pi);
}

GeneratedSample generate(const ScenarioSpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("need n >= 1");
  if (spec.noise_sd < 0) throw std::invalid_argument("noise sd must be >= 0");
  Rng rng(spec.seed);

  const Eigen::Index n = spec.n;
  Eigen::MatrixXd x(n, 1);
  std::vector<int> a(static_cast<std::size_t>(n));
  Eigen::VectorXd y(n), y0(n), y1(n);
  std::vector<int> u(static_cast<std::size_t>(n), 0);

  const bool confounded = spec.id == ScenarioId::kConfounded;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = rng.uniform(-2.0, 2.0);
    x(i, 0) = xi;
    const double pi = structural_propensity(spec.id, xi);
    const double tau = structural_cate(spec.id, xi);
    double shift = 0.0;
    double p_treat = pi;
    if (confounded) {
      u[static_cast<std::size_t>(i)] = rng.bernoulli(0.5) ? 1 : 0;
      const double sign = 2.0 * u[static_cast<std::size_t>(i)] - 1.0;
      p_treat = expit(spec.lambda_trt * sign);
      shift = spec.lambda_out * sign;
    }
    a[static_cast<std::size_t>(i)] = rng.bernoulli(p_treat) ? 1 : 0;
    const double eps = spec.noise_sd > 0 ? spec.noise_sd * rng.normal() : 0.0;
    y0(i) = (0.0 - pi) * tau + shift + eps;
    y1(i) = (1.0 - pi) * tau + shift + eps;
    y(i) = a[static_cast<std::size_t>(i)] == 1 ? y1(i) : y0(i);
  }

  GeneratedSample sample{
      Cohort({"x"}, std::move(x), std::move(a), std::move(y)),
      {std::move(y0), std::move(y1), std::move(u)}};
  return sample;
}

double oracle_quantile(ScenarioId id, double delta) {
  return is_s2_family(id) ? 3.0 * std::pow(1.0 - delta, 5) : 1.0 - delta;
}

double oracle_value(ScenarioId id, double delta) {
  return is_s2_family(id) ? 0.5 * (1.0 - std::pow(1.0 - delta, 6))
                          : delta - delta * delta / 2.0;
}

double oracle_mean_beta(ScenarioId) { return 0.5; }

double oracle_aupbc_norm(ScenarioId id) {
  return is_s2_family(id) ? 5.0 / 7.0 : 1.0 / 3.0;
}

int oracle_policy(const ScenarioSpec& spec, double x) {
  if (spec.id == ScenarioId::kConfounded) {
    throw std::invalid_argument("analytic optimal rules need an identified scenario");
  }
  return structural_cate(spec.id, x) > 0.0 ? 1 : 0;
}

int oracle_contact(const ScenarioSpec& spec, double x, double delta) {
  return scenario_beta(spec, x) > oracle_quantile(spec.id, delta) ? 1 : 0;
}

McValue mc_brute_force_value(const ScenarioSpec& spec,
                             const ContactRuleFn& contact,
                             const PolicyFn& policy, long reps,
                             std::uint64_t seed) {
  if (reps < 1) throw std::invalid_argument("need reps >= 1");
  Rng rng(seed);
  ScenarioSpec draw_spec = spec;
  const bool confounded = spec.id == ScenarioId::kConfounded;
  double sum = 0.0, sum2 = 0.0;
  for (long r = 0; r < reps; ++r) {
    const double x = rng.uniform(-2.0, 2.0);
    const double pi = structural_propensity(spec.id, x);
    const double tau = structural_cate(spec.id, x);
    double shift = 0.0;
    double p_treat = pi;
    if (confounded) {
      const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
      p_treat = expit(draw_spec.lambda_trt * sign);
      shift = draw_spec.lambda_out * sign;
    }
    const int a = rng.bernoulli(p_treat) ? 1 : 0;
    const double eps = spec.noise_sd > 0 ? spec.noise_sd * rng.normal() : 0.0;
    const double y0 = -pi * tau + shift + eps;
    const double y1 = (1.0 - pi) * tau + shift + eps;
    const int h = rng.bernoulli(contact(x)) ? 1 : 0;
    const int applied = h == 1 ? policy(x) : a;
    const double out = applied == 1 ? y1 : y0;
    sum += out;
    sum2 += out * out;
  }
  const double mean = sum / static_cast<double>(reps);
  const double var =
      std::max(0.0, sum2 / static_cast<double>(reps) - mean * mean);
  return {mean, std::sqrt(var / static_cast<double>(reps))};
}

double regret_oracle(const ScenarioSpec& spec, const ContactRuleFn& contact,
                     const PolicyFn& policy, double delta, long reps,
                     std::uint64_t seed) {
  if (spec.id == ScenarioId::kConfounded) {
    throw std::invalid_argument("regret oracle needs an identified scenario");
  }
  if (reps < 1) throw std::invalid_argument("need reps >= 1");
  Rng rng(seed);
  double sum = 0.0;
  for (long r = 0; r < reps; ++r) {
    const double x = rng.uniform(-2.0, 2.0);
    const double pi = structural_propensity(spec.id, x);
    const double tau = structural_cate(spec.id, x);
    const double opt = oracle_contact(spec, x, delta) *
                       (oracle_policy(spec, x) - pi);
    const double est = contact(x) * (policy(x) - pi);
    sum += tau * (opt - est);
  }
  return sum / static_cast<double>(reps);
}

OracleValues oracle(const ScenarioSpec& spec, const std::vector<double>& deltas,
                    long mc_draws) {
  OracleValues out;
  out.id = spec.id;
  out.deltas = deltas;

  if (spec.id != ScenarioId::kConfounded) {
    out.analytic = true;
    out.mean_beta = oracle_mean_beta(spec.id);
    out.aupbc_norm = oracle_aupbc_norm(spec.id);
    out.aupbc = out.aupbc_norm * out.mean_beta / 2.0;
    for (double d : deltas) {
      out.quantiles.push_back(oracle_quantile(spec.id, d));
      out.values.push_back(oracle_value(spec.id, d));
      out.values_se.push_back(0.0);
      out.gaps.push_back(oracle_value(spec.id, 1.0) - oracle_value(spec.id, d));
    }
    return out;
  }

  // Confounded scenario: everything by brute force on retained potential
  // outcomes.
  out.analytic = false;
  Rng rng(spec.seed ^ 0xabcdef1234567890ULL);
  const long m = std::max<long>(mc_draws, 1000);
  std::vector<double> xs(static_cast<std::size_t>(m)),
      y0s(static_cast<std::size_t>(m)), y1s(static_cast<std::size_t>(m)),
      yobs(static_cast<std::size_t>(m));
  std::vector<int> as(static_cast<std::size_t>(m));
  std::vector<int> us(static_cast<std::size_t>(m));
  for (long r = 0; r < m; ++r) {
    const auto i = static_cast<std::size_t>(r);
    xs[i] = rng.uniform(-2.0, 2.0);
    const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
    us[i] = sign > 0 ? 1 : 0;
    as[i] = rng.bernoulli(expit(spec.lambda_trt * sign)) ? 1 : 0;
    const double eps = spec.noise_sd > 0 ? spec.noise_sd * rng.normal() : 0.0;
    y0s[i] = -0.5 * xs[i] + spec.lambda_out * sign + eps;
    y1s[i] = 0.5 * xs[i] + spec.lambda_out * sign + eps;
    yobs[i] = as[i] == 1 ? y1s[i] : y0s[i];
  }

  // True confounding magnitude: |nu_a - mu_a| = lambda_out *
  // |E(2U-1 | A=1-a) - E(2U-1 | A=a)|, estimated from the draws.
  double s1 = 0.0, s0 = 0.0;
  long n1 = 0;
  for (long r = 0; r < m; ++r) {
    const auto i = static_cast<std::size_t>(r);
    if (as[i] == 1) {
      s1 += 2.0 * us[i] - 1.0;
      ++n1;
    } else {
      s0 += 2.0 * us[i] - 1.0;
    }
  }
  const double t1 = s1 / std::max<long>(n1, 1);
  const double t0 = s0 / std::max<long>(m - n1, 1);
  out.true_gamma = spec.lambda_out * std::abs(t1 - t0);

  // Observational score beta(x) = tau_obs (1(tau_obs > 0) - 1/2).
  std::vector<double> beta_obs(static_cast<std::size_t>(m));
  const double tau_shift = spec.lambda_out * (t1 - t0);
  double mean_beta = 0.0;
  for (long r = 0; r < m; ++r) {
    const auto i = static_cast<std::size_t>(r);
    const double tau = xs[i] + tau_shift;
    beta_obs[i] = tau * ((tau > 0.0 ? 1.0 : 0.0) - 0.5);
    mean_beta += beta_obs[i];
  }
  out.mean_beta = mean_beta / static_cast<double>(m);

  auto rule_value = [&](const std::vector<double>& scores, double q,
                        bool dagger) {
    double sum = 0.0, sum2 = 0.0;
    for (long r = 0; r < m; ++r) {
      const auto i = static_cast<std::size_t>(r);
      double o;
      if (scores[i] > q) {
        const int h = dagger ? (xs[i] > 0.0 ? 1 : 0)
                             : (xs[i] + tau_shift > 0.0 ? 1 : 0);
        o = h == 1 ? y1s[i] : y0s[i];
      } else {
        o = yobs[i];
      }
      sum += o;
      sum2 += o * o;
    }
    const double mean = sum / static_cast<double>(m);
    const double var = std::max(0.0, sum2 / static_cast<double>(m) - mean * mean);
    return McValue{mean, std::sqrt(var / static_cast<double>(m))};
  };

  for (double d : deltas) {
    const double q = empirical_quantile(beta_obs, d);
    out.quantiles.push_back(q);
    const McValue v = rule_value(beta_obs, q, false);
    out.values.push_back(v.value);
    out.values_se.push_back(v.se);
  }
  const McValue full = rule_value(beta_obs, empirical_quantile(beta_obs, 1.0),
                                  false);
  for (double v : out.values) out.gaps.push_back(full.value - v);

  // Area relative to the random-policy diagonal, trapezoid over the deltas.
  double ey = 0.0;
  for (long r = 0; r < m; ++r) ey += yobs[static_cast<std::size_t>(r)];
  ey /= static_cast<double>(m);
  if (out.deltas.size() >= 2) {
    double integral = 0.0;
    for (std::size_t j = 1; j < out.deltas.size(); ++j) {
      integral += 0.5 * (out.values[j] + out.values[j - 1]) *
                  (out.deltas[j] - out.deltas[j - 1]);
    }
    const double gain = full.value - ey;
    out.aupbc = integral - ey - 0.5 * gain;
    out.aupbc_norm = gain > 0 ? 2.0 * out.aupbc / gain : 0.0;
  }

  // Value of the (unidentified) confounding-optimal rule: beta_dagger =
  // |x| / 2 under this construction.
  std::vector<double> beta_dagger(static_cast<std::size_t>(m));
  for (long r = 0; r < m; ++r) {
    beta_dagger[static_cast<std::size_t>(r)] =
        std::abs(xs[static_cast<std::size_t>(r)]) / 2.0;
  }
  const double mid_delta = deltas.empty() ? 0.5 : deltas[deltas.size() / 2];
  const McValue dag =
      rule_value(beta_dagger, empirical_quantile(beta_dagger, mid_delta), true);
  out.dagger_value = dag.value;
  out.dagger_value_se = dag.se;
  return out;
}

}  // namespace cpb
