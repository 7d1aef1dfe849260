#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cpb/dataset.hpp"

namespace cpb {

enum class ScenarioId { kS1, kS1Star, kS2, kS2Star, kConfounded };

ScenarioId parse_scenario(const std::string& name);
std::string scenario_name(ScenarioId id);

/// Synthetic data-generating process: X ~ Unif(-2, 2),
/// A | X ~ Bernoulli(pi(X)), Y(a) = (a - pi(X)) tau(X) + noise. The
/// confounded variant adds a hidden U ~ Bern(1/2) shifting both the
/// treatment logit (by lambda_trt * (2U-1)) and the outcome
/// (by lambda_out * (2U-1)).
struct ScenarioSpec {
  ScenarioId id = ScenarioId::kS1;
  double noise_sd = 1.0;
  double lambda_out = 0.5;  // confounded only
  double lambda_trt = 1.0;  // confounded only
  Eigen::Index n = 1000;
  std::uint64_t seed = 1;
};

/// Structural functions of the identified scenarios (marginal values for the
/// confounded variant).
double scenario_propensity(const ScenarioSpec& spec, double x);
double scenario_cate(const ScenarioSpec& spec, double x);  // observational tau
double scenario_beta(const ScenarioSpec& spec, double x);  // tau (1(tau>0) - pi)

struct GeneratedSample {
  Cohort cohort;  // what estimators may see: covariate "x", treatment, outcome

  /// Potential outcomes and the hidden confounder, retained for oracle use
  /// only; never feed these to an estimator path.
  struct OracleOnly {
    Eigen::VectorXd y0, y1;
    std::vector<int> u;
  } oracle_only;
};

GeneratedSample generate(const ScenarioSpec& spec);

/// Contact rule (probability in [0,1]) and policy (0/1) as functions of x.
using ContactRuleFn = std::function<double(double)>;
using PolicyFn = std::function<int(double)>;

struct McValue {
  double value = 0.0;
  double se = 0.0;
};

/// Universal independent oracle: fresh draws, H ~ Bern(contact(x)), outcome
/// H * y(policy) + (1 - H) * y(A), averaged with its Monte Carlo se.
McValue mc_brute_force_value(const ScenarioSpec& spec,
                             const ContactRuleFn& contact,
                             const PolicyFn& policy, long reps,
                             std::uint64_t seed);

/// Monte Carlo regret of an estimated (contact, policy) pair against the
/// optimal budgeted rule; identified scenarios only.
double regret_oracle(const ScenarioSpec& spec, const ContactRuleFn& contact,
                     const PolicyFn& policy, double delta, long reps,
                     std::uint64_t seed);

struct OracleValues {
  ScenarioId id = ScenarioId::kS1;
  bool analytic = true;  // closed form for the four identified scenarios
  std::vector<double> deltas;
  std::vector<double> quantiles;  // score quantile at each delta
  std::vector<double> values;     // optimal constrained value at each delta
  std::vector<double> values_se;  // zero when analytic
  std::vector<double> gaps;       // V_1 - V_delta
  double mean_beta = 0.0;
  double aupbc = 0.0;
  double aupbc_norm = 0.0;
  // Confounded extras, Monte Carlo:
  double true_gamma = 0.0;         // max_a |nu_a - mu_a|
  double dagger_value = 0.0;       // value of the confounding-optimal rule
  double dagger_value_se = 0.0;
};

OracleValues oracle(const ScenarioSpec& spec, const std::vector<double>& deltas,
                    long mc_draws = 1000000);

/// Analytic quantile / value / mean-beta / normalized-area helpers for the
/// identified scenario families.
double oracle_quantile(ScenarioId id, double delta);
double oracle_value(ScenarioId id, double delta);
double oracle_mean_beta(ScenarioId id);
double oracle_aupbc_norm(ScenarioId id);

/// Optimal rules of the identified scenarios.
int oracle_policy(const ScenarioSpec& spec, double x);          // h*(x)
int oracle_contact(const ScenarioSpec& spec, double x, double delta);

}  // namespace cpb
