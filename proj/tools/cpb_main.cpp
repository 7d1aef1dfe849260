// Command-line front end: simulate / fit / value / qini / aupbc /
// sensitivity / restricted. JSON goes to stdout (or --out); CSV artifacts are
// written next to it. Exit codes: 0 success, 1 data or numeric failure,
// 2 argument errors.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cpb/benefit.hpp"
#include "cpb/dataset.hpp"
#include "cpb/errors.hpp"
#include "cpb/learners.hpp"
#include "cpb/nuisance.hpp"
#include "cpb/policy.hpp"
#include "cpb/restricted.hpp"
#include "cpb/sensitivity.hpp"
#include "cpb/simulation.hpp"

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void emit(const json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out_path);
    if (!f) throw cpb::ParseError("cannot open output file " + out_path);
    f << text;
  }
}

struct FitOptions {
  std::string data;
  std::string covariates;  // comma-separated; empty = all non-schema columns
  std::string treatment = "a";
  std::string outcome = "y";
  std::string nuisances;  // precomputed artifact; skips refitting
  std::string learner_propensity = "kernel";
  std::string learner_outcome = "kernel";
  std::string learner_stage = "kernel";
  int folds = 2;
  std::uint64_t fold_seed = 1;
  double eps = 0.01;
  bool pooled_stage = false;
};

void add_fit_options(CLI::App* cmd, FitOptions& opt, bool data_required) {
  auto* data = cmd->add_option("--data", opt.data, "cohort CSV path");
  if (data_required) data->required();
  cmd->add_option("--covariates", opt.covariates,
                  "comma-separated covariate columns (default: all others)");
  cmd->add_option("--treatment", opt.treatment, "treatment column name");
  cmd->add_option("--outcome", opt.outcome, "outcome column name");
  cmd->add_option("--nuisances", opt.nuisances,
                  "reuse a nuisance CSV written by `fit` instead of refitting");
  cmd->add_option("--learner-propensity", opt.learner_propensity,
                  "propensity learner spec");
  cmd->add_option("--learner-outcome", opt.learner_outcome,
                  "outcome learner spec");
  cmd->add_option("--learner-stage", opt.learner_stage,
                  "second-stage learner spec");
  cmd->add_option("--folds", opt.folds, "cross-fitting folds")
      ->check(CLI::Range(2, 1000));
  cmd->add_option("--fold-seed", opt.fold_seed, "fold shuffle seed");
  cmd->add_option("--eps", opt.eps, "propensity clip level");
  cmd->add_flag("--pooled-stage", opt.pooled_stage,
                "single pooled second-stage fit instead of fold averaging");
}

struct Artifacts {
  cpb::Cohort cohort;
  cpb::NuisanceFits fits;
  Eigen::VectorXd phi;
  Eigen::VectorXd beta;
};

// Parse the CSV written by save_nuisances_csv back into per-unit vectors.
void load_nuisance_csv(const std::string& path, Eigen::Index n,
                       cpb::NuisanceFits* fits, Eigen::VectorXd* phi,
                       Eigen::VectorXd* beta) {
  std::ifstream f(path);
  if (!f) throw cpb::ParseError("cannot open nuisance file " + path);
  std::string line;
  if (!std::getline(f, line)) throw cpb::ParseError("empty nuisance file");
  const std::string expect =
      "unit,pi_hat,mu0_hat,mu1_hat,tau_hat,h_star,phi_hat,beta_hat";
  if (line != expect) {
    throw cpb::SchemaError("unexpected nuisance header: " + line);
  }
  fits->pi.resize(n);
  fits->mu0.resize(n);
  fits->mu1.resize(n);
  fits->tau.resize(n);
  fits->h_star.assign(static_cast<std::size_t>(n), 0);
  phi->resize(n);
  beta->resize(n);
  Eigen::Index row = 0;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    if (row >= n) throw cpb::ParseError("nuisance file longer than cohort");
    std::stringstream ss(line);
    std::string cell;
    double vals[8];
    for (int c = 0; c < 8; ++c) {
      if (!std::getline(ss, cell, ',')) {
        throw cpb::ParseError("short nuisance row " + std::to_string(row));
      }
      try {
        vals[c] = std::stod(cell);
      } catch (const std::exception&) {
        throw cpb::ParseError("bad numeric cell in nuisance row " +
                              std::to_string(row));
      }
    }
    fits->pi(row) = vals[1];
    fits->mu0(row) = vals[2];
    fits->mu1(row) = vals[3];
    fits->tau(row) = vals[4];
    fits->h_star[static_cast<std::size_t>(row)] = vals[5] > 0.5 ? 1 : 0;
    (*phi)(row) = vals[6];
    (*beta)(row) = vals[7];
    ++row;
  }
  if (row != n) throw cpb::ParseError("nuisance file shorter than cohort");
}

Artifacts prepare(const FitOptions& opt) {
  cpb::CsvSchema schema;
  schema.covariates = split_names(opt.covariates);
  schema.treatment = opt.treatment;
  schema.outcome = opt.outcome;
  cpb::Cohort cohort = cpb::load_csv(opt.data, schema);

  cpb::NuisanceFits fits;
  Eigen::VectorXd phi, beta;
  if (!opt.nuisances.empty()) {
    load_nuisance_csv(opt.nuisances, cohort.n(), &fits, &phi, &beta);
    fits.eps = opt.eps;
    fits.folds = cpb::make_folds(cohort.n(), opt.folds, opt.fold_seed);
  } else {
    const auto folds = cpb::make_folds(cohort.n(), opt.folds, opt.fold_seed);
    fits = cpb::crossfit_nuisances(
        cohort, folds, cpb::LearnerSpec::parse(opt.learner_propensity),
        cpb::LearnerSpec::parse(opt.learner_outcome), opt.eps);
    phi = cpb::pseudo_outcomes(cohort, fits);
    std::vector<Eigen::Index> all(static_cast<std::size_t>(cohort.dim()));
    for (Eigen::Index j = 0; j < cohort.dim(); ++j)
      all[static_cast<std::size_t>(j)] = j;
    cpb::CovariateView view(cohort, all);
    const cpb::CpbModel model =
        cpb::dr_learn_cpb(cohort, fits, view,
                          cpb::LearnerSpec::parse(opt.learner_stage),
                          !opt.pooled_stage);
    beta = model.predict_rows(view.matrix());
  }
  return Artifacts{std::move(cohort), std::move(fits), std::move(phi),
                   std::move(beta)};
}

json evaluation_json(const cpb::PolicyEvaluation& ev, Eigen::Index n) {
  return json{{"delta", ev.delta},
              {"threshold", ev.threshold},
              {"contacted_fraction", ev.contacted_fraction},
              {"value", ev.value},
              {"standard_error", ev.standard_error(n)},
              {"alpha", ev.alpha},
              {"ci_lower", ev.ci_lower},
              {"ci_upper", ev.ci_upper}};
}

json aupbc_json(const cpb::AupbcResult& area) {
  json j{{"area", area.area},
         {"kappa2", area.kappa2},
         {"area_ci_lower", area.area_ci_lower},
         {"area_ci_upper", area.area_ci_upper},
         {"normalized_defined", area.normalized_defined}};
  if (area.normalized_defined) {
    j["normalized"] = area.normalized;
    j["zeta2"] = area.zeta2;
    j["norm_ci_lower"] = area.norm_ci_lower;
    j["norm_ci_upper"] = area.norm_ci_upper;
  }
  return j;
}

json oracle_json(const cpb::OracleValues& o) {
  json j{{"scenario", cpb::scenario_name(o.id)},
         {"analytic", o.analytic},
         {"deltas", o.deltas},
         {"quantiles", o.quantiles},
         {"values", o.values},
         {"values_se", o.values_se},
         {"gaps", o.gaps},
         {"mean_beta", o.mean_beta},
         {"aupbc", o.aupbc},
         {"aupbc_norm", o.aupbc_norm}};
  if (!o.analytic) {
    j["true_gamma"] = o.true_gamma;
    j["dagger_value"] = o.dagger_value;
    j["dagger_value_se"] = o.dagger_value_se;
  }
  return j;
}

int dispatch(CLI::App& app, int argc, char** argv);

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"budget-constrained treatment policy toolkit"};
  app.require_subcommand(1);
  try {
    return dispatch(app, argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "argument error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

namespace {

int dispatch(CLI::App& app, int argc, char** argv) {
  std::string out_path;
  app.add_option("--out", out_path, "write JSON here instead of stdout");
  int threads = 0;
  if (const char* env = std::getenv("CPB_THREADS")) {
    threads = std::atoi(env);
  }
  app.add_option("--threads", threads,
                 "worker cap (computation is deterministic regardless)");

  // simulate ---------------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "draw a synthetic cohort");
  std::string scenario = "S1";
  std::string sim_data;
  std::string oracle_out;
  Eigen::Index sim_n = 1000;
  std::uint64_t sim_seed = 0;
  double noise_sd = 1.0, lambda_out = 0.5, lambda_trt = 1.0;
  int sim_grid = 101;
  long mc_draws = 1000000;
  sim->add_option("--scenario", scenario, "S1 | S1star | S2 | S2star | confounded");
  sim->add_option("--n", sim_n, "sample size")->required();
  sim->add_option("--seed", sim_seed, "generator seed")->required();
  sim->add_option("--noise-sd", noise_sd, "outcome noise sd");
  sim->add_option("--lambda-out", lambda_out, "confounder outcome shift");
  sim->add_option("--lambda-trt", lambda_trt, "confounder treatment logit shift");
  sim->add_option("--data", sim_data, "cohort CSV path")->required();
  sim->add_option("--oracle-out", oracle_out, "oracle JSON sidecar path");
  sim->add_option("--grid", sim_grid, "oracle budget grid points")
      ->check(CLI::Range(2, 100000));
  sim->add_option("--mc-draws", mc_draws, "Monte Carlo draws for the oracle");

  // shared fit options for the estimator subcommands -----------------------
  FitOptions fit_opt, value_opt, qini_opt, aupbc_opt, sens_opt, restr_opt;

  auto* fit = app.add_subcommand("fit", "cross-fit nuisances and benefit scores");
  add_fit_options(fit, fit_opt, true);
  std::string nuisance_out;
  fit->add_option("--nuisance-out", nuisance_out,
                  "per-unit nuisance/score CSV artifact")
      ->required();

  auto* value = app.add_subcommand("value", "policy value at chosen budgets");
  add_fit_options(value, value_opt, true);
  std::vector<double> deltas{0.5};
  double alpha = 0.05;
  value->add_option("--delta", deltas, "budget(s)");
  value->add_option("--alpha", alpha, "interval level");

  auto* qini = app.add_subcommand("qini", "value curve over a budget grid");
  add_fit_options(qini, qini_opt, true);
  int grid_points = 101;
  double qini_alpha = 0.05;
  std::string curve_out;
  qini->add_option("--grid", grid_points, "budget grid points")
      ->check(CLI::Range(2, 100000));
  qini->add_option("--alpha", qini_alpha, "interval level");
  qini->add_option("--curve-out", curve_out, "plot-ready curve CSV path");

  auto* area_cmd = app.add_subcommand("aupbc", "area under the value curve");
  add_fit_options(area_cmd, aupbc_opt, true);
  int area_grid = 101;
  double area_alpha = 0.05;
  area_cmd->add_option("--grid", area_grid, "budget grid points")
      ->check(CLI::Range(2, 100000));
  area_cmd->add_option("--alpha", area_alpha, "interval level");

  auto* sens = app.add_subcommand("sensitivity",
                                  "value bands under bounded confounding");
  add_fit_options(sens, sens_opt, true);
  std::vector<double> gammas{0.0};
  double sens_delta = 0.5, sens_alpha = 0.05;
  sens->add_option("--gamma", gammas, "confounding bound(s)");
  sens->add_option("--delta", sens_delta, "budget");
  sens->add_option("--alpha", sens_alpha, "interval level");

  auto* restr = app.add_subcommand("restricted",
                                   "policies limited to a covariate subset");
  add_fit_options(restr, restr_opt, true);
  std::string w_columns;
  std::string mode = "both";
  std::vector<double> restr_deltas{0.5};
  int restr_grid = 101;
  double restr_alpha = 0.05;
  restr->add_option("--w", w_columns,
                    "comma-separated restricted columns (empty = constant)");
  restr->add_option("--mode", mode, "both | contact-only");
  restr->add_option("--delta", restr_deltas, "budget(s)");
  restr->add_option("--grid", restr_grid, "budget grid points (contact-only)")
      ->check(CLI::Range(2, 100000));
  restr->add_option("--alpha", restr_alpha, "interval level");

  app.parse(argc, argv);

  json root;
  root["schema_version"] = kSchemaVersion;

  if (*sim) {
    cpb::ScenarioSpec spec;
    spec.id = cpb::parse_scenario(scenario);
    spec.noise_sd = noise_sd;
    spec.lambda_out = lambda_out;
    spec.lambda_trt = lambda_trt;
    spec.n = sim_n;
    spec.seed = sim_seed;
    const cpb::GeneratedSample sample = cpb::generate(spec);
    cpb::save_csv(sample.cohort, sim_data);
    const cpb::OracleValues o =
        cpb::oracle(spec, cpb::default_delta_grid(sim_grid), mc_draws);
    root["command"] = "simulate";
    root["scenario"] = scenario;
    root["n"] = sim_n;
    root["seed"] = sim_seed;
    root["noise_sd"] = noise_sd;
    root["data"] = sim_data;
    root["oracle"] = oracle_json(o);
    if (!oracle_out.empty()) {
      json sidecar{{"schema_version", kSchemaVersion},
                   {"oracle", oracle_json(o)}};
      emit(sidecar, oracle_out);
    }
    emit(root, out_path);
    return 0;
  }

  if (*fit) {
    const Artifacts art = prepare(fit_opt);
    cpb::save_nuisances_csv(art.fits, art.phi, art.beta, nuisance_out);
    root["command"] = "fit";
    root["n"] = art.cohort.n();
    root["folds"] = fit_opt.folds;
    root["eps"] = fit_opt.eps;
    root["learner_propensity"] = fit_opt.learner_propensity;
    root["learner_outcome"] = fit_opt.learner_outcome;
    root["learner_stage"] = fit_opt.learner_stage;
    root["mean_phi"] = art.phi.mean();
    root["mean_beta"] = art.beta.mean();
    root["nuisance_out"] = nuisance_out;
    emit(root, out_path);
    return 0;
  }

  if (*value) {
    const Artifacts art = prepare(value_opt);
    const auto at_one = cpb::estimate_value(art.cohort.outcome(), art.phi,
                                            art.beta, 1.0, alpha);
    root["command"] = "value";
    root["n"] = art.cohort.n();
    json rows = json::array();
    for (double d : deltas) {
      const auto ev = cpb::estimate_value(art.cohort.outcome(), art.phi,
                                          art.beta, d, alpha);
      json row = evaluation_json(ev, art.cohort.n());
      const auto gap = cpb::gap_to_unconstrained(ev, at_one, art.cohort.n());
      row["gap_to_unconstrained"] = {{"gap", gap.gap},
                                     {"bound", gap.bound},
                                     {"within_bound", gap.within_bound}};
      rows.push_back(std::move(row));
    }
    root["evaluations"] = std::move(rows);
    emit(root, out_path);
    return 0;
  }

  if (*qini) {
    const Artifacts art = prepare(qini_opt);
    const auto grid = cpb::default_delta_grid(grid_points);
    const auto report = cpb::qini_curve(art.cohort.outcome(), art.phi,
                                        art.beta, grid, qini_alpha);
    root["command"] = "qini";
    root["n"] = art.cohort.n();
    root["grid"] = report.grid;
    root["values"] = report.values_raw;
    root["values_monotone"] = report.values_monotone;
    root["thresholds"] = report.thresholds;
    root["standard_errors"] = report.standard_errors;
    root["alpha"] = report.alpha;
    root["aupbc"] = report.area.area;
    if (report.area.normalized_defined) {
      root["aupbc_norm"] = report.area.normalized;
    }
    root["area"] = aupbc_json(report.area);
    if (!curve_out.empty()) {
      std::ofstream f(curve_out);
      if (!f) throw cpb::ParseError("cannot open curve file " + curve_out);
      f << "delta,value,value_monotone,threshold,standard_error\n";
      char buf[256];
      for (std::size_t i = 0; i < report.grid.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      report.grid[i], report.values_raw[i],
                      report.values_monotone[i], report.thresholds[i],
                      report.standard_errors[i]);
        f << buf;
      }
    }
    emit(root, out_path);
    return 0;
  }

  if (*area_cmd) {
    const Artifacts art = prepare(aupbc_opt);
    const auto grid = cpb::default_delta_grid(area_grid);
    const auto area = cpb::aupbc(art.cohort.outcome(), art.phi, art.beta,
                                 grid, area_alpha);
    root["command"] = "aupbc";
    root["n"] = art.cohort.n();
    root["grid_points"] = area_grid;
    root["result"] = aupbc_json(area);
    emit(root, out_path);
    return 0;
  }

  if (*sens) {
    const Artifacts art = prepare(sens_opt);
    const auto ev = cpb::estimate_value(art.cohort.outcome(), art.phi,
                                        art.beta, sens_delta, sens_alpha);
    root["command"] = "sensitivity";
    root["n"] = art.cohort.n();
    root["delta"] = sens_delta;
    root["value"] = ev.value;
    json rows = json::array();
    for (double g : gammas) {
      const auto band = cpb::sensitivity_bounds(art.cohort, art.phi, ev,
                                                art.fits, g, sens_alpha);
      rows.push_back(json{{"gamma", band.gamma},
                          {"lower", band.lower},
                          {"upper", band.upper},
                          {"half_width", band.half_width},
                          {"width_bound", band.width_bound},
                          {"gap_bound", band.gap_bound},
                          {"lower_ci", band.lower_ci},
                          {"upper_ci", band.upper_ci}});
    }
    root["bands"] = std::move(rows);
    emit(root, out_path);
    return 0;
  }

  if (*restr) {
    if (!restr_opt.nuisances.empty()) {
      throw std::invalid_argument(
          "restricted requires refitting; drop --nuisances");
    }
    const Artifacts art = prepare(restr_opt);
    const auto view = cpb::select_covariates(art.cohort, split_names(w_columns));
    const auto stage = cpb::LearnerSpec::parse(restr_opt.learner_stage);
    cpb::RestrictedScores scores;
    if (mode == "both") {
      scores = cpb::restricted_scores_both(art.cohort, art.fits, view, stage);
    } else if (mode == "contact-only") {
      scores = cpb::restricted_scores_contact_only(art.cohort, art.fits,
                                                   art.phi, view, stage);
    } else {
      throw std::invalid_argument("mode must be 'both' or 'contact-only'");
    }
    root["command"] = "restricted";
    root["mode"] = mode;
    root["n"] = art.cohort.n();
    root["w"] = split_names(w_columns);
    json rows = json::array();
    for (double d : restr_deltas) {
      const auto ev = cpb::restricted_value(art.cohort.outcome(), scores, d,
                                            restr_alpha);
      rows.push_back(evaluation_json(ev, art.cohort.n()));
    }
    root["evaluations"] = std::move(rows);
    if (scores.mode == cpb::RestrictionMode::kContactOnly) {
      const auto area = cpb::restricted_aupbc(
          art.cohort.outcome(), scores, cpb::default_delta_grid(restr_grid),
          restr_alpha);
      root["area"] = aupbc_json(area);
    }
    emit(root, out_path);
    return 0;
  }

  return 0;
}

}  // namespace
