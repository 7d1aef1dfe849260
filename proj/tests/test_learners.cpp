#include <doctest.h>

#include <cmath>

#include "cpb/learners.hpp"
#include "cpb/rng.hpp"

using namespace cpb;

namespace {

Eigen::VectorXd at(double x) {
  return (Eigen::VectorXd(1) << x).finished();
}

}  // namespace

TEST_CASE("spec parsing round trips") {
  CHECK(LearnerSpec::parse("linear").kind == LearnerKind::kGlobalLinear);
  CHECK(LearnerSpec::parse("linear:lambda=0.5").ridge == doctest::Approx(0.5));
  CHECK(LearnerSpec::parse("knn:k=9").neighbors == 9);
  CHECK(LearnerSpec::parse("kernel:h=0.3").bandwidth == doctest::Approx(0.3));
  CHECK(LearnerSpec::parse("loclin").kind == LearnerKind::kLocalLinear);
  CHECK_THROWS_AS(LearnerSpec::parse("forest"), std::invalid_argument);
  CHECK_THROWS_AS(LearnerSpec::parse("knn:k=0"), std::invalid_argument);

  const LearnerSpec spec = LearnerSpec::parse("kernel:h=0.3");
  CHECK(LearnerSpec::parse(spec.to_string()).bandwidth ==
        doctest::Approx(0.3));
}

TEST_CASE("constant targets give a constant fit for every learner") {
  Eigen::MatrixXd x(5, 1);
  x << -2, -1, 0, 1, 2;
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(5, 3.0);
  for (const char* name : {"linear", "knn:k=3", "kernel", "loclin"}) {
    const auto fit = fit_regression(LearnerSpec::parse(name), x, y);
    CHECK(fit.predict(at(0.7)) == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(fit.predict(at(-5.0)) == doctest::Approx(3.0).epsilon(1e-6));
  }
}

TEST_CASE("global linear reproduces exact least squares") {
  Eigen::MatrixXd x(4, 1);
  x << 0, 1, 2, 3;
  Eigen::VectorXd y(4);
  for (int i = 0; i < 4; ++i) y(i) = 2.0 * x(i, 0) + 1.0;
  const auto fit = fit_regression(LearnerSpec::parse("linear"), x, y);
  CHECK(std::abs(fit.predict(at(0.5)) - 2.0) < 1e-8);
  CHECK(std::abs(fit.predict(at(10.0)) - 21.0) < 1e-8);
}

TEST_CASE("zero-column design is the mean fit") {
  Eigen::MatrixXd x(3, 0);
  const Eigen::VectorXd y = (Eigen::VectorXd(3) << 1.0, 2.0, 6.0).finished();
  const auto fit = fit_regression(LearnerSpec::parse("kernel"), x, y);
  CHECK(fit.predict(Eigen::VectorXd(0)) == doctest::Approx(3.0));
}

TEST_CASE("knn with k equal to n is the global mean") {
  Eigen::MatrixXd x(4, 1);
  x << 1, 2, 3, 4;
  const Eigen::VectorXd y = (Eigen::VectorXd(4) << 0, 1, 2, 9).finished();
  const auto fit = fit_regression(LearnerSpec::parse("knn:k=4"), x, y);
  CHECK(fit.predict(at(-3.0)) == doctest::Approx(3.0));
  CHECK(fit.predict(at(100.0)) == doctest::Approx(3.0));
}

TEST_CASE("singular unpenalized design raises; ridge repairs it") {
  Eigen::MatrixXd x(4, 2);
  x << 1, 2, 2, 4, 3, 6, 4, 8;  // second column = 2 * first
  Eigen::VectorXd y(4);
  y << 1, 2, 3, 4;
  CHECK_THROWS_AS(fit_regression(LearnerSpec::parse("linear"), x, y),
                  NumericError);
  const auto fit = fit_regression(LearnerSpec::parse("linear:lambda=1e-6"), x, y);
  CHECK(std::isfinite(fit.predict((Eigen::VectorXd(2) << 1, 2).finished())));
}

TEST_CASE("empty training set is rejected") {
  Eigen::MatrixXd x(0, 1);
  Eigen::VectorXd y(0);
  CHECK_THROWS_AS(fit_regression(LearnerSpec::parse("kernel"), x, y),
                  std::invalid_argument);
}

TEST_CASE("kernel smoother tracks a smooth signal") {
  Rng rng(11);
  const int n = 400;
  Eigen::MatrixXd x(n, 1);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform(-2.0, 2.0);
    y(i) = std::sin(x(i, 0)) + 0.1 * rng.normal();
  }
  for (const char* name : {"kernel", "loclin", "knn:k=25"}) {
    const auto fit = fit_regression(LearnerSpec::parse(name), x, y);
    double mse = 0.0;
    for (double g = -1.5; g <= 1.5; g += 0.25) {
      const double err = fit.predict(at(g)) - std::sin(g);
      mse += err * err;
    }
    CHECK(mse / 13.0 < 0.01);
  }
}

TEST_CASE("large-sample 1-d smoother path agrees with the direct one") {
  // Same signal fitted below and above the grid-evaluation cutoff; both
  // versions should approximate the target equally well.
  Rng rng(5);
  const int n = 4000;
  Eigen::MatrixXd x(n, 1);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform(-2.0, 2.0);
    y(i) = x(i, 0) * x(i, 0) + 0.2 * rng.normal();
  }
  const auto big = fit_regression(LearnerSpec::parse("kernel:h=0.15"), x, y);
  const auto small = fit_regression(LearnerSpec::parse("kernel:h=0.15"),
                                    x.topRows(1500), y.head(1500));
  for (double g = -1.8; g <= 1.8; g += 0.3) {
    CHECK(std::abs(big.predict(at(g)) - g * g) < 0.08);
    CHECK(std::abs(big.predict(at(g)) - small.predict(at(g))) < 0.15);
  }
}

TEST_CASE("bandwidth default rule") {
  Eigen::VectorXd col(100);
  Rng rng(3);
  for (int i = 0; i < 100; ++i) col(i) = rng.normal();
  const double sd = std::sqrt((col.array() - col.mean()).square().sum() / 99.0);
  CHECK(silverman_bandwidth(col) ==
        doctest::Approx(1.06 * sd * std::pow(100.0, -0.2)));
  CHECK(silverman_bandwidth(Eigen::VectorXd::Zero(50)) > 0.0);
}
