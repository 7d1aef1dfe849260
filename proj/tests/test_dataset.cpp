#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>

#include "cpb/dataset.hpp"

using namespace cpb;

namespace {

Cohort tiny_cohort() {
  Eigen::MatrixXd x(4, 2);
  x << 0.1, -1.0, 0.2, 0.5, -0.3, 2.0, 1.5, -0.25;
  return Cohort({"x1", "x2"}, x, {1, 0, 1, 0},
                (Eigen::VectorXd(4) << 0.25, -1.5, 3.0, 0.0).finished());
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/cpb_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("cohort basics and validation") {
  const Cohort c = tiny_cohort();
  CHECK(c.n() == 4);
  CHECK(c.dim() == 2);
  CHECK(c.column_index("x2") == 1);
  CHECK_THROWS_AS(c.column_index("z"), SchemaError);

  Eigen::MatrixXd x = c.covariates();
  CHECK_THROWS(Cohort({"x1", "x2"}, x, {1, 1, 1, 1}, c.outcome()));
  CHECK_THROWS(Cohort({"x1", "x2"}, x, {1, 0, 2, 0}, c.outcome()));
  Eigen::VectorXd bad = c.outcome();
  bad(2) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(Cohort({"x1", "x2"}, x, {1, 0, 1, 0}, bad));
}

TEST_CASE("csv round trip is bit identical") {
  const Cohort c = tiny_cohort();
  TempFile tmp("roundtrip.csv");
  save_csv(c, tmp.path);
  const Cohort back = load_csv(tmp.path, CsvSchema{});
  REQUIRE(back.n() == c.n());
  CHECK(back.covariate_names() == c.covariate_names());
  for (Eigen::Index i = 0; i < c.n(); ++i) {
    CHECK(back.outcome()(i) == c.outcome()(i));
    CHECK(back.treatment()[static_cast<std::size_t>(i)] ==
          c.treatment()[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < c.dim(); ++j) {
      CHECK(back.covariates()(i, j) == c.covariates()(i, j));
    }
  }
}

TEST_CASE("csv loading guards") {
  TempFile tmp("guards.csv");
  SUBCASE("single-arm file") {
    std::ofstream(tmp.path) << "x,a,y\n1,1,0.5\n2,1,0.25\n3,1,0\n";
    CHECK_THROWS_AS(load_csv(tmp.path, CsvSchema{}), PositivityError);
  }
  SUBCASE("malformed cell cites the row") {
    std::ofstream(tmp.path) << "x,a,y\n1,1,0.5\n2,0,abc\n";
    try {
      load_csv(tmp.path, CsvSchema{});
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
  }
  SUBCASE("missing named column") {
    std::ofstream(tmp.path) << "x,a,y\n1,1,0.5\n2,0,0.25\n";
    CsvSchema schema;
    schema.outcome = "response";
    CHECK_THROWS_AS(load_csv(tmp.path, schema), SchemaError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS(load_csv("/tmp/definitely_not_here_8271.csv", CsvSchema{}));
  }
}

TEST_CASE("covariate views") {
  const Cohort c = tiny_cohort();
  const CovariateView all = select_covariates(c, {"x1", "x2"});
  CHECK(all.is_identity());
  CHECK(all.matrix() == c.covariates());

  const CovariateView one = select_covariates(c, {"x2"});
  CHECK_FALSE(one.is_identity());
  CHECK(one.dim() == 1);
  CHECK(one.matrix()(0, 0) == doctest::Approx(-1.0));
  Eigen::VectorXd row = c.covariates().row(2);
  CHECK(one.select_row(row)(0) == doctest::Approx(2.0));

  const CovariateView none = select_covariates(c, {});
  CHECK(none.dim() == 0);
  CHECK(none.matrix().cols() == 0);

  CHECK_THROWS_AS(select_covariates(c, {"z"}), SchemaError);
}

TEST_CASE("fold assignment determinism and balance") {
  const FoldAssignment f1 = make_folds(10, 2, 7);
  const FoldAssignment f2 = make_folds(10, 2, 7);
  CHECK(f1.assignment == f2.assignment);

  const FoldAssignment f3 = make_folds(10, 2, 8);
  CHECK(f1.assignment != f3.assignment);

  const FoldAssignment f5 = make_folds(10, 5, 3);
  std::vector<int> counts(5, 0);
  for (int a : f5.assignment) counts[static_cast<std::size_t>(a)]++;
  for (int c : counts) CHECK(c == 2);

  const FoldAssignment odd = make_folds(11, 3, 1);
  std::multiset<int> sizes;
  std::vector<int> cnt(3, 0);
  for (int a : odd.assignment) cnt[static_cast<std::size_t>(a)]++;
  for (int c : cnt) sizes.insert(c);
  CHECK(*sizes.rbegin() - *sizes.begin() <= 1);

  CHECK_THROWS_AS(make_folds(3, 4, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_folds(10, 1, 1), std::invalid_argument);
}
