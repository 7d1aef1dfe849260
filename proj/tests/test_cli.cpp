#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef CPB_CLI_PATH
#error "CPB_CLI_PATH must point at the built binary"
#endif

namespace {

using nlohmann::json;

int run(const std::string& args, const std::string& stdout_path) {
  const std::string cmd = std::string(CPB_CLI_PATH) + " " + args + " > " +
                          stdout_path + " 2> /dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json run_json(const std::string& args) {
  const std::string out = "/tmp/cpb_cli_out.json";
  REQUIRE(run(args, out) == 0);
  return json::parse(slurp(out));
}

}  // namespace

TEST_CASE("cli pipeline") {
  const std::string data = "/tmp/cpb_cli_s1.csv";
  const std::string nuis = "/tmp/cpb_cli_nuis.csv";

  const json sim = run_json("simulate --scenario S1 --n 1500 --seed 4 --data " +
                            data + " --grid 11 --mc-draws 10000");
  CHECK(sim["schema_version"] == 1);
  CHECK(sim["oracle"]["analytic"] == true);
  CHECK(sim["oracle"]["mean_beta"].get<double>() == doctest::Approx(0.5));

  // Count data rows.
  std::ifstream f(data);
  std::string line;
  int rows = -1;  // header
  while (std::getline(f, line)) ++rows;
  CHECK(rows == 1500);

  SUBCASE("determinism: identical invocations give identical bytes") {
    const std::string out1 = "/tmp/cpb_cli_a.json";
    const std::string out2 = "/tmp/cpb_cli_b.json";
    const std::string args =
        "qini --data " + data + " --grid 11 --fold-seed 2";
    REQUIRE(run(args, out1) == 0);
    REQUIRE(run(args, out2) == 0);
    CHECK(slurp(out1) == slurp(out2));
  }

  SUBCASE("zero budget value is the sample outcome mean") {
    const json val = run_json("value --data " + data + " --delta 0");
    double mean_y = 0.0;
    std::ifstream df(data);
    std::string row;
    std::getline(df, row);  // header x,a,y
    int n = 0;
    while (std::getline(df, row)) {
      mean_y += std::stod(row.substr(row.rfind(',') + 1));
      ++n;
    }
    mean_y /= n;
    CHECK(val["evaluations"][0]["value"].get<double>() ==
          doctest::Approx(mean_y).epsilon(1e-12));
  }

  SUBCASE("fit artifact feeds downstream commands without refitting") {
    const json fit = run_json("fit --data " + data + " --fold-seed 3 " +
                              "--nuisance-out " + nuis);
    CHECK(fit["command"] == "fit");

    const json direct = run_json("value --data " + data +
                                 " --fold-seed 3 --delta 0.5");
    const json reused = run_json("value --data " + data + " --nuisances " +
                                 nuis + " --delta 0.5");
    CHECK(reused["evaluations"][0]["value"].get<double>() ==
          doctest::Approx(
              direct["evaluations"][0]["value"].get<double>()));
  }

  SUBCASE("sensitivity rows") {
    const json sens = run_json("sensitivity --data " + data +
                               " --gamma 0 --gamma 0.4 --delta 0.5");
    REQUIRE(sens["bands"].size() == 2);
    CHECK(sens["bands"][0]["half_width"].get<double>() == doctest::Approx(0.0));
    CHECK(sens["bands"][1]["width_bound"].get<double>() == doctest::Approx(0.4));
  }

  SUBCASE("restricted output carries the mode") {
    const json r = run_json("restricted --data " + data +
                            " --w x --mode contact-only --delta 0.5 --grid 11");
    CHECK(r["mode"] == "contact-only");
    CHECK(r.contains("area"));
    const json rb = run_json("restricted --data " + data +
                             " --w x --mode both --delta 0.5");
    CHECK(rb["mode"] == "both");
    CHECK_FALSE(rb.contains("area"));
  }
}

TEST_CASE("cli exit codes") {
  const std::string out = "/tmp/cpb_cli_err.json";
  CHECK(run("value --no-such-flag", out) == 2);
  CHECK(run("simulate --scenario S9 --n 10 --seed 1 --data /tmp/x.csv", out) == 2);
  CHECK(run("value --data /tmp/definitely_missing_31415.csv", out) == 1);
  CHECK(run("", out) == 2);
}
