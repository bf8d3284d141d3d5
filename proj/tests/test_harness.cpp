#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ktd/harness.hpp"

using namespace ktd;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig ec;
  ec.tau_star = 4.0;
  ec.theta = 0.0;
  ec.kernel_family = "exp";
  ec.kernel_J = 8;
  ec.n_grid = {200, 400};
  ec.trials = 3;
  ec.methods.push_back({"path", Dataset::Mode::SinglePath, 1, -1.0, 0});
  ec.methods.push_back({"iid", Dataset::Mode::IidPairs, 1, -1.0, 0});
  return ec;
}

}  // namespace

TEST_CASE("desk-scale sample sizes") {
  const std::vector<int> ns = desk_sample_sizes();
  CHECK(ns == std::vector<int>{1096, 1480, 1998, 2697, 3640, 4914, 6634});
  CHECK(desk_sample_sizes(2) == std::vector<int>{1096, 1480, 1998});
}

TEST_CASE("runs are deterministic and failure free on easy instances") {
  const ExperimentConfig ec = tiny_config();
  const std::vector<ResultRow> a = run_experiment(ec);
  const std::vector<ResultRow> b = run_experiment(ec);
  CHECK(csv_string(a) == csv_string(b));
  CHECK(a.size() == 4);  // 2 methods x 2 sample sizes
  for (const ResultRow& row : a) {
    CHECK(row.trials == 3);
    CHECK(row.failures == 0);
    CHECK(row.truncations == 0);
    CHECK(row.mse_mean > 0.0);
    CHECK(row.mse_stderr >= 0.0);
  }
}

TEST_CASE("aggregates match single-trial reruns") {
  ExperimentConfig ec = tiny_config();
  ec.n_grid = {200};
  ec.methods.resize(1);
  const ResultRow combined = run_experiment(ec)[0];

  std::vector<double> errs;
  for (int t = 0; t < 3; ++t) {
    ExperimentConfig one = ec;
    one.trials = 1;
    one.base_seed = ec.base_seed + t;
    errs.push_back(run_experiment(one)[0].mse_mean);
  }
  const double mean = (errs[0] + errs[1] + errs[2]) / 3.0;
  double var = 0.0;
  for (double e : errs) var += (e - mean) * (e - mean);
  var /= 2.0;  // sample variance
  CHECK(combined.mse_mean == doctest::Approx(mean).epsilon(1e-12));
  CHECK(combined.mse_stderr ==
        doctest::Approx(std::sqrt(var / 3.0)).epsilon(1e-10));
}

TEST_CASE("csv round trip") {
  std::vector<ResultRow> rows(2);
  rows[0] = {"fast:path", 1096, 1.25e-3, 4.0e-5, 200, 1, 0};
  rows[1] = {"fast:iid", 1480, 9.5e-4, 3.0e-5, 200, 0, 2};
  const std::vector<ResultRow> back = parse_csv(csv_string(rows));
  REQUIRE(back.size() == 2);
  for (int i = 0; i < 2; ++i) {
    CHECK(back[i].method == rows[i].method);
    CHECK(back[i].n == rows[i].n);
    CHECK(back[i].mse_mean == doctest::Approx(rows[i].mse_mean).epsilon(1e-10));
    CHECK(back[i].mse_stderr ==
          doctest::Approx(rows[i].mse_stderr).epsilon(1e-10));
    CHECK(back[i].trials == rows[i].trials);
    CHECK(back[i].failures == rows[i].failures);
  }
  CHECK(parse_csv("method,n,mse_mean,mse_stderr,trials,failures\n").empty());
  CHECK_THROWS(parse_csv("wrong,header\n"));
}

TEST_CASE("log-log slope fit") {
  std::vector<ResultRow> rows;
  for (int n : {1000, 2000, 4000, 8000}) {
    rows.push_back({"m", n, 5.0 / n, 0.0, 1, 0, 0});
    rows.push_back({"other", n, 3.0 * std::pow(n, -12.0 / 17.0), 0.0, 1, 0, 0});
  }
  CHECK(fit_loglog_slope(rows, "m", 0.0) == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(fit_loglog_slope(rows, "other", 0.0) ==
        doctest::Approx(-12.0 / 17.0).epsilon(1e-10));
  CHECK(fit_loglog_slope(rows, "m", 1500.0) ==
        doctest::Approx(-1.0).epsilon(1e-10));
  CHECK_THROWS(fit_loglog_slope(rows, "m", 4100.0));  // two points left
  CHECK_THROWS(fit_loglog_slope(rows, "absent", 0.0));
}

TEST_CASE("config parsing") {
  const Config raw = Config::parse(
      "# benchmark sweep\n"
      "label = slow\n"
      "tau_star = 201.7\n"
      "theta = 0.7853981633974483\n"
      "kernel = exp\n"
      "kernel_J = 8\n"
      "trials = 11\n"
      "seed = 99\n"
      "n_grid = 500, 1000\n"
      "methods = path:single:1, tdl:single:4:0.5, ep:episodes:1::20\n");
  const ExperimentConfig ec = config_from_file(raw);
  CHECK(ec.label == "slow");
  CHECK(ec.tau_star == doctest::Approx(201.7));
  CHECK(ec.kernel_family == "exp");
  CHECK(ec.trials == 11);
  CHECK(ec.base_seed == 99);
  CHECK(ec.n_grid == std::vector<int>{500, 1000});
  REQUIRE(ec.methods.size() == 3);
  CHECK(ec.methods[0].name == "path");
  CHECK(ec.methods[0].mode == Dataset::Mode::SinglePath);
  CHECK(ec.methods[1].K == 4);
  CHECK(ec.methods[1].td_lambda == doctest::Approx(0.5));
  CHECK(ec.methods[2].mode == Dataset::Mode::Episodes);
  CHECK(ec.methods[2].episode_len == 20);

  CHECK_THROWS(config_from_file(Config::parse("methods = broken:single\n")));
  CHECK_THROWS(config_from_file(Config::parse("n_grid = 500, 400\n")));
}

TEST_CASE("figure presets") {
  const auto f1a = figure_preset("fig1a", false);
  REQUIRE(f1a.size() == 2);
  CHECK(f1a[0].label != f1a[1].label);
  CHECK(f1a[0].theta == 0.0);
  CHECK(f1a[0].tau_star < f1a[1].tau_star);
  CHECK(f1a[0].n_grid == desk_sample_sizes());
  for (const auto& c : f1a) {
    REQUIRE(c.methods.size() == 2);
    CHECK(c.methods[0].mode == Dataset::Mode::SinglePath);
    CHECK(c.methods[1].mode == Dataset::Mode::IidPairs);
  }

  const auto f1b = figure_preset("fig1b", false);
  CHECK(f1b[0].theta == doctest::Approx(M_PI / 4));

  const auto f2b = figure_preset("fig2b", false);
  REQUIRE(f2b.size() == 1);
  REQUIRE(f2b[0].methods.size() == 3);
  CHECK(f2b[0].methods[0].K == 1);
  CHECK(f2b[0].methods[1].K == 5);
  CHECK(f2b[0].methods[2].K == 10);

  const auto full = figure_preset("fig1a", true);
  CHECK(full[0].n_grid.size() == 15);
  CHECK(full[0].trials == 5000);

  CHECK_THROWS(figure_preset("fig9", false));
}
