#pragma once

// Monte Carlo experiment driver: builds the two-half benchmark family,
// computes the population target on a grid, sweeps (method, n) cells with
// index-seeded trials, and aggregates truncated mean squared errors into
// CSV-ready rows.

#include <cstdint>
#include <string>
#include <vector>

#include "ktd/config.hpp"
#include "ktd/mrp.hpp"
#include "ktd/rkhs.hpp"
#include "ktd/theory.hpp"

namespace ktd {

struct MethodSpec {
  std::string name;
  Dataset::Mode mode = Dataset::Mode::SinglePath;
  int K = 1;
  double td_lambda = -1.0;  // >= 0 selects TD(lambda) weights of length K
  int episode_len = 0;      // Episodes mode only
};

struct ExperimentConfig {
  std::string label;  // optional prefix on method names
  double tau_star = std::exp(4.0) / 2.0;
  double theta = 0.0;
  double r0 = 1.0;
  double gamma = 0.9;
  std::string kernel_family = "poly";  // "poly" or "exp"
  double poly_exponent = 1.2;          // eigenvalue exponent 2 alpha
  int kernel_J = 128;
  std::vector<int> n_grid;
  int trials = 200;
  std::uint64_t base_seed = 20240817;
  double trunc_mult = 100.0;  // MSE cap multiplier
  int grid_cells = 64;
  RidgeRule ridge_rule = RidgeRule::Experiment;
  double ridge_c0 = 1.0;      // Theorem-rule constant
  double ridge_fixed = -1.0;  // >= 0 overrides the rule entirely
  std::vector<MethodSpec> methods;

  KernelSpec make_kernel() const;
  void validate() const;
};

struct ResultRow {
  std::string method;
  int n = 0;
  double mse_mean = 0.0;
  double mse_stderr = 0.0;
  int trials = 0;
  int failures = 0;
  int truncations = 0;  // internal diagnostic, not part of the CSV contract
};

// floor(exp(7 + 0.3 i)) for i = 0..imax.
std::vector<int> desk_sample_sizes(int imax = 6);

ExperimentConfig config_from_file(const Config& cfg);

// Named parameter presets for the four benchmark figures; full_scale expands
// the sample-size grid and trial count.
std::vector<ExperimentConfig> figure_preset(const std::string& name,
                                            bool full_scale);

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

std::string csv_string(const std::vector<ResultRow>& rows);
void emit_csv(const std::vector<ResultRow>& rows, const std::string& path);
std::vector<ResultRow> parse_csv(const std::string& text);

// Least-squares slope of log(mse_mean) against log(n) over rows of one
// method with n >= n_min; requires at least three points.
double fit_loglog_slope(const std::vector<ResultRow>& rows,
                        const std::string& method, double n_min);

}  // namespace ktd
