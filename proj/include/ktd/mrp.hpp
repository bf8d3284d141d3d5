#pragma once

// Markov reward processes on [0,1), trajectory / episode / i.i.d.-pair
// sampling, and exact discretization onto dyadic grids.

#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ktd {

using Rng = std::mt19937_64;

// Uniform double in [0,1) with exactly 53 random bits, so sampled states are
// dyadic rationals and behave deterministically across platforms.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Exact finite model on a dyadic grid: m cells of equal width 1/m is the
// default layout used everywhere (cell i covers [i/m, (i+1)/m)).
struct GridModel {
  Eigen::MatrixXd P;   // m x m row-stochastic transition matrix
  Eigen::VectorXd mu;  // stationary weights, sums to 1
  Eigen::VectorXd r;   // reward at cell midpoints
  int cells() const { return static_cast<int>(mu.size()); }
  double midpoint(int i) const { return (i + 0.5) / mu.size(); }
};

struct MrpInstance {
  double gamma = 0.9;
  double tau_star = 1.0;  // declared minorization mixing time
  std::function<double(double)> reward;
  std::function<double(double, Rng&)> step;     // draw next state
  std::function<double(Rng&)> draw_stationary;  // draw from mu
  std::function<GridModel(int)> discretize_fn;  // exact grid model, m cells
};

struct Dataset {
  enum class Mode { SinglePath, Episodes, IidPairs };
  Mode mode = Mode::SinglePath;
  std::vector<double> states;
  std::vector<double> rewards;  // reward at each state, cached
  std::vector<int> episode_len;
  int n() const { return static_cast<int>(states.size()); }
};

// Two-half transition kernel on [0,1): jump to the opposite half with
// probability 1/(2 tau*), otherwise stay, then draw uniformly within the
// target half.  Lebesgue measure is stationary and every row dominates
// (1/tau*) times Lebesgue, so the declared mixing time is exact.
// Reward is the three-piece step function r0 * phi_2 with rotation angle
// theta.
MrpInstance build_experiment_mrp(double tau_star, double theta, double r0,
                                 double gamma);

Dataset sample_single_path(const MrpInstance& mrp, int n, std::uint64_t seed);

// n independent transition pairs (x, x'); stored as episodes of length 2.
Dataset sample_iid_pairs(const MrpInstance& mrp, int n, std::uint64_t seed);

// Consecutive sampled episodes of length L, ceil(n/L) of them covering n
// states in total; each episode starts from a fresh stationary draw.
Dataset sample_episodes(const MrpInstance& mrp, int n, int L,
                        std::uint64_t seed);

GridModel discretize(const MrpInstance& mrp, int m);

// Row-sum and stationarity residuals for sanity checks.
double row_stochastic_residual(const GridModel& g);
double stationarity_residual(const GridModel& g);

}  // namespace ktd
