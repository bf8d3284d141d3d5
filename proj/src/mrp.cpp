#include "ktd/mrp.hpp"

#include <cmath>
#include <stdexcept>

#include "ktd/rkhs.hpp"

namespace ktd {

namespace {

bool is_power_of_two(int m) { return m > 0 && (m & (m - 1)) == 0; }

}  // namespace

MrpInstance build_experiment_mrp(double tau_star, double theta, double r0,
                                 double gamma) {
  if (tau_star < 1.0) {
    throw std::domain_error("build_experiment_mrp: tau_star must be >= 1");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::domain_error("build_experiment_mrp: gamma must lie in [0,1)");
  }
  const double p_cross = 0.5 / tau_star;

  MrpInstance mrp;
  mrp.gamma = gamma;
  mrp.tau_star = tau_star;
  mrp.reward = [r0, theta](double x) { return r0 * feature(2, x, theta); };
  mrp.step = [p_cross](double x, Rng& rng) {
    const bool lower = x < 0.5;
    const bool cross = uniform01(rng) < p_cross;
    const double base = (lower != cross) ? 0.0 : 0.5;
    return base + 0.5 * uniform01(rng);
  };
  mrp.draw_stationary = [](Rng& rng) { return uniform01(rng); };
  mrp.discretize_fn = [p_cross, r0, theta](int m) {
    if (!is_power_of_two(m) || m < 2) {
      throw std::domain_error("discretize: grid size must be a power of two");
    }
    GridModel g;
    g.P.resize(m, m);
    g.mu = Eigen::VectorXd::Constant(m, 1.0 / m);
    g.r.resize(m);
    const int half = m / 2;
    for (int i = 0; i < m; ++i) {
      const bool lower = i < half;
      for (int j = 0; j < m; ++j) {
        const bool target_lower = j < half;
        const double mass = (lower == target_lower) ? (1.0 - p_cross) : p_cross;
        g.P(i, j) = mass / half;  // uniform across the cells of that half
      }
      g.r[i] = r0 * feature(2, g.midpoint(i), theta);
    }
    return g;
  };
  return mrp;
}

Dataset sample_single_path(const MrpInstance& mrp, int n, std::uint64_t seed) {
  Dataset d;
  d.mode = Dataset::Mode::SinglePath;
  d.states.reserve(n);
  Rng rng(seed);
  double x = mrp.draw_stationary(rng);
  for (int t = 0; t < n; ++t) {
    d.states.push_back(x);
    if (t + 1 < n) x = mrp.step(x, rng);
  }
  d.rewards.reserve(n);
  for (double s : d.states) d.rewards.push_back(mrp.reward(s));
  d.episode_len = {n};
  return d;
}

Dataset sample_iid_pairs(const MrpInstance& mrp, int n, std::uint64_t seed) {
  Dataset d;
  d.mode = Dataset::Mode::IidPairs;
  d.states.reserve(2 * n);
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    const double x = mrp.draw_stationary(rng);
    d.states.push_back(x);
    d.states.push_back(mrp.step(x, rng));
    d.episode_len.push_back(2);
  }
  d.rewards.reserve(2 * n);
  for (double s : d.states) d.rewards.push_back(mrp.reward(s));
  return d;
}

Dataset sample_episodes(const MrpInstance& mrp, int n, int L,
                        std::uint64_t seed) {
  if (L < 2) throw std::domain_error("sample_episodes: L must be >= 2");
  Dataset d;
  d.mode = Dataset::Mode::Episodes;
  Rng rng(seed);
  int produced = 0;
  while (produced < n) {
    const int len = std::min(L, n - produced);  // last episode may be short
    double x = mrp.draw_stationary(rng);
    for (int t = 0; t < len; ++t) {
      d.states.push_back(x);
      if (t + 1 < len) x = mrp.step(x, rng);
    }
    d.episode_len.push_back(len);
    produced += len;
  }
  d.rewards.reserve(d.states.size());
  for (double s : d.states) d.rewards.push_back(mrp.reward(s));
  return d;
}

GridModel discretize(const MrpInstance& mrp, int m) {
  if (!mrp.discretize_fn) {
    throw std::runtime_error("discretize: instance has no exact grid model");
  }
  GridModel g = mrp.discretize_fn(m);
  if (row_stochastic_residual(g) > 1e-12) {
    throw std::runtime_error("discretize: rows do not sum to one");
  }
  if (stationarity_residual(g) > 1e-10) {
    throw std::runtime_error("discretize: declared stationary law is not fixed");
  }
  return g;
}

double row_stochastic_residual(const GridModel& g) {
  return (g.P.rowwise().sum() - Eigen::VectorXd::Ones(g.cells()))
      .cwiseAbs()
      .maxCoeff();
}

double stationarity_residual(const GridModel& g) {
  return (g.P.transpose() * g.mu - g.mu).cwiseAbs().maxCoeff();
}

}  // namespace ktd
