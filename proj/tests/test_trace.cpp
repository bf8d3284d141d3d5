#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ktd/mrp.hpp"
#include "ktd/oracle.hpp"
#include "ktd/trace.hpp"

using namespace ktd;

TEST_CASE("online recursion reproduces the batch backward solve") {
  const double theta = 0.3, gamma = 0.9;
  const MrpInstance mrp = build_experiment_mrp(4.0, theta, 1.0, gamma);
  const KernelSpec spec = KernelSpec::exp_decay(theta, 8);
  const Eigen::VectorXd r_coef = experiment_reward_coef(spec, 1.0);

  for (int K : {1, 3}) {
    const WeightVector wv =
        K == 1 ? make_kstep_weights(1) : make_td_lambda_weights(3, 0.6);
    for (std::uint64_t seed : {5ull, 6ull}) {
      const Dataset d = sample_single_path(mrp, 400, seed);
      const KernelEstimate batch =
          solve_backward(d, spec, wv, gamma, 1e-3, r_coef);
      const KernelEstimate online =
          sa_run(d, spec, wv, gamma, 1e-3, r_coef);
      const double scale = std::max(1.0, batch.coef_h.norm());
      CHECK((batch.coef_h - online.coef_h).norm() / scale < 1e-8);

      // refresh cadence must not change the answer
      const KernelEstimate every_step =
          sa_run(d, spec, wv, gamma, 1e-3, r_coef, nullptr, 1);
      CHECK((batch.coef_h - every_step.coef_h).norm() / scale < 1e-10);
    }
  }
}

TEST_CASE("backward estimate approaches the projected fixed point") {
  const double theta = 0.25, gamma = 0.9, tau = 4.0;
  const MrpInstance mrp = build_experiment_mrp(tau, theta, 1.0, gamma);
  const GridModel grid = discretize(mrp, 64);
  const KernelSpec spec = KernelSpec::exp_decay(theta, 8);
  const Eigen::VectorXd r_coef = experiment_reward_coef(spec, 1.0);
  const WeightVector wv = make_kstep_weights(1);

  const FixedPoint fp = projected_fixed_point(grid, spec, wv, gamma);
  const Dataset d = sample_single_path(mrp, 5000, 101);
  const KernelEstimate est = solve_backward(d, spec, wv, gamma, 1e-4, r_coef);
  const double err =
      std::sqrt(l2mu_diff_coef(spec, est.total_coef(), fp.coef_h));
  const double target =
      std::sqrt(l2mu_diff_coef(spec, fp.coef_h, Eigen::VectorXd::Zero(spec.J)));
  CHECK(err < 0.1 * std::max(1.0, target));
}

TEST_CASE("backward solve validates the dataset shape") {
  const MrpInstance mrp = build_experiment_mrp(4.0, 0.0, 1.0, 0.9);
  const KernelSpec spec = KernelSpec::exp_decay(0.0, 8);
  const Eigen::VectorXd r_coef = experiment_reward_coef(spec, 1.0);
  const WeightVector wv = make_kstep_weights(2);

  Dataset pairs = sample_iid_pairs(mrp, 20, 3);
  CHECK_THROWS_AS(solve_backward(pairs, spec, wv, 0.9, 1e-3, r_coef),
                  std::domain_error);
  CHECK_THROWS_AS(sa_run(pairs, spec, wv, 0.9, 1e-3, r_coef),
                  std::domain_error);

  Dataset short_path = sample_single_path(mrp, 4, 3);  // need >= 2K+1 = 5
  CHECK_THROWS_AS(solve_backward(short_path, spec, wv, 0.9, 1e-3, r_coef),
                  std::domain_error);
}
