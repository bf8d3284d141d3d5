#pragma once

// Backward-form estimator with eligibility traces, plus the online
// stochastic-approximation recursion that reproduces it exactly via rank-one
// inverse updates.  Everything here runs in Hilbert (feature) coordinates.

#include "ktd/estimator.hpp"

namespace ktd {

// Batch solve of (A_hat + lambda I) theta = b_hat + lambda r, with A_hat and
// b_hat assembled from eligibility traces
//   z_t = sum_{k=0}^{K-1} sum_{l=k+1}^{K} w_l gamma^k phi(x_{t-k}).
// Requires a single path with n >= 2K+1.
KernelEstimate solve_backward(const Dataset& data, const KernelSpec& spec,
                              const WeightVector& wv, double gamma,
                              double lambda, const Eigen::VectorXd& r_coef_h,
                              std::function<double(double)> reward_fn = nullptr);

// Online recursion: starts from theta_0 = r and the inflated ridge operator
// (n-K) lambda I, then applies the rescaled temporal-difference update with
// step factor c_t and a Sherman-Morrison update of the operator inverse.
// The final iterate equals the batch backward solution exactly (up to
// floating point); the maintained inverse is refreshed by direct
// factorization every `refresh` steps to bound drift.
KernelEstimate sa_run(const Dataset& data, const KernelSpec& spec,
                      const WeightVector& wv, double gamma, double lambda,
                      const Eigen::VectorXd& r_coef_h,
                      std::function<double(double)> reward_fn = nullptr,
                      int refresh = 256);

}  // namespace ktd
