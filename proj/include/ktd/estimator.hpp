#pragma once

// Weight vectors for multi-step TD targets and the batch (forward)
// regularized LSTD solve, in both its kernel-matrix and feature-coordinate
// forms.  The two routes are algebraically identical; keeping both gives a
// strong cross-check and lets large-sample runs use whichever dimension is
// smaller.

#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "ktd/mrp.hpp"
#include "ktd/rkhs.hpp"

namespace ktd {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct WeightVector {
  Eigen::VectorXd w;  // nonnegative, sums to one
  int K() const { return static_cast<int>(w.size()); }
};

WeightVector make_kstep_weights(int K);
// w proportional to (1, lambda, ..., lambda^{K-1}).
WeightVector make_td_lambda_weights(int K, double lambda);

double effective_discount(const WeightVector& wv, double gamma);
inline double effective_horizon(const WeightVector& wv, double gamma) {
  return 1.0 / (1.0 - effective_discount(wv, gamma));
}

// Base indices t such that the window x_t .. x_{t+K} stays inside one
// episode; these index the rows of every empirical operator below.
std::vector<int> lstd_base_indices(const Dataset& data, int K);

struct KernelMatrices {
  Eigen::MatrixXd Kcov;  // ntil x ntil, symmetric
  Eigen::MatrixXd Kcr;   // ntil x ntil, look-ahead cross matrix
  Eigen::VectorXd y;     // compound discounted rewards, scaled by 1/sqrt(ntil)
  std::vector<double> anchors;
  int ntil = 0;
};

KernelMatrices build_kernel_matrices(const Dataset& data,
                                     const KernelSpec& spec,
                                     const WeightVector& wv, double gamma);

struct KernelEstimate {
  KernelSpec spec;
  Eigen::VectorXd r_coef_h;  // reward in Hilbert coordinates
  Eigen::VectorXd coef_h;    // (estimate - reward) in Hilbert coordinates
  std::vector<double> anchors;  // present when solved via the kernel route
  Eigen::VectorXd alpha;
  std::function<double(double)> reward_fn;

  double evaluate(double x) const;
  Eigen::VectorXd total_coef() const { return r_coef_h + coef_h; }
};

// Solve (Kcov + lambda I - Kcr) alpha = y.  Fails loudly if the 1-norm
// condition estimate exceeds 1e14.
KernelEstimate solve_lstd(const KernelMatrices& mats, const KernelSpec& spec,
                          double lambda, const Eigen::VectorXd& r_coef_h,
                          std::function<double(double)> reward_fn = nullptr);

// Equivalent J-dimensional solve built from empirical covariance /
// cross-covariance operators.
KernelEstimate solve_features(const Dataset& data, const KernelSpec& spec,
                              const WeightVector& wv, double gamma,
                              double lambda, const Eigen::VectorXd& r_coef_h,
                              std::function<double(double)> reward_fn = nullptr);

// Dispatch: feature route when J <= feature_path_max, kernel route otherwise.
KernelEstimate solve_auto(const Dataset& data, const KernelSpec& spec,
                          const WeightVector& wv, double gamma, double lambda,
                          const Eigen::VectorXd& r_coef_h,
                          std::function<double(double)> reward_fn = nullptr,
                          int feature_path_max = 2048);

// Quadrature of (estimate - reference)^2 against grid weights; exact for
// functions that are piecewise constant on the grid cells.
double l2mu_error(const KernelEstimate& est, const Eigen::VectorXd& reference,
                  const GridModel& grid);

// Same norm computed in coefficient space: ||sum_j (a_j - b_j) phi^H_j||^2
// with Hilbert coordinates a, b.  Exact for any truncation order.
double l2mu_diff_coef(const KernelSpec& spec, const Eigen::VectorXd& a,
                      const Eigen::VectorXd& b);

// Hilbert coordinates of the experiment reward r0 * phi_2.
Eigen::VectorXd experiment_reward_coef(const KernelSpec& spec, double r0);

// 1-norm condition estimate of a square matrix via its LU factorization.
double condest_1norm(const Eigen::MatrixXd& M,
                     const Eigen::PartialPivLU<Eigen::MatrixXd>& lu);

}  // namespace ktd
