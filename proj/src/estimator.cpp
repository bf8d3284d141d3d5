#include "ktd/estimator.hpp"

#include <cmath>
#include <numeric>

namespace ktd {

WeightVector make_kstep_weights(int K) {
  if (K < 1) throw std::domain_error("make_kstep_weights: K must be >= 1");
  WeightVector wv;
  wv.w = Eigen::VectorXd::Zero(K);
  wv.w[K - 1] = 1.0;
  return wv;
}

WeightVector make_td_lambda_weights(int K, double lambda) {
  if (K < 1) throw std::domain_error("make_td_lambda_weights: K must be >= 1");
  if (!(lambda >= 0.0 && lambda < 1.0)) {
    throw std::domain_error("make_td_lambda_weights: lambda must lie in [0,1)");
  }
  WeightVector wv;
  wv.w.resize(K);
  double pow = 1.0;
  for (int k = 0; k < K; ++k) {
    wv.w[k] = pow;
    pow *= lambda;
  }
  wv.w /= wv.w.sum();
  return wv;
}

double effective_discount(const WeightVector& wv, double gamma) {
  if (std::abs(wv.w.sum() - 1.0) > 1e-12 || wv.w.minCoeff() < 0.0) {
    throw std::domain_error("effective_discount: weights must lie in the simplex");
  }
  double gbar = 0.0, gk = 1.0;
  for (int k = 0; k < wv.K(); ++k) {
    gk *= gamma;
    gbar += wv.w[k] * gk;
  }
  return gbar;
}

std::vector<int> lstd_base_indices(const Dataset& data, int K) {
  if (data.mode == Dataset::Mode::IidPairs && K > 1) {
    throw std::domain_error(
        "lstd_base_indices: i.i.d. pairs only support one-step look-ahead");
  }
  std::vector<int> base;
  int offset = 0;
  for (int len : data.episode_len) {
    for (int t = 0; t + K < len; ++t) base.push_back(offset + t);
    offset += len;
  }
  if (base.empty()) {
    throw std::domain_error(
        "lstd_base_indices: look-ahead K exceeds the data horizon");
  }
  return base;
}

namespace {

// Hilbert-coordinate features for every state in the dataset, one column per
// state.
Eigen::MatrixXd all_feature_columns(const Dataset& data,
                                    const KernelSpec& spec) {
  Eigen::MatrixXd Phi(spec.J, data.n());
  for (int t = 0; t < data.n(); ++t) Phi.col(t) = feature_map(spec, data.states[t]);
  return Phi;
}

// Base features B, look-ahead combinations Psi (columns sum_k w_k gamma^k
// phi(x_{t+k})) and the compound-reward vector v with inner sum up to k
// (column i of Psi pairs with base index i).
struct AssembledData {
  Eigen::MatrixXd B;    // J x ntil
  Eigen::MatrixXd Psi;  // J x ntil
  Eigen::VectorXd v;    // ntil, sum_k w_k sum_{l=1..k} gamma^l r(x_{t+l})
  Eigen::VectorXd v0;   // ntil, same with inner sum up to k-1
  std::vector<int> base;
};

AssembledData assemble(const Dataset& data, const KernelSpec& spec,
                       const WeightVector& wv, double gamma) {
  AssembledData a;
  a.base = lstd_base_indices(data, wv.K());
  const int ntil = static_cast<int>(a.base.size());
  const Eigen::MatrixXd Phi = all_feature_columns(data, spec);
  a.B.resize(spec.J, ntil);
  a.Psi.setZero(spec.J, ntil);
  a.v.setZero(ntil);
  a.v0.setZero(ntil);
  const int K = wv.K();
  for (int i = 0; i < ntil; ++i) {
    const int t = a.base[i];
    a.B.col(i) = Phi.col(t);
    double disc = 1.0, partial = 0.0;
    for (int k = 1; k <= K; ++k) {
      disc *= gamma;  // gamma^k
      a.Psi.col(i) += wv.w[k - 1] * disc * Phi.col(t + k);
      a.v0[i] += wv.w[k - 1] * partial;
      partial += disc * data.rewards[t + k];
      a.v[i] += wv.w[k - 1] * partial;
    }
  }
  return a;
}

}  // namespace

KernelMatrices build_kernel_matrices(const Dataset& data,
                                     const KernelSpec& spec,
                                     const WeightVector& wv, double gamma) {
  const AssembledData a = assemble(data, spec, wv, gamma);
  const int ntil = static_cast<int>(a.base.size());
  KernelMatrices m;
  m.ntil = ntil;
  m.Kcov = (a.B.transpose() * a.B) / ntil;
  m.Kcr = (a.Psi.transpose() * a.B) / ntil;
  m.y = a.v / std::sqrt(static_cast<double>(ntil));
  m.anchors.reserve(ntil);
  for (int t : a.base) m.anchors.push_back(data.states[t]);
  return m;
}

double condest_1norm(const Eigen::MatrixXd& M,
                     const Eigen::PartialPivLU<Eigen::MatrixXd>& lu) {
  // Hager's power method on the 1-norm of the inverse.
  const int n = static_cast<int>(M.rows());
  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / n);
  double est = 0.0;
  for (int iter = 0; iter < 5; ++iter) {
    const Eigen::VectorXd x = lu.solve(v);
    const double nrm = x.lpNorm<1>();
    if (nrm <= est) break;
    est = nrm;
    Eigen::VectorXd s(n);
    for (int i = 0; i < n; ++i) s[i] = x[i] >= 0.0 ? 1.0 : -1.0;
    const Eigen::VectorXd z = lu.transpose().solve(s);
    int jmax = 0;
    z.cwiseAbs().maxCoeff(&jmax);
    if (std::abs(z[jmax]) <= z.dot(v)) break;
    v.setZero();
    v[jmax] = 1.0;
  }
  return est * M.cwiseAbs().colwise().sum().maxCoeff();
}

KernelEstimate solve_lstd(const KernelMatrices& mats, const KernelSpec& spec,
                          double lambda, const Eigen::VectorXd& r_coef_h,
                          std::function<double(double)> reward_fn) {
  if (!(lambda > 0.0)) throw std::domain_error("solve_lstd: lambda must be > 0");
  const int ntil = mats.ntil;
  Eigen::MatrixXd M = mats.Kcov - mats.Kcr;
  M.diagonal().array() += lambda;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  const double cond = condest_1norm(M, lu);
  if (!(cond < 1e14)) {
    throw SolverError("solve_lstd: system is numerically singular (cond ~ " +
                      std::to_string(cond) + ")");
  }
  KernelEstimate est;
  est.spec = spec;
  est.r_coef_h = r_coef_h;
  est.alpha = lu.solve(mats.y);
  const double resid = (M * est.alpha - mats.y).norm();
  if (resid > 1e-10 * std::max(1.0, mats.y.norm())) {
    throw SolverError("solve_lstd: residual " + std::to_string(resid) +
                      " too large after factorization");
  }
  est.anchors = mats.anchors;
  est.reward_fn = std::move(reward_fn);
  // Feature coordinates of the kernel expansion, for cheap evaluation and
  // exact L2(mu) norms.
  Eigen::MatrixXd B(spec.J, ntil);
  for (int i = 0; i < ntil; ++i) B.col(i) = feature_map(spec, mats.anchors[i]);
  est.coef_h = B * est.alpha / std::sqrt(static_cast<double>(ntil));
  return est;
}

KernelEstimate solve_features(const Dataset& data, const KernelSpec& spec,
                              const WeightVector& wv, double gamma,
                              double lambda, const Eigen::VectorXd& r_coef_h,
                              std::function<double(double)> reward_fn) {
  if (!(lambda > 0.0)) {
    throw std::domain_error("solve_features: lambda must be > 0");
  }
  const AssembledData a = assemble(data, spec, wv, gamma);
  const int ntil = static_cast<int>(a.base.size());
  const Eigen::MatrixXd Sigma = (a.B * a.B.transpose()) / ntil;
  const Eigen::MatrixXd Cr = (a.B * a.Psi.transpose()) / ntil;
  const Eigen::VectorXd y0 = a.B * a.v0 / ntil;
  Eigen::MatrixXd N = Sigma - Cr;
  N.diagonal().array() += lambda;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(N);
  const double cond = condest_1norm(N, lu);
  if (!(cond < 1e14)) {
    throw SolverError("solve_features: system is numerically singular (cond ~ " +
                      std::to_string(cond) + ")");
  }
  KernelEstimate est;
  est.spec = spec;
  est.r_coef_h = r_coef_h;
  est.coef_h = lu.solve(y0 + Cr * r_coef_h);
  est.reward_fn = std::move(reward_fn);
  return est;
}

KernelEstimate solve_auto(const Dataset& data, const KernelSpec& spec,
                          const WeightVector& wv, double gamma, double lambda,
                          const Eigen::VectorXd& r_coef_h,
                          std::function<double(double)> reward_fn,
                          int feature_path_max) {
  if (spec.J <= feature_path_max) {
    return solve_features(data, spec, wv, gamma, lambda, r_coef_h,
                          std::move(reward_fn));
  }
  const KernelMatrices mats = build_kernel_matrices(data, spec, wv, gamma);
  return solve_lstd(mats, spec, lambda, r_coef_h, std::move(reward_fn));
}

double KernelEstimate::evaluate(double x) const {
  const Eigen::VectorXd f = feature_map(spec, x);
  const double base = reward_fn ? reward_fn(x) : f.dot(r_coef_h);
  return base + f.dot(coef_h);
}

double l2mu_error(const KernelEstimate& est, const Eigen::VectorXd& reference,
                  const GridModel& grid) {
  if (reference.size() != grid.cells()) {
    throw std::domain_error("l2mu_error: reference and grid sizes differ");
  }
  double acc = 0.0;
  for (int i = 0; i < grid.cells(); ++i) {
    const double d = est.evaluate(grid.midpoint(i)) - reference[i];
    acc += grid.mu[i] * d * d;
  }
  return acc;
}

double l2mu_diff_coef(const KernelSpec& spec, const Eigen::VectorXd& a,
                      const Eigen::VectorXd& b) {
  double acc = 0.0;
  for (int j = 1; j <= spec.J; ++j) {
    const double d = a[j - 1] - b[j - 1];
    acc += spec.mu(j) * d * d;
  }
  return acc;
}

Eigen::VectorXd experiment_reward_coef(const KernelSpec& spec, double r0) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(spec.J);
  if (spec.J >= 2) c[1] = r0 / std::sqrt(spec.mu(2));
  return c;
}

}  // namespace ktd
