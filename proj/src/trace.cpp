#include "ktd/trace.hpp"

#include <cmath>

namespace ktd {

namespace {

struct TraceProblem {
  int n = 0, K = 0;
  Eigen::MatrixXd Phi;        // J x n feature columns
  Eigen::VectorXd trace_wgt;  // gamma^k * sum_{l>k} w_l, k = 0..K-1
};

TraceProblem prepare(const Dataset& data, const KernelSpec& spec,
                     const WeightVector& wv, double gamma) {
  if (data.mode != Dataset::Mode::SinglePath) {
    throw std::domain_error("trace: backward estimators need a single path");
  }
  TraceProblem p;
  p.n = data.n();
  p.K = wv.K();
  if (p.n < 2 * p.K + 1) {
    throw std::domain_error("trace: need n >= 2K+1 samples");
  }
  p.Phi.resize(spec.J, p.n);
  for (int t = 0; t < p.n; ++t) {
    p.Phi.col(t) = feature_map(spec, data.states[t]);
  }
  p.trace_wgt.resize(p.K);
  double disc = 1.0;
  for (int k = 0; k < p.K; ++k) {
    double tail = 0.0;
    for (int l = k + 1; l <= p.K; ++l) tail += wv.w[l - 1];
    p.trace_wgt[k] = disc * tail;
    disc *= gamma;
  }
  return p;
}

Eigen::VectorXd trace_at(const TraceProblem& p, int i) {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(p.Phi.rows());
  for (int k = 0; k < p.K; ++k) z += p.trace_wgt[k] * p.Phi.col(i - k);
  return z;
}

}  // namespace

KernelEstimate solve_backward(const Dataset& data, const KernelSpec& spec,
                              const WeightVector& wv, double gamma,
                              double lambda, const Eigen::VectorXd& r_coef_h,
                              std::function<double(double)> reward_fn) {
  const TraceProblem p = prepare(data, spec, wv, gamma);
  const int count = p.n - p.K;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(spec.J, spec.J);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(spec.J);
  for (int i = p.K - 1; i <= p.n - 2; ++i) {
    const Eigen::VectorXd z = trace_at(p, i);
    A += z * (p.Phi.col(i) - gamma * p.Phi.col(i + 1)).transpose();
    b += data.rewards[i] * z;
  }
  A /= count;
  b /= count;
  A.diagonal().array() += lambda;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const double cond = condest_1norm(A, lu);
  if (!(cond < 1e14)) {
    throw SolverError("solve_backward: system is numerically singular (cond ~ " +
                      std::to_string(cond) + ")");
  }
  KernelEstimate est;
  est.spec = spec;
  est.r_coef_h = r_coef_h;
  est.coef_h = lu.solve(b + lambda * r_coef_h) - r_coef_h;
  est.reward_fn = std::move(reward_fn);
  return est;
}

KernelEstimate sa_run(const Dataset& data, const KernelSpec& spec,
                      const WeightVector& wv, double gamma, double lambda,
                      const Eigen::VectorXd& r_coef_h,
                      std::function<double(double)> reward_fn, int refresh) {
  const TraceProblem p = prepare(data, spec, wv, gamma);
  const int count = p.n - p.K;
  const int J = spec.J;

  Eigen::VectorXd theta = r_coef_h;  // theta_0 := r
  Eigen::MatrixXd A = count * lambda * Eigen::MatrixXd::Identity(J, J);
  Eigen::MatrixXd Ainv = Eigen::MatrixXd::Identity(J, J) / (count * lambda);

  int step = 0;
  for (int i = p.K - 1; i <= p.n - 2; ++i, ++step) {
    const Eigen::VectorXd z = trace_at(p, i);
    const Eigen::VectorXd d = p.Phi.col(i) - gamma * p.Phi.col(i + 1);
    const Eigen::VectorXd Az = Ainv * z;
    const double denom = 1.0 + d.dot(Az);
    if (!(denom > 0.0)) {
      throw SolverError("sa_run: step factor denominator " +
                        std::to_string(denom) + " at step " +
                        std::to_string(step) + " (of " + std::to_string(count) +
                        "); the update is no longer contractive");
    }
    const double ct = 1.0 / denom;
    const double td_err = data.rewards[i] - d.dot(theta);
    theta += ct * td_err * Az;

    A += z * d.transpose();
    if ((step + 1) % refresh == 0) {
      Ainv = A.partialPivLu().inverse();  // periodic drift correction
    } else {
      Ainv -= (Az * (d.transpose() * Ainv)) * ct;  // Sherman-Morrison
    }
  }

  KernelEstimate est;
  est.spec = spec;
  est.r_coef_h = r_coef_h;
  est.coef_h = theta - r_coef_h;
  est.reward_fn = std::move(reward_fn);
  return est;
}

}  // namespace ktd
