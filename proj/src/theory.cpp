#include "ktd/theory.hpp"

#include <cmath>
#include <stdexcept>

namespace ktd {

double kernel_complexity(const KernelSpec& spec, double delta) {
  const double d2 = delta * delta;
  double acc = 0.0;
  for (int j = 1; j <= spec.J; ++j) {
    acc += std::min(spec.mu(j) / d2, 1.0);
  }
  return std::sqrt(acc);
}

double critical_radius(const KernelSpec& spec, double n, double R,
                       double kappa, double zeta) {
  if (!(zeta > 0.0) || !(n >= 1.0) || !(R > 0.0)) {
    throw std::domain_error("critical_radius: need zeta > 0, n >= 1, R > 0");
  }
  const double slope = std::sqrt(n) * R / (kappa * zeta);
  auto excess = [&](double d) { return kernel_complexity(spec, d) - slope * d; };
  double lo = 1e-12, hi = spec.b;
  if (excess(hi) > 0.0) {
    throw std::runtime_error(
        "critical_radius: no crossing below the kernel bound b");
  }
  if (excess(lo) <= 0.0) return lo;  // inequality already holds at the floor
  // C(delta)/delta is nonincreasing, so the crossing is unique.
  while (hi - lo > 1e-10 * hi) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  return hi;
}

int statistical_dimension(const KernelSpec& spec, double delta_n) {
  const double thresh = delta_n * delta_n;
  int d = 0;
  for (int j = 1; j <= spec.J; ++j) {
    if (spec.mu(j) >= thresh) d = j;  // eigenvalues are nonincreasing
  }
  return d;
}

double select_ridge(double delta_n, double gamma_bar, double n, double c0,
                    RidgeRule rule) {
  const double base = delta_n * delta_n * (1.0 - gamma_bar);
  switch (rule) {
    case RidgeRule::Experiment:
      return 0.01 * base;
    case RidgeRule::Theorem:
      return c0 * base * std::log(n);
  }
  return base;
}

BoundReport evaluate_bounds(const BoundInputs& in, double varrho_r,
                            double varrho_V) {
  BoundReport out;
  const double H = 1.0 / (1.0 - in.gamma);
  const double Hbar = 1.0 / (1.0 - in.gamma_bar);
  const double log2n = std::log(in.n) * std::log(in.n);

  out.thm_main =
      in.R * in.R *
      (in.delta_n * in.delta_n * log2n + in.lambda_n / (1.0 - in.gamma_bar));

  const double k2H2 = in.kappa * in.kappa * Hbar * Hbar;
  out.eps_m_sq = k2H2 * in.sigma_m * in.sigma_m * in.d / in.n;
  out.eps_a_sq =
      k2H2 * in.resid_mu * in.resid_mu * in.d / (in.n / in.tau_star);
  out.ub_linear = (out.eps_m_sq + out.eps_a_sq) * log2n;

  const double expo = 2.0 * in.alpha / (2.0 * in.alpha + 1.0);
  const double eps_m1 = k2H2 * in.sigma_m * in.sigma_m / in.n;
  const double eps_a1 =
      k2H2 * in.resid_mu * in.resid_mu / (in.n / in.tau_star);
  out.ub_alpha = std::pow(in.R, 2.0 / (2.0 * in.alpha + 1.0)) *
                 std::pow(eps_m1 + eps_a1, expo) * log2n;
  out.predicted_slope = -expo;

  const double mx = std::max(H, in.tau_star);
  out.varrho_r = varrho_r;
  out.varrho_V = varrho_V;
  out.ub_new_r_linear = varrho_r * varrho_r * H * H * mx * in.d / in.n * log2n;
  out.ub_new_r_alpha =
      varrho_r * varrho_r * H * H * std::pow(mx / in.n, expo) * log2n;
  const double mx2 = std::max(H * H, in.tau_star);
  out.ub_new_V_linear = varrho_V * varrho_V * mx2 * in.d / in.n * log2n;
  out.ub_new_V_alpha = varrho_V * varrho_V * std::pow(mx2 / in.n, expo) * log2n;

  out.sample_condition =
      in.R * in.R * in.delta_n * in.delta_n <=
      (1.0 - in.gamma_bar) * in.zeta0 * in.zeta0 /
          std::sqrt((in.tau_star + in.K) * in.n);
  return out;
}

}  // namespace ktd
