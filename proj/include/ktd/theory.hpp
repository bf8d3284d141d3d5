#pragma once

// Kernel complexity, critical-radius solver, regularization selection, and
// evaluators for the non-asymptotic rate expressions.  Unspecified universal
// constants are reported as 1 everywhere; the outputs are meant for slopes
// and qualitative shape, not absolute levels.

#include <vector>

#include "ktd/rkhs.hpp"

namespace ktd {

// C(delta) = sqrt(sum_j min(mu_j / delta^2, 1)) over the truncated spectrum.
double kernel_complexity(const KernelSpec& spec, double delta);

// Smallest delta in [1e-12, b] with C(delta) <= sqrt(n) R delta / (kappa
// zeta); bisection to relative tolerance 1e-10.  Throws if the inequality
// has no crossing inside the bracket.
double critical_radius(const KernelSpec& spec, double n, double R,
                       double kappa, double zeta);

// Number of eigenvalues at least delta_n^2.
int statistical_dimension(const KernelSpec& spec, double delta_n);

enum class RidgeRule { Experiment, Theorem };
// Experiment rule: 0.01 * delta_n^2 * (1 - gbar).
// Theorem rule: c0 * delta_n^2 * (1 - gbar) * log(n).
double select_ridge(double delta_n, double gamma_bar, double n, double c0,
                    RidgeRule rule);

struct BoundInputs {
  double sigma_m = 0.0;
  double sigma_a = 0.0;
  double resid_mu = 0.0;     // ||B^w(theta*) - theta*||
  double sigma_Vstar = 0.0;
  double norm_Vperp = 0.0;
  double kappa = 2.0;
  double gamma = 0.9;
  double gamma_bar = 0.9;
  double tau_star = 1.0;
  int K = 1;
  double R = 1.0;
  double n = 1.0;
  double d = 1.0;          // rank, for finite-rank expressions
  double alpha = 0.6;      // half the polynomial eigen-exponent
  double delta_n = 0.0;
  double lambda_n = 0.0;
  double zeta0 = 0.0;
};

struct BoundReport {
  double thm_main = 0.0;        // R^2 (delta_n^2 log^2 n + lambda_n/(1-gbar))
  double ub_linear = 0.0;       // finite-rank decomposition eps_m^2 + eps_a^2
  double eps_m_sq = 0.0;
  double eps_a_sq = 0.0;
  double ub_alpha = 0.0;        // polynomial-decay counterpart
  double ub_new_r_linear = 0.0;   // uniform-reward forms
  double ub_new_r_alpha = 0.0;
  double ub_new_V_linear = 0.0;   // L2-bounded value forms
  double ub_new_V_alpha = 0.0;
  bool sample_condition = false;  // R^2 dn^2 <= (1-gbar) zeta0^2 / sqrt((tau+K) n)
  double predicted_slope = 0.0;   // log-log slope of the variance term
  double varrho_r = 0.0, varrho_V = 0.0;
};

BoundReport evaluate_bounds(const BoundInputs& in, double varrho_r,
                            double varrho_V);

}  // namespace ktd
