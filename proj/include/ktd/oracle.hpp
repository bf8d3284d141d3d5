#pragma once

// Population-level quantities computed exactly on discretized instances:
// value functions, multi-step Bellman operators, projected fixed points, and
// the noise functionals that drive the theoretical rates.  All integrals are
// finite sums against the grid weights, so the only error is floating point.

#include "ktd/estimator.hpp"
#include "ktd/mrp.hpp"
#include "ktd/rkhs.hpp"

namespace ktd {

// Largest basis order whose members are exactly piecewise constant on an
// m-cell dyadic grid.
int resolvable_basis(int m);

// Unscaled basis functions phi_1..phi_Jg evaluated at cell midpoints,
// Jg = min(spec.J, resolvable_basis(m)).  Higher-order coordinates of every
// population quantity computed here vanish identically for the families in
// this library (their transition operators have low-frequency range), which
// is what makes the grid computation exact; tests confirm grid-size
// independence.
Eigen::MatrixXd grid_basis(const KernelSpec& spec, int m);

Eigen::VectorXd value_function(const GridModel& g, double gamma);

// k-step operator sum_{l<k} gamma^l P^l r + gamma^k P^k f.
Eigen::VectorXd bellman_apply(const GridModel& g, double gamma,
                              const Eigen::VectorXd& f, int k);
Eigen::VectorXd weighted_bellman(const GridModel& g, double gamma,
                                 const Eigen::VectorXd& f,
                                 const WeightVector& wv);

double l2mu_norm(const GridModel& g, const Eigen::VectorXd& f);
double l2mu_dot(const GridModel& g, const Eigen::VectorXd& f,
                const Eigen::VectorXd& h);

struct FixedPoint {
  Eigen::VectorXd grid;     // theta* at cell midpoints
  Eigen::VectorXd coef;     // unscaled basis coordinates, padded to spec.J
  Eigen::VectorXd coef_h;   // Hilbert coordinates (coef_j / sqrt(mu_j))
  double residual = 0.0;    // ||theta* - proj B^w(theta*)||_mu
};

FixedPoint projected_fixed_point(const GridModel& g, const KernelSpec& spec,
                                 const WeightVector& wv, double gamma);

struct PopulationReport {
  Eigen::VectorXd Vstar;
  FixedPoint theta_star;
  double norm_Vperp = 0.0;        // L2(mu) distance from V* to the span
  double dist_theta_V = 0.0;      // ||theta* - V*|| in L2(mu)
  double resid_mu = 0.0;          // ||B^w(theta*) - theta*||_mu
  double resid_sup = 0.0;
  double sigma_Vstar = 0.0;       // expected conditional std of V*
  double sigma_m = 0.0;           // multi-step Bellman fluctuation
  double sigma_a = 0.0;           // residual-times-mixing term
  double zeta0 = 0.0;             // Hbar (sigma_m + sigma_a)
  double zeta0_tilde = 0.0;       // H sigma(V*) + Hbar sqrt(max(H,tau)) |Vperp|
                                  //   (unit prefactor; reported as such)
  double gamma = 0.0, gamma_bar = 0.0, tau_star = 1.0;
};

PopulationReport noise_report(const GridModel& g, const KernelSpec& spec,
                              const WeightVector& wv, double gamma,
                              double tau_star);

// Multi-episode variant of the residual noise term, with episodes of
// length L.
double sigma_a_episodes(const PopulationReport& rep, int L);

struct SigmaBoundCheck {
  double lhs_a = 0.0, rhs_a = 0.0;      // fluctuation vs conditional-variance
  double lhs_b = 0.0, rhs_b = 0.0;      // residual vs 2 * misspecification
  double lhs_perp = 0.0, rhs_perp = 0.0;  // |Vperp| vs sqrt(tau)*sigma(V*)
  bool ok() const {
    return lhs_a <= rhs_a + 1e-12 && lhs_b <= rhs_b + 1e-12 &&
           lhs_perp <= rhs_perp + 1e-12;
  }
};

SigmaBoundCheck check_sigma_bounds(const PopulationReport& rep);

}  // namespace ktd
