#pragma once

// Walsh-function feature basis and truncated Mercer kernels.
//
// The hypothesis space is spanned by an orthonormal (in L2 of the uniform
// measure on [0,1)) family built from products of Walsh functions.  A
// rotation angle `theta` tilts every even-indexed basis function, which is
// what makes the target value function fall outside the span when theta > 0.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace ktd {

// j-th Walsh function at x in [0,1): (-1)^(sum_i j_i * x_{i+1}) where j_i are
// the binary digits of j and x_1 x_2 ... the fractional binary digits of x.
// Evaluated with 53 fractional bits (the double mantissa).
int walsh(std::uint64_t j, double x);

// phi_j(x) for j >= 1.  Odd entries are half-sums of four Walsh terms, even
// entries multiply the preceding odd entry by a theta-rotated low-frequency
// factor.  |phi_j| <= sqrt(3) < 2 everywhere.
double feature(std::uint64_t j, double x, double theta);

enum class EigenDecay { Poly, Exp, FiniteRank };

struct KernelSpec {
  EigenDecay decay = EigenDecay::Exp;
  double poly_exponent = 1.2;       // eigenvalue exponent (2*alpha) for Poly
  std::vector<double> finite_eigs;  // explicit list for FiniteRank
  int J = 8;                        // truncation order of the series
  double theta = 0.0;               // basis rotation angle
  double kappa = 2.0;               // uniform bound on |phi_j|
  double b = 0.0;                   // sqrt(sum_j mu_j * sup phi_j^2), cached

  double mu(int j) const;  // j-th eigenvalue, 1-based

  static KernelSpec poly(double two_alpha, double theta, int J = 128);
  static KernelSpec exp_decay(double theta, int J = 8);
  static KernelSpec finite_rank(std::vector<double> eigs, double theta = 0.0);
};

// Truncated series K(x,y) = sum_{j<=J} mu_j phi_j(x) phi_j(y).
double kernel_eval(const KernelSpec& spec, double x, double y);

// Coordinates sqrt(mu_j) * phi_j(x), so that dot products of feature maps
// reproduce the kernel and the Hilbert norm is the Euclidean norm.
Eigen::VectorXd feature_map(const KernelSpec& spec, double x);

// Unscaled basis values phi_1..phi_J at x (orthonormal in L2(mu)).
Eigen::VectorXd basis_values(const KernelSpec& spec, double x);

}  // namespace ktd
