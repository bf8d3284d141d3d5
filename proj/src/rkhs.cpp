#include "ktd/rkhs.hpp"

#include <bit>
#include <cmath>

namespace ktd {

namespace {

constexpr double kTwo53 = 9007199254740992.0;  // 2^53

// Fractional bits of x as an integer: bit 52 is x_1 (the leading binary
// digit), bit 0 is x_53.
inline std::uint64_t frac_bits(double x) {
  if (!(x >= 0.0 && x < 1.0)) {
    throw std::domain_error("walsh: argument must lie in [0,1)");
  }
  return static_cast<std::uint64_t>(x * kTwo53);
}

// Repack so that bit i holds x_{i+1}; only the first `depth` digits are kept.
inline std::uint64_t low_digits(std::uint64_t X, int depth) {
  std::uint64_t y = 0;
  for (int i = 0; i < depth && i <= 52; ++i) {
    y |= ((X >> (52 - i)) & 1u) << i;
  }
  return y;
}

}  // namespace

int walsh(std::uint64_t j, double x) {
  const std::uint64_t X = frac_bits(x);
  int parity = 0;
  while (j != 0) {
    const int i = std::countr_zero(j);
    j &= j - 1;
    if (i <= 52) {  // digits of x past the mantissa are zero
      parity ^= static_cast<int>((X >> (52 - i)) & 1u);
    }
  }
  return parity ? -1 : 1;
}

double feature(std::uint64_t j, double x, double theta) {
  if (j == 0) throw std::domain_error("feature: index must be >= 1");
  if (j % 2 == 1) {
    const std::uint64_t m = (j - 1) / 2;
    return 0.5 * (walsh(2 * m, x) - walsh(2 * m + 1, x) + walsh(4 * m, x) +
                  walsh(4 * m + 1, x));
  }
  const std::uint64_t m = (j - 2) / 2;
  const double odd = 0.5 * (walsh(2 * m, x) - walsh(2 * m + 1, x) +
                            walsh(4 * m, x) + walsh(4 * m + 1, x));
  const double g = walsh(1, x) * std::cos(theta) +
                   (walsh(2, x) + walsh(3, x)) * std::sin(theta) / std::sqrt(2.0);
  return odd * g;
}

double KernelSpec::mu(int j) const {
  switch (decay) {
    case EigenDecay::Poly:
      return std::pow(static_cast<double>(j), -poly_exponent);
    case EigenDecay::Exp: {
      const double t = static_cast<double>(j - 1);
      return std::exp(-t * t);
    }
    case EigenDecay::FiniteRank:
      return (j >= 1 && j <= static_cast<int>(finite_eigs.size()))
                 ? finite_eigs[j - 1]
                 : 0.0;
  }
  return 0.0;
}

namespace {

// sup_x phi_j(x)^2.  Odd basis functions take values in {-1,+1}; even ones
// multiply by the rotation factor, whose largest magnitude over the eight
// leading-digit patterns is cos(theta) + sqrt(2)|sin(theta)|.
double sup_sq(int j, double theta) {
  if (j % 2 == 1) return 1.0;
  const double g = std::cos(theta) + std::sqrt(2.0) * std::abs(std::sin(theta));
  return g * g;
}

double cache_b(KernelSpec& s) {
  double acc = 0.0;
  for (int j = 1; j <= s.J; ++j) acc += s.mu(j) * sup_sq(j, s.theta);
  return std::sqrt(acc);
}

}  // namespace

KernelSpec KernelSpec::poly(double two_alpha, double theta, int J) {
  KernelSpec s;
  s.decay = EigenDecay::Poly;
  s.poly_exponent = two_alpha;
  s.theta = theta;
  s.J = J;
  s.b = cache_b(s);
  return s;
}

KernelSpec KernelSpec::exp_decay(double theta, int J) {
  KernelSpec s;
  s.decay = EigenDecay::Exp;
  s.theta = theta;
  s.J = J;
  s.b = cache_b(s);
  return s;
}

KernelSpec KernelSpec::finite_rank(std::vector<double> eigs, double theta) {
  KernelSpec s;
  s.decay = EigenDecay::FiniteRank;
  s.J = static_cast<int>(eigs.size());
  s.finite_eigs = std::move(eigs);
  s.theta = theta;
  s.b = cache_b(s);
  return s;
}

Eigen::VectorXd basis_values(const KernelSpec& spec, double x) {
  // Bulk evaluation.  All Walsh indices needed for phi_1..phi_J are < 2J+2,
  // so we tabulate those signs once via bit parities instead of calling
  // walsh() per term.
  const int J = spec.J;
  Eigen::VectorXd out(J);
  const std::uint64_t X = frac_bits(x);
  const std::uint64_t nidx = 2 * static_cast<std::uint64_t>(J) + 2;
  int depth = 1;
  while ((1ull << depth) < nidx) ++depth;
  const std::uint64_t y = low_digits(X, depth + 1);

  auto wsign = [&](std::uint64_t m) -> double {
    return (std::popcount(m & y) & 1) ? -1.0 : 1.0;
  };
  const double g = wsign(1) * std::cos(spec.theta) +
                   (wsign(2) + wsign(3)) * std::sin(spec.theta) / std::sqrt(2.0);
  for (int j = 1; j <= J; ++j) {
    if (j % 2 == 1) {
      const std::uint64_t m = static_cast<std::uint64_t>(j - 1) / 2;
      out[j - 1] = 0.5 * (wsign(2 * m) - wsign(2 * m + 1) + wsign(4 * m) +
                          wsign(4 * m + 1));
    } else {
      out[j - 1] = out[j - 2] * g;
    }
  }
  return out;
}

Eigen::VectorXd feature_map(const KernelSpec& spec, double x) {
  Eigen::VectorXd v = basis_values(spec, x);
  for (int j = 1; j <= spec.J; ++j) v[j - 1] *= std::sqrt(spec.mu(j));
  return v;
}

double kernel_eval(const KernelSpec& spec, double x, double y) {
  const Eigen::VectorXd fx = basis_values(spec, x);
  const Eigen::VectorXd fy = basis_values(spec, y);
  double acc = 0.0;
  for (int j = 1; j <= spec.J; ++j) acc += spec.mu(j) * fx[j - 1] * fy[j - 1];
  return acc;
}

}  // namespace ktd
