#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ktd/theory.hpp"

using namespace ktd;

TEST_CASE("kernel complexity on small spectra") {
  const KernelSpec fin = KernelSpec::finite_rank({1.0, 0.25, 0.04}, 0.0);
  // delta = 0.3: min terms are 1, 0.25/0.09 -> capped? 0.25/0.09 = 2.78 -> 1,
  // 0.04/0.09 = 4/9
  CHECK(kernel_complexity(fin, 0.3) ==
        doctest::Approx(std::sqrt(1.0 + 1.0 + 4.0 / 9.0)).epsilon(1e-12));
  // huge delta: every term is mu_j / delta^2
  CHECK(kernel_complexity(fin, 10.0) ==
        doctest::Approx(std::sqrt(1.29) / 10.0).epsilon(1e-12));
}

TEST_CASE("critical radius closed form for flat finite spectra") {
  // d eigenvalues equal to 0.5: for delta^2 <= 0.5 the complexity is sqrt(d),
  // so the crossing is at delta = kappa * zeta * sqrt(d / n) / R.
  for (int d : {1, 2, 4, 8, 16}) {
    const KernelSpec spec =
        KernelSpec::finite_rank(std::vector<double>(d, 0.5), 0.0);
    for (double n : {1e2, 1e3, 1e4, 1e5, 1e6}) {
      const double kappa = 2.0, zeta = 1.0, R = 4.0;
      const double expect = kappa * zeta * std::sqrt(double(d) / n) / R;
      const double got = critical_radius(spec, n, R, kappa, zeta);
      CHECK(got == doctest::Approx(expect).epsilon(1e-8));
    }
  }
}

TEST_CASE("critical radius single eigenvalue spot value") {
  const KernelSpec spec = KernelSpec::finite_rank({1.0}, 0.0);
  // crossing at delta = kappa zeta / (sqrt(n) R) = 2*1/(sqrt(400)*1) = 0.1
  CHECK(critical_radius(spec, 400.0, 1.0, 2.0, 1.0) ==
        doctest::Approx(0.1).epsilon(1e-8));
  CHECK_THROWS(critical_radius(spec, 400.0, -1.0, 2.0, 1.0));
  // slope too small: no crossing below b
  CHECK_THROWS(critical_radius(spec, 1.0, 1e-6, 2.0, 1.0));
}

TEST_CASE("statistical dimension counts eigenvalues above delta^2") {
  const KernelSpec poly = KernelSpec::poly(2.0, 0.0, 64);
  // mu_j = j^-2 >= delta^2  <=>  j <= 1/delta
  CHECK(statistical_dimension(poly, 0.25) == 4);
  CHECK(statistical_dimension(poly, 0.0999) == 10);
  CHECK(statistical_dimension(poly, 1.5) == 0);
}

TEST_CASE("ridge selection rules") {
  CHECK(select_ridge(0.2, 0.9, 1000.0, 1.0, RidgeRule::Experiment) ==
        doctest::Approx(0.01 * 0.04 * 0.1).epsilon(1e-14));
  CHECK(select_ridge(0.2, 0.9, 1000.0, 2.0, RidgeRule::Theorem) ==
        doctest::Approx(2.0 * 0.04 * 0.1 * std::log(1000.0)).epsilon(1e-14));
}

TEST_CASE("bound evaluation spot values") {
  BoundInputs in;
  in.sigma_m = 0.5;
  in.sigma_a = 0.1;
  in.resid_mu = 0.2;
  in.kappa = 2.0;
  in.gamma = 0.9;
  in.gamma_bar = 0.8;
  in.tau_star = 4.0;
  in.K = 1;
  in.R = 1.5;
  in.n = 10000.0;
  in.d = 8.0;
  in.alpha = 0.6;
  in.delta_n = 0.05;
  in.lambda_n = 1e-4;
  in.zeta0 = 3.0;
  const BoundReport out = evaluate_bounds(in, 1.1, 1.3);

  const double log2n = std::log(1e4) * std::log(1e4);
  CHECK(out.thm_main ==
        doctest::Approx(2.25 * (0.0025 * log2n + 1e-4 / 0.2)).epsilon(1e-12));
  const double k2H2 = 4.0 * 25.0;  // kappa^2 / (1 - gamma_bar)^2
  CHECK(out.eps_m_sq ==
        doctest::Approx(k2H2 * 0.25 * 8.0 / 1e4).epsilon(1e-12));
  CHECK(out.eps_a_sq ==
        doctest::Approx(k2H2 * 0.04 * 8.0 / 2500.0).epsilon(1e-12));
  CHECK(out.ub_linear ==
        doctest::Approx((out.eps_m_sq + out.eps_a_sq) * log2n).epsilon(1e-12));
  CHECK(out.predicted_slope == doctest::Approx(-1.2 / 2.2).epsilon(1e-14));

  const double expo = 1.2 / 2.2;
  const double eps1 = k2H2 * 0.25 / 1e4 + k2H2 * 0.04 / 2500.0;
  CHECK(out.ub_alpha == doctest::Approx(std::pow(1.5, 2.0 / 2.2) *
                                        std::pow(eps1, expo) * log2n)
                            .epsilon(1e-12));

  const double H = 10.0;
  CHECK(out.ub_new_r_linear ==
        doctest::Approx(1.21 * H * H * 10.0 * 8.0 / 1e4 * log2n)
            .epsilon(1e-12));
  CHECK(out.ub_new_V_linear ==
        doctest::Approx(1.69 * 100.0 * 8.0 / 1e4 * log2n).epsilon(1e-12));

  // sample condition: lhs = 2.25 * 0.0025 = 5.625e-3,
  // rhs = 0.2 * 9 / sqrt(5e4) ~ 8.05e-3 -> holds
  CHECK(out.sample_condition);
  in.n = 1e8;
  in.delta_n = 0.05;  // keep lhs fixed while rhs shrinks with n
  CHECK_FALSE(evaluate_bounds(in, 1.1, 1.3).sample_condition);
}
