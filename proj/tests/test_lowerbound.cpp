#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ktd/lowerbound.hpp"
#include "ktd/oracle.hpp"

using namespace ktd;
using namespace ktd::lb;

namespace {

Family small_family() {
  Params p;
  p.U = 4;
  return build_family(p);
}

double norm_mu0(const Eigen::Vector3d& v) {
  return std::sqrt(0.25 * v[0] * v[0] + 0.25 * v[1] * v[1] +
                   0.5 * v[2] * v[2]);
}

}  // namespace

TEST_CASE("local chain stationary laws") {
  const Family f = small_family();
  const ThreeState base = three_state(f, 0.0, 0.0);
  CHECK(base.mu[0] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(base.mu[1] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(base.mu[2] == doctest::Approx(0.5).epsilon(1e-14));

  const ThreeState tilted = three_state(f, 1.0 / 3.0, 0.0);
  for (int i = 0; i < 3; ++i) {
    CHECK(tilted.mu[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
  }

  const ThreeState both = three_state(f, f.dp_mag, f.dq_mag);
  CHECK(both.mu.sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK((both.mu.transpose() * both.P - both.mu.transpose()).norm() < 1e-12);

  CHECK_THROWS_AS(three_state(f, 0.4, 0.0), std::domain_error);
  CHECK_THROWS_AS(three_state(f, 0.0, 0.4), std::domain_error);
}

TEST_CASE("closed-form spectral factorization of the local chain") {
  const Family f = small_family();
  const std::vector<std::pair<double, double>> cases = {
      {0.0, 0.0}, {f.dp_mag, f.dq_mag}, {0.0, f.dq_mag}, {f.dp_mag, 0.0}};
  for (auto [dp, dq] : cases) {
    const ThreeState t = three_state(f, dp, dq);
    CHECK(eigendecomp_residual(t) < 1e-12);

    Eigen::EigenSolver<Eigen::Matrix3d> es(t.P);
    std::vector<double> evs;
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(es.eigenvalues()[i].imag()) < 1e-12);
      evs.push_back(es.eigenvalues()[i].real());
    }
    std::sort(evs.begin(), evs.end());
    CHECK(evs[0] == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(evs[1] == doctest::Approx(1.0 - 4.0 * f.varsigma).epsilon(1e-10));
    CHECK(evs[2] == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("resolvent and eigenbasis value functions agree") {
  const Family f = small_family();
  const std::vector<std::pair<double, double>> cases = {
      {0.0, 0.0}, {f.dp_mag, f.dq_mag}};
  for (auto [dp, dq] : cases) {
    const ThreeState t = three_state(f, dp, dq);
    const Value3 v = value_3state(f, t);
    const Eigen::Vector3d ve = value_3state_eigenform(f, t);
    CHECK((v.V - ve).norm() < 1e-10 * std::max(1.0, ve.norm()));
    CHECK((v.V - v.V_span - v.V_perp).norm() < 1e-13);
    // the projection is orthogonal under t.mu
    for (const Eigen::Vector3d& phi : {f.phi1, f.phi2}) {
      CHECK(std::abs((t.mu.array() * phi.array() * v.V_perp.array()).sum()) <
            1e-12);
    }
  }
}

TEST_CASE("rotation angle calibrates the base mis-specification") {
  const Family f = small_family();
  CHECK(theta_angle(1.0, 0.0, 0.9, f.varsigma) ==
        doctest::Approx(M_PI / 2).epsilon(1e-14));
  CHECK(f.theta < M_PI / 2);

  // base model: the orthogonal part has norm exactly rho_perp / 2
  const ThreeState base = three_state(f, 0.0, 0.0);
  const Value3 v = value_3state(f, base);
  CHECK(norm_mu0(v.V_perp) ==
        doctest::Approx(0.5 * f.prm.rho_perp).epsilon(1e-10));

  // and rho_perp itself sits inside the admissible band
  const double H = 1.0 / (1.0 - f.prm.gamma);
  const double lo = f.prm.sigma_bar * H *
                    std::sqrt(2.0 * f.prm.U / f.prm.n) / 50.0;
  const double hi = f.prm.sigma_bar *
                    std::min(H, std::sqrt(f.prm.tau_bar)) / 108.0;
  CHECK(f.prm.rho_perp >= lo);
  CHECK(f.prm.rho_perp <= hi);
  CHECK(f.prm.rho_perp ==
        doctest::Approx(rho_perp_midpoint(f.prm)).epsilon(1e-12));
}

TEST_CASE("packing sizes and separation") {
  CHECK(build_packing(2).size() == 2);
  CHECK(build_packing(4).size() == 6);
  const auto pk = build_packing(8);
  CHECK(pk.size() == 70);
  for (const auto& v : pk) {
    CHECK(std::count(v.begin(), v.end(), 1) == 4);
  }
  for (size_t a = 0; a < pk.size(); ++a) {
    for (size_t b = a + 1; b < pk.size(); ++b) {
      int ham = 0;
      for (int u = 0; u < 8; ++u) ham += pk[a][u] != pk[b][u];
      CHECK(ham >= 2);  // normalized distance >= 1/4
    }
  }
}

TEST_CASE("full chain restricts to shifted local values") {
  const Family f = small_family();
  const int U = f.prm.U;
  for (int m : {0, f.M() - 1}) {
    const GridModel g = build_full_mrp(f, m);
    CHECK(g.cells() == 4 * U);
    CHECK(row_stochastic_residual(g) < 1e-12);
    CHECK(stationarity_residual(g) < 1e-12);

    const Eigen::VectorXd V = value_function(g, f.prm.gamma);
    double mean_r = 0.0;
    for (int c = 0; c < g.cells(); ++c) mean_r += g.mu[c] * g.r[c];
    const double gamma = f.prm.gamma, vs = f.varsigma;
    const double shift =
        gamma * vs * mean_r / ((1.0 - gamma) * (1.0 - gamma + gamma * vs));

    for (int u = 0; u < U; ++u) {
      const ThreeState t = three_state(f, f.dp(m, u), f.dq(m, u));
      const Value3 v = value_3state(f, t);
      const int cells[4] = {u, U + u, 2 * U + 2 * u, 2 * U + 2 * u + 1};
      const double local[4] = {v.V[0], v.V[1], v.V[2], v.V[2]};
      for (int s = 0; s < 4; ++s) {
        CHECK(V[cells[s]] ==
              doctest::Approx(local[s] + shift).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("divergence certificates") {
  const Family f = small_family();
  const Divergences self = divergence_certificates(f, 1, 1, f.prm.n);
  CHECK(self.chi_stat == 0.0);
  CHECK(self.chi_trans == 0.0);
  CHECK(self.kl_bound == 0.0);

  for (int m1 = 0; m1 < f.M(); ++m1) {
    for (int m2 = m1 + 1; m2 < f.M(); ++m2) {
      const Divergences d = divergence_certificates(f, m1, m2, f.prm.n);
      CHECK(d.chi_stat > 0.0);
      CHECK(d.chi_stat <= d.chi_stat_bound * (1.0 + 1e-9));
      CHECK(d.chi_trans <= d.chi_trans_bound * (1.0 + 1e-9));
      CHECK(d.kl_bound <= f.d_n / 45.0);

      // recompute the stationary chi^2 from public pieces
      double stat = 0.0;
      for (int u = 0; u < f.prm.U; ++u) {
        const ThreeState a = three_state(f, f.dp(m1, u), f.dq(m1, u));
        const ThreeState b = three_state(f, f.dp(m2, u), f.dq(m2, u));
        for (int i = 0; i < 3; ++i) {
          const double diff = a.mu[i] - b.mu[i];
          stat += diff * diff / b.mu[i];
        }
      }
      CHECK(d.chi_stat == doctest::Approx(stat / f.prm.U).epsilon(1e-10));
    }
  }
}

TEST_CASE("value gaps separate members without exceeding the linear rate") {
  const Family f = small_family();
  const ValueGap self = value_gap(f, 2, 2);
  CHECK(self.gap == 0.0);
  CHECK(self.diff_blocks == 0);

  for (int m2 = 1; m2 < f.M(); ++m2) {
    const ValueGap g = value_gap(f, 0, m2);
    int ham = 0;
    for (int u = 0; u < f.prm.U; ++u) {
      ham += f.packing[0][u] != f.packing[m2][u];
    }
    CHECK(g.diff_blocks == ham);
    CHECK(g.gap > 0.0);
    CHECK(g.min_diff_gap > 0.0);
    CHECK(g.max_ratio <= 10.0);
    CHECK(approx_identity_residual(f, 0, m2) < 1e-10);
  }
}

TEST_CASE("gap scales like the critical radius in n") {
  Params p;
  p.U = 4;
  p.rho_perp = 0.02;  // fixed so only the perturbation magnitudes move
  const Family f1 = build_family(p);
  p.n *= 4.0;
  const Family f4 = build_family(p);
  CHECK(f4.dq_mag == doctest::Approx(0.5 * f1.dq_mag).epsilon(1e-12));
  const double g1 = value_gap(f1, 0, 1).gap;
  const double g4 = value_gap(f4, 0, 1).gap;
  CHECK(g4 / g1 == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("all certificates pass on the small family") {
  const Family f = small_family();
  for (const Certificate& c : certify(f)) {
    INFO(c.name, " value=", c.value, " threshold=", c.threshold);
    CHECK(c.pass);
  }
}

TEST_CASE("sampling wrapper matches the grid model") {
  const Family f = small_family();
  const MrpInstance inst = make_instance(f, 3);
  const GridModel direct = build_full_mrp(f, 3);
  const GridModel redisc = discretize(inst, 4 * f.prm.U);
  CHECK((redisc.P - direct.P).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((redisc.mu - direct.mu).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(discretize(inst, 8 * f.prm.U), std::domain_error);

  const Dataset d = sample_single_path(inst, 200, 5);
  CHECK(d.n() == 200);
  for (double x : d.states) {
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
}
