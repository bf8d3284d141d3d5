#include "ktd/lowerbound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ktd/oracle.hpp"
#include "ktd/theory.hpp"

namespace ktd::lb {

double theta_angle(double sigma_bar, double rho_perp, double gamma,
                   double varsigma) {
  const double gt = gamma * (1.0 - varsigma);
  const double arg = 4.0 * rho_perp * (1.0 - gt + 4.0 * gt * varsigma) /
                     (sigma_bar * gt * (1.0 - 4.0 * varsigma));
  if (!(arg >= 0.0 && arg <= 1.0)) {
    throw std::domain_error(
        "theta_angle: rho_perp too large for this (gamma, varsigma)");
  }
  return std::asin(1.0) - 0.5 * std::asin(arg);
}

double rho_perp_midpoint(const Params& p) {
  const double H = 1.0 / (1.0 - p.gamma);
  const double d = 2.0 * p.U;  // flat spectrum: every eigenvalue survives
  const double lo = p.sigma_bar * H * std::sqrt(d / p.n) / 50.0;
  const double hi =
      p.sigma_bar * std::min(H, std::sqrt(p.tau_bar)) / 108.0;
  if (!(lo <= hi)) {
    throw std::domain_error("rho_perp_midpoint: admissible band is empty");
  }
  return 0.5 * (lo + hi);
}

Family build_family(Params p) {
  if (p.U < 2 || (p.U & (p.U - 1)) != 0) {
    throw std::domain_error("build_family: U must be a power of two >= 2");
  }
  if (!(p.gamma > 0.0 && p.gamma < 1.0) || !(p.n >= 1.0) ||
      !(p.sigma_bar > 0.0)) {
    throw std::domain_error("build_family: invalid gamma, n, or sigma_bar");
  }
  Family f;
  f.varsigma = 1.0 / (8.0 * p.tau_bar);
  f.gamma_tilde = p.gamma * (1.0 - f.varsigma);
  if (p.rho_perp == 0.0) p.rho_perp = rho_perp_midpoint(p);
  f.prm = p;
  f.theta = theta_angle(p.sigma_bar, p.rho_perp, p.gamma, f.varsigma);

  const int d = 2 * p.U;
  f.kernel = KernelSpec::finite_rank(std::vector<double>(d, 1.0 / d), f.theta);
  f.R_bar = std::max(2.0 / std::sqrt(f.kernel.mu(2)) *
                         (p.sigma_bar + p.rho_perp),
                     p.sigma_bar / (4.0 * f.kernel.b));
  f.zeta_bar = p.sigma_bar / (1.0 - p.gamma) +
               std::sqrt(p.tau_bar) * p.rho_perp;
  f.delta_n = critical_radius(f.kernel, p.n, f.R_bar, 2.0, f.zeta_bar);
  f.d_n = statistical_dimension(f.kernel, f.delta_n);
  f.nu_n = p.tau_bar * f.R_bar * f.R_bar * f.delta_n * f.delta_n /
           (400.0 * f.zeta_bar * f.zeta_bar);
  f.dp_mag = std::sqrt(f.d_n / (p.n * f.varsigma)) / 60.0;
  f.dq_mag = std::sqrt(f.d_n / p.n) / 60.0;
  f.packing = build_packing(p.U);

  const double c = std::cos(f.theta), s = std::sin(f.theta);
  f.phi1 << 1.0, 1.0, 1.0;
  f.phi2 << c + std::sqrt(2.0) * s, c - std::sqrt(2.0) * s, -c;
  f.reward3 = (p.sigma_bar / 4.0) * f.phi2;
  return f;
}

ThreeState three_state(const Family& f, double dp, double dq) {
  const double vs = f.varsigma, gt = f.gamma_tilde;
  const double dq_cap = std::min(
      {1.0 / 3.0, (1.0 - gt + 4.0 * gt * vs) / (2.0 * std::sqrt(2.0 * vs)),
       2.0 * std::sqrt(2.0) * f.prm.rho_perp / (3.0 * f.prm.sigma_bar) *
           (1.0 - gt + 4.0 * gt * vs)});
  if (!(dp >= 0.0 && dp <= 1.0 / 3.0 + 1e-12)) {
    throw std::domain_error("three_state: dp outside [0, 1/3]");
  }
  if (!(dq >= 0.0 && dq <= dq_cap + 1e-12)) {
    throw std::domain_error("three_state: dq exceeds its admissible cap");
  }
  ThreeState t;
  t.dp = dp;
  t.dq = dq;
  t.varsigma = vs;
  t.gamma_tilde = gt;
  const double a = 0.5 - vs * (1.0 - dp);  // upper-state self weight
  t.P.row(0) << a * (1.0 + dq), a * (1.0 - dq), 2.0 * vs * (1.0 - dp);
  t.P.row(1) = t.P.row(0);
  t.P.row(2) << vs * (1.0 + dp) * (1.0 + dq), vs * (1.0 + dp) * (1.0 - dq),
      1.0 - 2.0 * vs * (1.0 + dp);
  t.mu << 0.25 * (1.0 + dp) * (1.0 + dq), 0.25 * (1.0 + dp) * (1.0 - dq),
      0.5 * (1.0 - dp);
  if ((t.mu.transpose() * t.P - t.mu.transpose()).cwiseAbs().maxCoeff() >
      1e-12) {
    throw std::runtime_error("three_state: stationarity check failed");
  }
  return t;
}

namespace {

// Closed-form eigenbasis of the local chain: columns are orthonormal in
// L2(mu) and carry eigenvalues {1, 1-4*varsigma, 0}.
Eigen::Matrix3d eigenbasis(const ThreeState& t) {
  const double rp = std::sqrt((1.0 - t.dp) / (1.0 + t.dp));
  Eigen::Matrix3d B;
  B.col(0) << 1.0, 1.0, 1.0;
  B.col(1) << rp, rp, -1.0 / rp;
  B.col(2) << std::sqrt(2.0 * (1.0 - t.dq) / ((1.0 + t.dp) * (1.0 + t.dq))),
      -std::sqrt(2.0 * (1.0 + t.dq) / ((1.0 + t.dp) * (1.0 - t.dq))), 0.0;
  return B;
}

// Coordinates of the L2(mu)-projection of v onto span{phi1, phi2}.
Eigen::Vector2d span_coords(const Family& f, const Eigen::Vector3d& mu,
                            const Eigen::Vector3d& v) {
  Eigen::Matrix<double, 3, 2> S;
  S.col(0) = f.phi1;
  S.col(1) = f.phi2;
  const Eigen::Matrix<double, 2, 3> SW = S.transpose() * mu.asDiagonal();
  const Eigen::Matrix2d G = SW * S;
  return G.ldlt().solve(SW * v);
}

Eigen::Vector3d span_project(const Family& f, const Eigen::Vector3d& mu,
                             const Eigen::Vector3d& v) {
  const Eigen::Vector2d c = span_coords(f, mu, v);
  return c[0] * f.phi1 + c[1] * f.phi2;
}

double chi2_discrete(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  double acc = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    const double d = p[i] - q[i];
    acc += d * d / q[i];
  }
  return acc;
}

double mu_norm3(const Eigen::Vector3d& mu, const Eigen::Vector3d& v) {
  return std::sqrt((v.array().square() * mu.array()).sum());
}

}  // namespace

double eigendecomp_residual(const ThreeState& t) {
  const Eigen::Matrix3d B = eigenbasis(t);
  const Eigen::Vector3d lam(1.0, 1.0 - 4.0 * t.varsigma, 0.0);
  const Eigen::Matrix3d rec =
      B * lam.asDiagonal() * B.transpose() * t.mu.asDiagonal();
  return (rec - t.P).norm();
}

Value3 value_3state(const Family& f, const ThreeState& t) {
  Value3 out;
  const Eigen::Matrix3d A =
      Eigen::Matrix3d::Identity() - f.gamma_tilde * t.P;
  out.V = A.partialPivLu().solve(f.reward3);
  out.V_span = span_project(f, t.mu, out.V);
  out.V_perp = out.V - out.V_span;
  return out;
}

Eigen::Vector3d value_3state_eigenform(const Family& f, const ThreeState& t) {
  const Eigen::Matrix3d B = eigenbasis(t);
  const double gt = f.gamma_tilde;
  const Eigen::Vector3d res(1.0 / (1.0 - gt),
                            1.0 / (1.0 - gt * (1.0 - 4.0 * t.varsigma)), 1.0);
  return B * res.asDiagonal() * B.transpose() * t.mu.asDiagonal() * f.reward3;
}

std::vector<std::vector<int>> build_packing(int U) {
  if (U < 2 || U % 2 != 0) {
    throw std::domain_error("build_packing: U must be even");
  }
  std::vector<std::vector<int>> out;
  const int half = U / 2;
  // Enumerate weight-U/2 indicators in lexicographic order; keep a candidate
  // when it stays at normalized Hamming distance >= 1/4 from every member.
  std::vector<int> z(U, 0);
  const long long total = 1ll << U;
  for (long long bits = 0; bits < total; ++bits) {
    if (__builtin_popcountll(bits) != half) continue;
    for (int u = 0; u < U; ++u) z[u] = static_cast<int>((bits >> u) & 1);
    bool ok = true;
    for (const auto& zm : out) {
      int diff = 0;
      for (int u = 0; u < U; ++u) diff += (z[u] != zm[u]);
      if (4 * diff < U) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(z);
  }
  const double logM = std::log(static_cast<double>(out.size()));
  if (!(logM >= U / 11.0)) {
    throw std::runtime_error("build_packing: packing smaller than e^{U/11}");
  }
  return out;
}

namespace {

struct CellRef {
  int u, i, share;  // block, local state, cells per local state
};

CellRef cell_ref(int U, int c) {
  if (c < U) return {c, 0, 1};
  if (c < 2 * U) return {c - U, 1, 1};
  return {(c - 2 * U) / 2, 2, 2};
}

std::vector<ThreeState> member_blocks(const Family& f, int member) {
  std::vector<ThreeState> blocks;
  blocks.reserve(f.prm.U);
  for (int u = 0; u < f.prm.U; ++u) {
    blocks.push_back(three_state(f, f.dp(member, u), f.dq(member, u)));
  }
  return blocks;
}

}  // namespace

GridModel build_full_mrp(const Family& f, int member) {
  if (member < 0 || member >= f.M()) {
    throw std::out_of_range("build_full_mrp: member index out of range");
  }
  const int U = f.prm.U;
  const int m = 4 * U;
  const double vs = f.varsigma;
  const std::vector<ThreeState> blocks = member_blocks(f, member);

  GridModel g;
  g.P.setZero(m, m);
  g.mu.resize(m);
  g.r.resize(m);
  for (int c = 0; c < m; ++c) {
    const CellRef a = cell_ref(U, c);
    g.mu[c] = blocks[a.u].mu[a.i] / (U * a.share);
    g.r[c] = f.reward3[a.i];
    for (int cp = 0; cp < m; ++cp) {
      const CellRef b = cell_ref(U, cp);
      // Restart part lands on the member's own stationary law; the local
      // chain moves only within the block.
      double mass = vs * blocks[b.u].mu[b.i] / (U * b.share);
      if (a.u == b.u) mass += (1.0 - vs) * blocks[a.u].P(a.i, b.i) / b.share;
      g.P(c, cp) = mass;
    }
  }
  return g;
}

MrpInstance make_instance(const Family& f, int member) {
  const GridModel g = build_full_mrp(f, member);
  const int m = g.cells();
  MrpInstance inst;
  inst.gamma = f.prm.gamma;
  inst.tau_star = 8.0 * f.prm.tau_bar;  // exact minorization constant
  const Eigen::Vector3d r3 = f.reward3;
  inst.reward = [r3](double x) {
    const int i = x < 0.25 ? 0 : (x < 0.5 ? 1 : 2);
    return r3[i];
  };
  inst.step = [g, m](double x, Rng& rng) {
    const int c = std::min(m - 1, static_cast<int>(x * m));
    double acc = 0.0;
    const double ux = uniform01(rng);
    int cp = m - 1;
    for (int j = 0; j < m; ++j) {
      acc += g.P(c, j);
      if (ux < acc) {
        cp = j;
        break;
      }
    }
    return (cp + uniform01(rng)) / m;
  };
  inst.draw_stationary = [g, m](Rng& rng) {
    double acc = 0.0;
    const double ux = uniform01(rng);
    int c = m - 1;
    for (int j = 0; j < m; ++j) {
      acc += g.mu[j];
      if (ux < acc) {
        c = j;
        break;
      }
    }
    return (c + uniform01(rng)) / m;
  };
  inst.discretize_fn = [g, m](int cells) {
    if (cells != m) {
      throw std::domain_error("hard-family instance: grid must have 4U cells");
    }
    return g;
  };
  return inst;
}

Divergences divergence_certificates(const Family& f, int m1, int m2,
                                    double n) {
  const int U = f.prm.U;
  const double vs = f.varsigma;
  Divergences out;
  for (int u = 0; u < U; ++u) {
    const ThreeState a = three_state(f, f.dp(m1, u), f.dq(m1, u));
    const ThreeState b = three_state(f, f.dp(m2, u), f.dq(m2, u));
    const double ddp = a.dp - b.dp, ddq = a.dq - b.dq;
    out.chi_stat += chi2_discrete(a.mu, b.mu) / U;
    out.chi_stat_bound += 2.0 * (ddp * ddp + ddq * ddq) / U;
    double trans = 0.0;
    for (int i = 0; i < 3; ++i) {
      trans += a.mu[i] * chi2_discrete(a.P.row(i).transpose(),
                                       b.P.row(i).transpose());
    }
    out.chi_trans += trans / U;
    out.chi_trans_bound += 12.0 * (vs * ddp * ddp + ddq * ddq) / U;
  }
  out.kl_bound = (1.0 + 2.0 * n * vs) * out.chi_stat +
                 2.0 * n * (1.0 - vs) * out.chi_trans;
  return out;
}

ValueGap value_gap(const Family& f, int m1, int m2) {
  const int U = f.prm.U;
  ValueGap out;
  out.min_diff_gap = std::numeric_limits<double>::infinity();
  double acc = 0.0;
  const Eigen::Vector3d mu0(0.25, 0.25, 0.5);
  for (int u = 0; u < U; ++u) {
    const ThreeState a = three_state(f, f.dp(m1, u), f.dq(m1, u));
    const ThreeState b = three_state(f, f.dp(m2, u), f.dq(m2, u));
    const Eigen::Vector3d va = value_3state(f, a).V_span;
    const Eigen::Vector3d vb = value_3state(f, b).V_span;
    const double gap_u = mu_norm3(mu0, va - vb);
    acc += gap_u * gap_u / U;
    if (a.dq != b.dq) {
      ++out.diff_blocks;
      out.max_ratio = std::max(
          out.max_ratio, gap_u / (f.zeta_bar * std::abs(a.dq - b.dq)));
      out.min_diff_gap = std::min(out.min_diff_gap, gap_u);
    }
  }
  if (out.diff_blocks == 0) out.min_diff_gap = 0.0;
  out.gap = std::sqrt(acc);
  return out;
}

double approx_identity_residual(const Family& f, int m1, int m2) {
  double worst = 0.0;
  for (int u = 0; u < f.prm.U; ++u) {
    if (f.packing[m1][u] == f.packing[m2][u]) continue;
    const ThreeState a = three_state(f, f.dp(m1, u), f.dq(m1, u));
    const ThreeState b = three_state(f, f.dp(m2, u), f.dq(m2, u));
    const Eigen::Vector3d v2 = value_3state(f, b).V;
    const Eigen::Vector3d delta =
        span_project(f, a.mu, v2) - span_project(f, b.mu, v2);
    const Eigen::Vector3d perp2 = v2 - span_project(f, b.mu, v2);
    for (const Eigen::Vector3d& fe : {f.phi1, f.phi2}) {
      const double lhs = (fe.array() * delta.array() * a.mu.array()).sum();
      const double rhs =
          (fe.array() * perp2.array() * (a.mu - b.mu).array()).sum();
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return worst;
}

namespace {

// Member-level summary used by the family constraints.
struct MemberStats {
  double stat_resid, ratio_min, ratio_max, minor_ratio;
  double hilbert_norm, sigma_sq, vperp, chi_leb;
};

MemberStats member_stats(const Family& f, int member) {
  const GridModel g = build_full_mrp(f, member);
  const int m = g.cells();
  MemberStats s{};
  s.stat_resid = stationarity_residual(g);

  const double leb = 1.0 / m;
  s.ratio_min = std::numeric_limits<double>::infinity();
  s.ratio_max = 0.0;
  s.minor_ratio = std::numeric_limits<double>::infinity();
  for (int c = 0; c < m; ++c) {
    const double ratio = g.mu[c] / leb;
    s.ratio_min = std::min(s.ratio_min, ratio);
    s.ratio_max = std::max(s.ratio_max, ratio);
    for (int cp = 0; cp < m; ++cp) {
      s.minor_ratio = std::min(s.minor_ratio, g.P(c, cp) / g.mu[cp]);
    }
  }
  s.chi_leb = chi2_discrete(g.mu, Eigen::VectorXd::Constant(m, leb));

  const Eigen::VectorXd V = value_function(g, f.prm.gamma);
  const Eigen::MatrixXd F = grid_basis(f.kernel, m);
  const Eigen::MatrixXd FW = F * g.mu.asDiagonal();
  const Eigen::VectorXd coef =
      (FW * F.transpose()).ldlt().solve(FW * V);
  double hn = 0.0;
  for (int j = 1; j <= f.kernel.J; ++j) {
    hn += coef[j - 1] * coef[j - 1] / f.kernel.mu(j);
  }
  s.hilbert_norm = std::sqrt(hn);
  s.vperp = l2mu_norm(g, V - F.transpose() * coef);

  const Eigen::VectorXd mean = g.P * V;
  const Eigen::VectorXd sq = g.P * V.cwiseProduct(V);
  s.sigma_sq = 0.0;
  for (int c = 0; c < m; ++c) {
    s.sigma_sq += g.mu[c] * std::max(0.0, sq[c] - mean[c] * mean[c]);
  }
  return s;
}

Certificate cert(const std::string& name, double value, double threshold,
                 const std::string& relation) {
  Certificate c{name, value, threshold, relation, false};
  if (relation == "<=") {
    c.pass = value <= threshold;
  } else if (relation == ">=") {
    c.pass = value >= threshold;
  } else {  // ">"
    c.pass = value > threshold;
  }
  return c;
}

}  // namespace

std::vector<Certificate> certify(const Family& f) {
  std::vector<Certificate> out;
  const Params& p = f.prm;
  const double H = 1.0 / (1.0 - p.gamma);

  // Parameter-level conditions.
  out.push_back(cert("mixing_floor_tau", p.tau_bar, H, ">="));
  out.push_back(cert("rho_perp_lower", p.rho_perp,
                     p.sigma_bar * H * std::sqrt(f.d_n / p.n) / 50.0, ">="));
  out.push_back(cert("rho_perp_upper", p.rho_perp,
                     p.sigma_bar * std::min(H, std::sqrt(p.tau_bar)) / 108.0,
                     "<="));
  out.push_back(cert("sample_size", f.R_bar * f.R_bar * f.delta_n * f.delta_n,
                     f.zeta_bar * f.zeta_bar / p.tau_bar, "<="));
  out.push_back(cert("radius_below_b", f.delta_n, f.kernel.b, "<="));
  const int u_from_dn = 1 << (static_cast<int>(std::log2(f.d_n)) - 1);
  out.push_back(cert("block_count_matches_dim", p.U, u_from_dn, ">="));
  out.back().pass = (p.U == u_from_dn);
  out.push_back(
      cert("packing_log_size", std::log(static_cast<double>(f.M())),
           p.U / 11.0, ">="));

  // Local-chain certificates (base and perturbed cover every block).
  double eig_resid = 0.0, stat3 = 0.0;
  for (double scale : {0.0, 1.0}) {
    const ThreeState t =
        three_state(f, scale * f.dp_mag, scale * f.dq_mag);
    eig_resid = std::max(eig_resid, eigendecomp_residual(t));
    stat3 = std::max(
        stat3,
        (t.mu.transpose() * t.P - t.mu.transpose()).cwiseAbs().maxCoeff());
  }
  out.push_back(cert("eigendecomp_residual", eig_resid, 1e-12, "<="));
  out.push_back(cert("stationarity_local", stat3, 1e-10, "<="));

  // Member-level constraints.
  double stat_full = 0.0, ratio_min = 1e300, ratio_max = 0.0;
  double minor_min = 1e300, hn_max = 0.0, ssq_max = 0.0, vp_max = 0.0,
         chi_max = 0.0;
  for (int m = 0; m < f.M(); ++m) {
    const MemberStats s = member_stats(f, m);
    stat_full = std::max(stat_full, s.stat_resid);
    ratio_min = std::min(ratio_min, s.ratio_min);
    ratio_max = std::max(ratio_max, s.ratio_max);
    minor_min = std::min(minor_min, s.minor_ratio);
    hn_max = std::max(hn_max, s.hilbert_norm);
    ssq_max = std::max(ssq_max, s.sigma_sq);
    vp_max = std::max(vp_max, s.vperp);
    chi_max = std::max(chi_max, s.chi_leb);
  }
  out.push_back(cert("stationarity_full", stat_full, 1e-10, "<="));
  out.push_back(cert("density_ratio_min", ratio_min, 0.5, ">="));
  out.push_back(cert("density_ratio_max", ratio_max, 2.0, "<="));
  out.push_back(cert("minorization_ratio", minor_min,
                     f.varsigma * (1.0 - 1e-12), ">="));
  out.push_back(cert("hilbert_norm_max", hn_max, f.R_bar, "<="));
  out.push_back(
      cert("sigma_sq_max", ssq_max, p.sigma_bar * p.sigma_bar, "<="));
  out.push_back(cert("vperp_max", vp_max, p.rho_perp, "<="));
  out.push_back(cert("chi_sq_budget", chi_max, f.nu_n, "<="));

  // Pairwise certificates.
  double kl_max = 0.0, gap_ratio_max = 0.0, gap_min = 1e300, id_max = 0.0;
  for (int m1 = 0; m1 < f.M(); ++m1) {
    for (int m2 = m1 + 1; m2 < f.M(); ++m2) {
      const Divergences dv = divergence_certificates(f, m1, m2, p.n);
      kl_max = std::max(kl_max, dv.kl_bound);
      const ValueGap vg = value_gap(f, m1, m2);
      gap_ratio_max = std::max(gap_ratio_max, vg.max_ratio);
      gap_min = std::min(gap_min, vg.min_diff_gap);
      id_max = std::max(id_max, approx_identity_residual(f, m1, m2));
    }
  }
  out.push_back(cert("kl_trajectory_bound", kl_max, f.d_n / 45.0, "<="));
  out.push_back(cert("value_gap_upper_ratio", gap_ratio_max, 10.0, "<="));
  out.push_back(cert("value_gap_positive", gap_min, 0.0, ">"));
  out.push_back(cert("projection_identity", id_max, 1e-10, "<="));
  return out;
}

}  // namespace ktd::lb
