#pragma once

// Hard instance family for the minimax lower bound: 3-state local chains with
// perturbation parameters (dp, dq), tensorized over U blocks of a dyadic grid
// into continuous-state MRPs indexed by a Hamming packing.  Everything here is
// exactly representable on a 4U-cell grid, so the certificates are computed by
// small dense linear algebra with no sampling error.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ktd/mrp.hpp"
#include "ktd/rkhs.hpp"

namespace ktd::lb {

struct Params {
  double sigma_bar = 1.0;  // noise scale
  double rho_perp = 0.0;   // target mis-specification; 0 selects the midpoint
                           // of the admissible band
  double tau_bar = 20.0;   // mixing-time scale, must be >= 1/(1-gamma)
  double gamma = 0.9;
  double n = 1e4;          // sample size the family is calibrated against
  int U = 8;               // block count, power of two
};

// Rotation angle of the even basis functions; chosen so that the base model's
// mis-specification comes out at rho_perp / 2.
double theta_angle(double sigma_bar, double rho_perp, double gamma,
                   double varsigma);

// Midpoint of the admissible rho_perp interval
// [ sigma H sqrt(d_n/n) / 50 , sigma min(H, sqrt(tau)) / 108 ],
// evaluated with d_n = 2U (self-consistent for the flat finite-rank kernel).
double rho_perp_midpoint(const Params& p);

struct Family {
  Params prm;
  double varsigma = 0.0;     // restart probability 1/(8 tau_bar)
  double gamma_tilde = 0.0;  // local discount gamma (1 - varsigma)
  double theta = 0.0;        // basis rotation angle
  KernelSpec kernel;         // flat finite-rank spectrum, 2U eigenvalues
  double R_bar = 0.0;        // Hilbert-norm radius
  double zeta_bar = 0.0;     // noise level sigma H + sqrt(tau) rho_perp
  double delta_n = 0.0;      // critical radius at this (n, R_bar, zeta_bar)
  int d_n = 0;               // statistical dimension
  double nu_n = 0.0;         // chi-square budget tau R^2 delta^2 / (400 zeta^2)
  double dp_mag = 0.0;       // per-block restart perturbation magnitude
  double dq_mag = 0.0;       // per-block tilt perturbation magnitude
  std::vector<std::vector<int>> packing;  // members as 0/1 block indicators

  // Block-level geometry shared by all members.
  Eigen::Vector3d phi1, phi2;  // local feature vectors
  Eigen::Vector3d reward3;     // (sigma/4) phi2

  int M() const { return static_cast<int>(packing.size()); }
  double dp(int m, int u) const { return packing[m][u] * dp_mag; }
  double dq(int m, int u) const { return packing[m][u] * dq_mag; }
};

Family build_family(Params p);

struct ThreeState {
  double dp = 0.0, dq = 0.0;
  double varsigma = 0.0, gamma_tilde = 0.0;
  Eigen::Matrix3d P;
  Eigen::Vector3d mu;  // stationary distribution, verified at construction
};

// Local chain with perturbations (dp, dq); throws if the parameters fall
// outside the admissible box (dp <= 1/3 and the three dq caps).
ThreeState three_state(const Family& f, double dp, double dq);

// Frobenius residual of P = B diag{1, 1-4*varsigma, 0} B^T diag(mu) with the
// closed-form eigenbasis B.
double eigendecomp_residual(const ThreeState& t);

struct Value3 {
  Eigen::Vector3d V;       // (I - gamma_tilde P)^{-1} r
  Eigen::Vector3d V_span;  // projection onto span{phi1, phi2} under mu
  Eigen::Vector3d V_perp;  // V - V_span
};

Value3 value_3state(const Family& f, const ThreeState& t);

// Same value function through the eigenbasis resolvent; used as a cross-check.
Eigen::Vector3d value_3state_eigenform(const Family& f, const ThreeState& t);

// Greedy maximal packing (lexicographic candidate order) of weight-U/2
// indicator vectors at normalized Hamming distance >= 1/4.
std::vector<std::vector<int>> build_packing(int U);

// Member as an exact 4U-cell grid model: blockwise local chains glued by a
// varsigma-restart to the member's own stationary law.
GridModel build_full_mrp(const Family& f, int member);

// Sampling wrapper around the grid model (tau_star = 8 tau_bar is the exact
// minorization constant of the glued kernel).
MrpInstance make_instance(const Family& f, int member);

struct Divergences {
  double chi_stat = 0.0;        // chi^2 between stationary laws, exact
  double chi_stat_bound = 0.0;  // 2 ddp^2 + 2 ddq^2, block-averaged
  double chi_trans = 0.0;       // expected chi^2 between local transition rows
  double chi_trans_bound = 0.0; // 12 (vs ddp^2 + ddq^2), block-averaged
  double kl_bound = 0.0;        // trajectory bound from the exact chi^2 values
};

Divergences divergence_certificates(const Family& f, int m1, int m2, double n);

struct ValueGap {
  double gap = 0.0;           // block-aggregated distance of projected values
  double max_ratio = 0.0;     // max_u gap_u / (zeta_bar |dq_u - dq'_u|)
  double min_diff_gap = 0.0;  // smallest per-block gap among differing blocks
  int diff_blocks = 0;
};

ValueGap value_gap(const Family& f, int m1, int m2);

// Residual of the projection-difference identity
// <f, (Pi_mu1 - Pi_mu2) V2>_mu1 = <f, V2 - Pi_mu2 V2>_{mu1 - mu2}
// over f in {phi1, phi2}, for the perturbed/base local pair.
double approx_identity_residual(const Family& f, int m1, int m2);

struct Certificate {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;  // "<=" or ">="
  bool pass = false;
};

// Full certificate table over every member and packing pair.
std::vector<Certificate> certify(const Family& f);

}  // namespace ktd::lb
