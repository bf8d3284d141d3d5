// Command-line front end: estimate | theory | lb-verify | experiment.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ktd/config.hpp"
#include "ktd/estimator.hpp"
#include "ktd/harness.hpp"
#include "ktd/lowerbound.hpp"
#include "ktd/oracle.hpp"
#include "ktd/theory.hpp"
#include "ktd/trace.hpp"

namespace {

struct EstimateArgs {
  std::string config_path;
  std::string method = "forward";
  std::string ridge = "auto";
  std::string out;
  int n = 1000;
  int K = 1;
  double td_lambda = -1.0;
  double gamma = -1.0;  // < 0 keeps the config value
  std::uint64_t seed = 1;
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << text;
}

int run_estimate(const EstimateArgs& a) {
  ktd::ExperimentConfig ec;
  if (!a.config_path.empty()) {
    ec = ktd::config_from_file(ktd::Config::load(a.config_path));
  } else {
    ec.methods.push_back({"path", ktd::Dataset::Mode::SinglePath, 1, -1.0, 0});
    ec.n_grid = {a.n};
  }
  if (a.gamma > 0.0) ec.gamma = a.gamma;

  const ktd::MrpInstance mrp =
      ktd::build_experiment_mrp(ec.tau_star, ec.theta, ec.r0, ec.gamma);
  const ktd::GridModel grid = ktd::discretize(mrp, ec.grid_cells);
  const ktd::KernelSpec spec = ec.make_kernel();
  const ktd::WeightVector wv = a.td_lambda >= 0.0
                                   ? ktd::make_td_lambda_weights(a.K, a.td_lambda)
                                   : ktd::make_kstep_weights(a.K);
  const ktd::PopulationReport rep =
      ktd::noise_report(grid, spec, wv, ec.gamma, ec.tau_star);

  double lambda;
  if (a.ridge == "auto") {
    const double R = std::max(rep.theta_star.coef_h.norm(), 1e-8);
    const double dn =
        ktd::critical_radius(spec, a.n, R, spec.kappa, rep.zeta0);
    lambda = ktd::select_ridge(dn, rep.gamma_bar, a.n, 1.0,
                               ktd::RidgeRule::Experiment);
  } else {
    lambda = std::stod(a.ridge);
  }

  const ktd::Dataset data = ktd::sample_single_path(mrp, a.n, a.seed);
  const Eigen::VectorXd r_coef = ktd::experiment_reward_coef(spec, ec.r0);
  ktd::KernelEstimate est;
  if (a.method == "forward") {
    est = ktd::solve_auto(data, spec, wv, ec.gamma, lambda, r_coef);
  } else if (a.method == "backward") {
    est = ktd::solve_backward(data, spec, wv, ec.gamma, lambda, r_coef);
  } else if (a.method == "sa") {
    est = ktd::sa_run(data, spec, wv, ec.gamma, lambda, r_coef);
  } else {
    throw std::runtime_error("unknown method: " + a.method);
  }

  std::ostringstream csv;
  csv << "x,estimate,target\n" << std::setprecision(12);
  for (int i = 0; i < grid.cells(); ++i) {
    const double x = grid.midpoint(i);
    csv << x << ',' << est.evaluate(x) << ',' << rep.theta_star.grid[i]
        << '\n';
  }
  write_text(a.out, csv.str());
  const double err =
      ktd::l2mu_error(est, rep.theta_star.grid, grid);
  std::cerr << "l2mu_error=" << err << " ridge=" << lambda << '\n';
  return 0;
}

int run_theory(const std::string& config_path, int K, int n, bool report) {
  ktd::ExperimentConfig ec;
  if (!config_path.empty()) {
    ec = ktd::config_from_file(ktd::Config::load(config_path));
  } else {
    ec.methods.push_back({"path", ktd::Dataset::Mode::SinglePath, 1, -1.0, 0});
    ec.n_grid = {n};
  }
  const ktd::MrpInstance mrp =
      ktd::build_experiment_mrp(ec.tau_star, ec.theta, ec.r0, ec.gamma);
  const ktd::GridModel grid = ktd::discretize(mrp, ec.grid_cells);
  const ktd::KernelSpec spec = ec.make_kernel();
  const ktd::WeightVector wv = ktd::make_kstep_weights(K);
  const ktd::PopulationReport rep =
      ktd::noise_report(grid, spec, wv, ec.gamma, ec.tau_star);

  const double R = std::max(rep.theta_star.coef_h.norm(), 1e-8);
  const double dn = ktd::critical_radius(spec, n, R, spec.kappa, rep.zeta0);
  const int sd = ktd::statistical_dimension(spec, dn);
  const double lam = ktd::select_ridge(dn, rep.gamma_bar, n, 1.0,
                                       ktd::RidgeRule::Experiment);

  std::ostringstream out;
  out << std::setprecision(12);
  out << "{\n";
  if (report) {
    out << "  \"gamma\": " << rep.gamma << ",\n"
        << "  \"gamma_bar\": " << rep.gamma_bar << ",\n"
        << "  \"tau_star\": " << rep.tau_star << ",\n"
        << "  \"norm_Vperp\": " << rep.norm_Vperp << ",\n"
        << "  \"dist_theta_V\": " << rep.dist_theta_V << ",\n"
        << "  \"resid_mu\": " << rep.resid_mu << ",\n"
        << "  \"resid_sup\": " << rep.resid_sup << ",\n"
        << "  \"sigma_Vstar\": " << rep.sigma_Vstar << ",\n"
        << "  \"sigma_m\": " << rep.sigma_m << ",\n"
        << "  \"sigma_a\": " << rep.sigma_a << ",\n"
        << "  \"zeta0\": " << rep.zeta0 << ",\n"
        << "  \"zeta0_tilde\": " << rep.zeta0_tilde << ",\n";
  }
  out << "  \"n\": " << n << ",\n"
      << "  \"R\": " << R << ",\n"
      << "  \"delta_n\": " << dn << ",\n"
      << "  \"statistical_dimension\": " << sd << ",\n"
      << "  \"lambda_n\": " << lam << "\n}\n";
  std::cout << out.str();
  return 0;
}

int run_lb_verify(double sigma, double rho, double tau, double gamma,
                  double n, int U, const std::string& out_path) {
  ktd::lb::Params p;
  p.sigma_bar = sigma;
  p.rho_perp = rho;
  p.tau_bar = tau;
  p.gamma = gamma;
  p.n = n;
  p.U = U;
  const ktd::lb::Family fam = ktd::lb::build_family(p);

  std::ostringstream csv;
  csv << "certificate,value,threshold,relation,pass\n"
      << std::setprecision(12);
  bool all_pass = true;
  for (const ktd::lb::Certificate& c : ktd::lb::certify(fam)) {
    csv << c.name << ',' << c.value << ',' << c.threshold << ','
        << c.relation << ',' << (c.pass ? "1" : "0") << '\n';
    all_pass = all_pass && c.pass;
  }
  write_text(out_path, csv.str());
  std::cerr << "rho_perp=" << fam.prm.rho_perp << " delta_n=" << fam.delta_n
            << " d_n=" << fam.d_n << " members=" << fam.M() << '\n';
  return all_pass ? 0 : 1;
}

int run_figures(const std::string& config_path, const std::string& figure,
                bool full_scale, const std::string& out_path) {
  std::vector<ktd::ExperimentConfig> configs;
  if (!figure.empty()) {
    configs = ktd::figure_preset(figure, full_scale);
  } else if (!config_path.empty()) {
    configs = {ktd::config_from_file(ktd::Config::load(config_path))};
  } else {
    throw std::runtime_error("experiment: need --config or --figure");
  }
  std::vector<ktd::ResultRow> rows;
  for (const ktd::ExperimentConfig& c : configs) {
    std::vector<ktd::ResultRow> part = ktd::run_experiment(c);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  if (out_path.empty()) {
    std::cout << ktd::csv_string(rows);
  } else {
    ktd::emit_csv(rows, out_path);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel multi-step TD toolkit"};
  app.require_subcommand(1);

  EstimateArgs ea;
  CLI::App* est = app.add_subcommand("estimate", "fit one dataset");
  est->add_option("--config", ea.config_path, "family config file");
  est->add_option("--n", ea.n, "sample size");
  est->add_option("--K", ea.K, "look-ahead steps");
  est->add_option("--td-lambda", ea.td_lambda, "TD(lambda) weighting");
  est->add_option("--gamma", ea.gamma, "discount override");
  est->add_option("--ridge", ea.ridge, "ridge value or 'auto'");
  est->add_option("--seed", ea.seed, "RNG seed");
  est->add_option("--method", ea.method, "forward | backward | sa");
  est->add_option("--out", ea.out, "output CSV path (default stdout)");

  std::string th_config;
  int th_K = 1, th_n = 1000;
  bool th_report = false;
  CLI::App* th = app.add_subcommand("theory", "population quantities");
  th->add_option("--config", th_config, "family config file");
  th->add_option("--K", th_K, "look-ahead steps");
  th->add_option("--n", th_n, "sample size for delta_n / ridge");
  th->add_flag("--report", th_report, "include the full population report");

  double lb_sigma = 1.0, lb_rho = 0.0, lb_tau = 20.0, lb_gamma = 0.9,
         lb_n = 1e4;
  int lb_U = 8;
  std::string lb_out;
  CLI::App* lb = app.add_subcommand("lb-verify", "hard-family certificates");
  lb->add_option("--sigma", lb_sigma, "noise scale");
  lb->add_option("--rho-perp", lb_rho, "mis-specification (0 = midpoint)");
  lb->add_option("--tau", lb_tau, "mixing-time scale");
  lb->add_option("--gamma", lb_gamma, "discount");
  lb->add_option("--n", lb_n, "sample size");
  lb->add_option("--U", lb_U, "block count (power of two)");
  lb->add_option("--out", lb_out, "output CSV path (default stdout)");

  std::string ex_config, ex_figure, ex_out;
  bool ex_full = false;
  CLI::App* ex = app.add_subcommand("experiment", "Monte Carlo sweeps");
  ex->add_option("--config", ex_config, "experiment config file");
  ex->add_option("--out", ex_out, "output CSV path (default stdout)");
  ex->add_option("--figure", ex_figure, "fig1a | fig1b | fig2a | fig2b");
  ex->add_flag("--full-scale", ex_full, "paper-scale grid and trial count");

  CLI11_PARSE(app, argc, argv);

  try {
    if (est->parsed()) return run_estimate(ea);
    if (th->parsed()) return run_theory(th_config, th_K, th_n, th_report);
    if (lb->parsed()) {
      return run_lb_verify(lb_sigma, lb_rho, lb_tau, lb_gamma, lb_n, lb_U,
                           lb_out);
    }
    if (ex->parsed()) return run_figures(ex_config, ex_figure, ex_full, ex_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
