// bose-phonon-kinetics: simulate the cold Bose gas kinetic system and check
// its conservation laws, entropy and moment bounds.

#include <cmath>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "bpk/collision.hpp"
#include "bpk/config.hpp"
#include "bpk/diagnostics.hpp"
#include "bpk/dynamics.hpp"
#include "bpk/errors.hpp"
#include "bpk/output.hpp"
#include "bpk/runner.hpp"
#include "bpk/special_functions.hpp"

namespace {

using bpk::format_double;

int cmd_simulate(const std::string& path, const std::string& timeseries, const std::string& report,
                 const std::string& snapshot, unsigned workers) {
  auto cfg = bpk::load_config(path);
  if (!timeseries.empty()) cfg.outputs.timeseries = timeseries;
  if (!report.empty()) cfg.outputs.report = report;
  if (!snapshot.empty()) cfg.outputs.snapshot = snapshot;
  if (workers > 0) cfg.integration.workers = workers;
  const auto out = bpk::run(cfg, std::cerr);
  if (out.trajectory.stability_loss)
    std::cout << "stability loss: n_c reached the floor at t = "
              << format_double(out.trajectory.crossing_time) << '\n';
  std::cout << "status = " << out.status << ", exit = " << out.exit_code << '\n';
  return out.exit_code;
}

int cmd_threshold(const std::string& path) {
  const auto cfg = bpk::load_config(path);
  const auto grid = bpk::build_grid(cfg);
  const auto f0 = bpk::build_initial(cfg, grid);
  const auto r = bpk::threshold_check(f0, cfg.physics.n0, cfg.delta(), cfg.diagnostics.C8,
                                      cfg.diagnostics.threshold_convention);
  const bool total = r.convention == bpk::ThresholdConvention::total_mass;
  std::cout << "C(f0)    = " << format_double(r.threshold) << '\n'
            << "m2(f0)   = " << format_double(r.m2) << '\n'
            << "delta    = " << format_double(cfg.delta()) << '\n'
            << "condition: n0 >= " << (total ? "4*pi*(C(f0) - m2(f0)) + delta" : "C(f0) - m2(f0) + delta")
            << " = " << format_double(r.required) << '\n'
            << "n0       = " << format_double(cfg.physics.n0) << '\n'
            << "margin   = " << format_double(r.margin) << '\n'
            << (r.passed ? "PASS" : "FAIL") << '\n';
  return r.passed ? bpk::kExitOk : bpk::kExitChecksFailed;
}

int cmd_equilibrium(const std::string& path) {
  const auto cfg = bpk::load_config(path);
  const auto grid = bpk::build_grid(cfg);
  std::vector<double> f(grid->size(), 0.0);
  for (std::size_t i = 1; i < f.size(); ++i) f[i] = 1.0 / std::expm1(cfg.initial.alpha * grid->node(i));
  const bpk::RadialFunction be(grid, std::move(f));
  const bpk::CollisionTables tables(grid);
  const auto r = bpk::equilibrium_residual(be, tables);
  const bool ok = r.ratio() <= 1e-10 && r.strong_ratio() <= 1e-10;
  std::cout << "alpha             = " << format_double(cfg.initial.alpha) << '\n'
            << "max |q_i|         = " << format_double(r.max_rate) << '\n'
            << "max pair term     = " << format_double(r.max_pair) << '\n'
            << "pair residual     = " << format_double(r.ratio()) << '\n'
            << "max |strong_i|    = " << format_double(r.max_strong) << '\n'
            << "strong term scale = " << format_double(r.strong_scale) << '\n'
            << "strong residual   = " << format_double(r.strong_ratio()) << '\n'
            << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? bpk::kExitOk : bpk::kExitChecksFailed;
}

int cmd_tails(const std::string& path, const std::string& snapshot, double t, int n_terms) {
  const auto cfg = bpk::load_config(path);
  const auto grid = bpk::build_grid(cfg);
  const auto f = bpk::read_snapshot_file(snapshot, grid);
  const double a = cfg.diagnostics.ml_a;
  const double alpha = cfg.diagnostics.ml_alpha0 ? *cfg.diagnostics.ml_alpha0
                                                 : bpk::ml_normalizing_rate(f, a);
  const auto [e, i5] = bpk::ml_partial_sums(f, a, alpha, n_terms, 5);
  const auto sides = bpk::ml_interpolation_sides(f, a, alpha, n_terms);
  std::cout << "a                 = " << format_double(a) << '\n'
            << "alpha             = " << format_double(alpha) << '\n'
            << "n                 = " << n_terms << '\n'
            << "E_a^n             = " << format_double(e) << '\n'
            << "I_{a,5}^n         = " << format_double(i5) << '\n'
            << "interpolation rhs = " << format_double(sides.second) << '\n'
            << "ml_moment         = " << format_double(bpk::ml_moment(f, a, alpha)) << '\n'
            << "tail_rate(t=" << format_double(t) << ") = "
            << format_double(bpk::tail_rate_estimate(f, t)) << '\n';
  return bpk::kExitOk;
}

int cmd_constants(int k_max, double m) {
  std::cout << "kappa0(m=" << format_double(m) << ") = "
            << format_double(bpk::PhysicalParams::kappa0_for(m)) << '\n'
            << "c0 = " << format_double(bpk::c0_constant()) << '\n'
            << "k,c_k\n";
  for (int k = 0; k <= k_max; ++k) std::cout << k << ',' << format_double(bpk::linear_constant(k)) << '\n';
  if (k_max >= 3) {
    std::cout << "a,k,S,S*(a*k)^(1+a)\n";
    for (double a : {1.0, 1.5, 2.0})
      for (int k = 3; k <= k_max; ++k) {
        const double s = bpk::beta_sum(a, k);
        std::cout << format_double(a) << ',' << k << ',' << format_double(s) << ','
                  << format_double(s * std::pow(a * k, 1.0 + a)) << '\n';
      }
  }
  return bpk::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cold Bose gas kinetic simulator and theorem checks", "bose-phonon-kinetics"};
  app.require_subcommand(1);

  std::string config, timeseries, report, snapshot_out, snapshot_in;
  unsigned workers = 0;
  double t_tail = 1.0, mass = 1.0;
  int n_terms = 40, k_max = 10;

  auto* sim = app.add_subcommand("simulate", "run a configured simulation");
  sim->add_option("config", config, "config file")->required();
  sim->add_option("--timeseries", timeseries, "override outputs.timeseries");
  sim->add_option("--report", report, "override outputs.report");
  sim->add_option("--snapshot", snapshot_out, "override outputs.snapshot");
  sim->add_option("--workers", workers, "override integration.workers");

  auto* thr = app.add_subcommand("threshold", "evaluate the condensate stability threshold");
  thr->add_option("config", config, "config file")->required();

  auto* eq = app.add_subcommand("equilibrium", "collision residual on the Bose-Einstein state");
  eq->add_option("config", config, "config file")->required();

  auto* tails = app.add_subcommand("tails", "Mittag-Leffler sums and tail rate of a snapshot");
  tails->add_option("config", config, "config file")->required();
  tails->add_option("snapshot", snapshot_in, "snapshot CSV (r,f)")->required();
  tails->add_option("--time", t_tail, "time used by the tail-rate estimate");
  tails->add_option("--terms", n_terms, "partial-sum length")->check(CLI::Range(1, 400));

  auto* cons = app.add_subcommand("constants", "print model constants");
  cons->add_option("k_max", k_max, "largest k")->check(CLI::Range(0, 200));
  cons->add_option("--mass", mass, "particle mass for kappa0")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? bpk::kExitOk : bpk::kExitError;
  }

  try {
    if (*sim) return cmd_simulate(config, timeseries, report, snapshot_out, workers);
    if (*thr) return cmd_threshold(config);
    if (*eq) return cmd_equilibrium(config);
    if (*tails) return cmd_tails(config, snapshot_in, t_tail, n_terms);
    if (*cons) return cmd_constants(k_max, mass);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return bpk::kExitError;
  }
  return bpk::kExitError;
}
