#include "bpk/runner.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "bpk/errors.hpp"
#include "bpk/output.hpp"

namespace bpk {

GridPtr build_grid(const RunConfig& config) {
  return make_grid(config.grid.n_points, config.grid.p_max);
}

RadialFunction build_initial(const RunConfig& config, GridPtr grid) {
  const auto& ic = config.initial;
  if (ic.preset == "file") return read_snapshot_file(ic.path, grid);
  std::vector<double> f(grid->size(), 0.0);
  auto gauss = [](const Bump& b, double r) {
    const double z = (r - b.center) / b.width;
    return b.amplitude * std::exp(-0.5 * z * z);
  };
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double r = grid->node(i);
    if (ic.preset == "bose_einstein") {
      f[i] = i == 0 ? 0.0 : 1.0 / std::expm1(ic.alpha * r);
    } else if (ic.preset == "gaussian_bump") {
      f[i] = gauss(Bump{ic.amplitude, ic.center, ic.width}, r);
    } else if (ic.preset == "bumps") {
      for (const auto& b : ic.bumps) f[i] += gauss(b, r);
    } else if (ic.preset == "power_tail") {
      f[i] = ic.amplitude / (1.0 + std::pow(r, ic.power));
    }
  }
  return RadialFunction(std::move(grid), std::move(f));
}

namespace {

CheckRecord conservation_record(const Trajectory& traj, double tol) {
  CheckRecord rec;
  rec.name = "conservation";
  rec.reference = "conservation of mass and energy";
  rec.tolerance = tol;
  double mass = 0.0, energy = 0.0;
  for (const auto& s : traj.snapshots) {
    mass = std::max(mass, std::abs(s.total_mass() - s.total_mass0) / s.total_mass0);
    if (s.energy0 > 0.0) energy = std::max(energy, std::abs(s.energy() - s.energy0) / s.energy0);
  }
  rec.passed = mass <= tol && energy <= tol;
  rec.measured = {{"max_mass_drift", mass}, {"max_energy_drift", energy}};
  rec.bounds = {{"max_mass_drift", tol}, {"max_energy_drift", tol}};
  if (traj.clamped_mass != 0.0) {
    rec.measured.emplace_back("clamped_mass", traj.clamped_mass);
    rec.note = "clamp_with_ledger removed negative samples";
  }
  return rec;
}

CheckRecord closed_form_record(const Trajectory& traj, double tol) {
  CheckRecord rec;
  rec.name = "closed_form";
  rec.reference = "closed-form condensate mass";
  rec.tolerance = tol;
  rec.passed = traj.max_closed_form_gap <= tol;
  rec.measured = {{"max_relative_gap", traj.max_closed_form_gap}};
  rec.bounds = {{"max_relative_gap", tol}};
  return rec;
}

CheckRecord stability_record(const Trajectory& traj, const ThresholdResult& thr, double delta) {
  CheckRecord rec;
  rec.name = "threshold_stability";
  rec.reference = "condensate stability above threshold";
  const bool above = thr.margin > 0.0;
  rec.passed = !above || (traj.min_nc >= delta && !traj.stability_loss);
  rec.measured = {{"threshold_margin", thr.margin}, {"min_n_c", traj.min_nc}};
  rec.bounds = {{"delta", delta}};
  if (!above) rec.note = "below threshold: no stability guarantee applies";
  return rec;
}

}  // namespace

DiagnosticsReport evaluate_checks(const RunConfig& config, const Trajectory& traj,
                                  const CollisionTables& tables, const ThresholdResult& thr) {
  const auto& d = config.diagnostics;
  const Snapshots snaps(traj.snapshots);
  DiagnosticsReport report;
  for (const auto& name : d.checks) {
    if (name == "conservation") {
      report.add(conservation_record(traj, d.conservation_tol));
    } else if (name == "closed_form") {
      report.add(closed_form_record(traj, d.closed_form_tol));
    } else if (name == "h_theorem") {
      report.add(check_h_theorem(snaps, tables));
    } else if (name == "linf_bound") {
      report.add(check_linf_bound(snaps));
    } else if (name == "m2_interpolation") {
      report.add(check_m2_interpolation(snaps));
    } else if (name == "moment_propagation") {
      report.add(check_moment_propagation(snaps, d.moment_k, d.Ck));
    } else if (name == "moment_creation") {
      report.add(check_moment_creation(
          snaps, d.moment_k,
          CreationWindow{*d.creation_t_min, *d.creation_t_max, config.delta(), d.creation_slack,
                         PhysicalParams::kappa0_for(config.physics.m)}));
    } else if (name == "ml_propagation") {
      const double alpha0 =
          d.ml_alpha0 ? *d.ml_alpha0 : ml_normalizing_rate(traj.snapshots.front().f, d.ml_a);
      report.add(check_ml_propagation(snaps, d.ml_a, alpha0));
    } else if (name == "budget") {
      const auto& f0 = traj.snapshots.front().f;
      const double kappa0 = PhysicalParams::kappa0_for(config.physics.m);
      MomentBudget b;
      b.h3 = line_moment(f0, 3);
      b.delta = config.delta();
      b.h8 = std::max((1.0 + d.budget_headroom) * line_moment(f0, 8),
                      budget_h8(b.h3, b.delta, kappa0, d.budget_C8t, d.budget_c8t));
      b.h_inf = (1.0 + d.budget_headroom) * weighted_sup(f0);
      report.add(budget_check(snaps, b, kappa0, d.budget_c8t));
    } else if (name == "threshold_stability") {
      report.add(stability_record(traj, thr, config.delta()));
    } else if (name == "beta_sum") {
      report.add(beta_sum_check(d.ml_a, d.beta_k_max));
    }
  }
  return report;
}

RunOutcome run(const RunConfig& config, std::ostream& log) {
  RunOutcome out;
  const GridPtr grid = build_grid(config);
  const CollisionTables tables(grid);
  const PhysicalParams params(config.physics.m, config.physics.g, config.physics.kBT);
  const RadialFunction f0 = build_initial(config, grid);

  out.threshold = threshold_check(f0, config.physics.n0, config.delta(), config.diagnostics.C8,
                                  config.diagnostics.threshold_convention);
  log << "threshold C(f0) = " << format_double(out.threshold.threshold)
      << ", required n0 >= " << format_double(out.threshold.required)
      << ", margin = " << format_double(out.threshold.margin) << '\n';
  if (const auto ratio = cold_gas_ratio(params, config.physics.n0))
    log << "cold-gas ratio kBT / sqrt(g n0 / m) = " << format_double(*ratio) << '\n';

  StepControl control;
  control.safety = config.integration.safety;
  control.dt_max = config.dt_max();
  control.nc_floor = config.integration.nc_floor;
  control.positivity = config.integration.positivity;
  control.workers = config.integration.workers;

  IntegrateOptions opts;
  opts.t_end = config.integration.t_end;
  opts.fixed_dt = config.integration.fixed_dt;
  opts.max_steps = config.integration.max_steps;
  opts.snapshot_stride = config.outputs.snapshot_stride;
  if (config.outputs.log_count > 0) {
    const double a = std::log(config.outputs.log_t_min), b = std::log(config.outputs.log_t_max);
    const std::size_t n = config.outputs.log_count;
    for (std::size_t i = 0; i < n; ++i)
      opts.output_times.push_back(std::exp(a + (b - a) * static_cast<double>(i) /
                                               static_cast<double>(n - 1)));
  }

  out.trajectory = integrate(make_state(f0, config.physics.n0), tables, params.kappa0(), control,
                             opts);
  const auto& traj = out.trajectory;
  out.status = traj.stability_loss ? "stability_loss" : "completed";
  log << "steps = " << traj.steps << ", t = " << format_double(traj.snapshots.back().t)
      << ", n_c = " << format_double(traj.snapshots.back().n_c) << ", status = " << out.status
      << '\n';

  out.report = evaluate_checks(config, traj, tables, out.threshold);
  for (const auto& r : out.report.records)
    log << (r.passed ? "PASS " : "FAIL ") << r.name << '\n';

  std::vector<TimeSeriesRow> rows;
  rows.reserve(traj.snapshots.size());
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i)
    rows.push_back(make_row(traj.snapshots[i], traj.snapshot_dt[i], tables));
  std::ostringstream csv;
  write_timeseries(csv, rows);
  out.timeseries_csv = csv.str();

  if (traj.stability_loss)
    out.exit_code = kExitStabilityLoss;
  else if (!out.report.all_passed())
    out.exit_code = kExitChecksFailed;
  else
    out.exit_code = kExitOk;

  auto& j = out.report_json;
  j["schema_version"] = 1;
  j["tool"] = "bose-phonon-kinetics";
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config.entries)
    if (k != "integration.workers") cfg[k] = v;
  j["config"] = cfg;
  nlohmann::ordered_json runj;
  runj["status"] = out.status;
  runj["exit_code"] = out.exit_code;
  runj["steps"] = traj.steps;
  runj["t_final"] = traj.snapshots.back().t;
  runj["n_c_final"] = traj.snapshots.back().n_c;
  runj["n_c_min"] = traj.min_nc;
  runj["kappa0"] = params.kappa0();
  runj["boundary_mass_final"] = boundary_mass(traj.snapshots.back().f);
  if (traj.stability_loss) runj["crossing_time"] = traj.crossing_time;
  if (traj.clamped_mass != 0.0) runj["clamped_mass"] = traj.clamped_mass;
  j["run"] = runj;
  nlohmann::ordered_json thr;
  thr["C_f0"] = out.threshold.threshold;
  thr["m2_f0"] = out.threshold.m2;
  thr["required_n0"] = out.threshold.required;
  thr["n0"] = config.physics.n0;
  thr["margin"] = out.threshold.margin;
  thr["passed"] = out.threshold.passed;
  thr["convention"] =
      out.threshold.convention == ThresholdConvention::total_mass ? "total_mass" : "line_moment";
  j["threshold"] = thr;
  j["checks"] = to_json(out.report);
  j["all_checks_passed"] = out.report.all_passed();

  if (!config.outputs.timeseries.empty())
    write_text_file(config.outputs.timeseries, out.timeseries_csv);
  if (!config.outputs.report.empty())
    write_text_file(config.outputs.report, j.dump(2) + "\n");
  if (!config.outputs.snapshot.empty()) {
    std::ostringstream snap;
    write_snapshot(snap, traj.snapshots.back().f);
    write_text_file(config.outputs.snapshot, snap.str());
  }
  return out;
}

EquilibriumResidual equilibrium_residual(const RadialFunction& f, const CollisionTables& tables) {
  EquilibriumResidual r;
  const auto q = apply_pair(f, tables);
  for (double v : q.rate) r.max_rate = std::max(r.max_rate, std::abs(v));
  r.max_pair = max_pair_contribution(f, tables);
  for (std::size_t i = 1; i < f.size(); ++i) {
    const auto terms = strong_terms(f, i);
    double sum = 0.0;
    for (double t : terms) {
      sum += t;
      r.strong_scale = std::max(r.strong_scale, std::abs(t));
    }
    r.max_strong = std::max(r.max_strong, std::abs(sum));
  }
  return r;
}

}  // namespace bpk
