#include "bpk/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bpk/errors.hpp"

namespace bpk {

PhysicalParams::PhysicalParams(double m, double g, std::optional<double> kBT)
    : m_(m), g_(g), kBT_(kBT), kappa0_(kappa0_for(m)) {
  if (!(m > 0.0) || !std::isfinite(m)) throw DomainError("particle mass m must be > 0");
  if (!(g > 0.0) || !std::isfinite(g)) throw DomainError("coupling g must be > 0");
  if (kBT && !(*kBT > 0.0)) throw DomainError("kBT must be > 0 when given");
}

double PhysicalParams::kappa0_for(double m) { return 9.0 / (64.0 * M_PI * M_PI * m); }

std::optional<double> cold_gas_ratio(const PhysicalParams& p, double n_c) {
  if (!p.kBT()) return std::nullopt;
  return *p.kBT() / std::sqrt(p.g() * n_c / p.m());
}

double dispersion_bogoliubov(double p, const PhysicalParams& params, double n_c) {
  const double kin = p * p / (2.0 * params.m());
  return std::sqrt(params.g() * n_c / params.m() * p * p + kin * kin);
}

double dispersion_phonon(double p, const PhysicalParams& params, double n_c) {
  return std::sqrt(params.g() * n_c / params.m()) * p;
}

double transition_probability(double p, double p1, double p2, const PhysicalParams& params,
                              double n_c) {
  if (!(n_c > 0.0)) throw SingularCondensate("transition probability needs n_c > 0");
  const double mgn = params.m() * params.g() * n_c;
  const double kappa = 9.0 / (64.0 * M_PI * M_PI * mgn * std::sqrt(mgn));
  return kappa * p * p1 * p2;
}

double SimState::mass_f() const { return full_moment(f, 0); }
double SimState::energy() const { return line_moment(f, 3); }

SimState make_state(RadialFunction f0, double n0) {
  if (!(n0 > 0.0)) throw SingularCondensate("initial condensate mass n0 must be > 0");
  SimState s{0.0, std::move(f0), n0, 0.0, n0, 0.0, 0.0};
  s.total_mass0 = s.mass_f() + n0;
  s.energy0 = s.energy();
  return s;
}

void StepControl::validate() const {
  if (!(safety > 0.0 && safety <= 1.0)) throw DomainError("safety must lie in (0, 1]");
  if (!(dt_max > 0.0)) throw DomainError("dt_max must be > 0");
  if (!(nc_floor > 0.0)) throw DomainError("nc_floor must be > 0");
  if (!(depletion_fraction > 0.0 && depletion_fraction <= 0.05))
    throw DomainError("depletion_fraction must lie in (0, 0.05]");
  if (max_halvings < 0) throw DomainError("max_halvings must be >= 0");
}

namespace {

struct RawRhs {
  std::vector<double> q;
  std::vector<double> dfdt;
  double dnc = 0.0;
  double dflux = 0.0;
};

// Returns false when n_c is not positive.
bool eval_rhs(std::span<const double> f, double nc, const CollisionTables& tables,
              double kappa0, unsigned workers, RawRhs& out) {
  if (!(nc > 0.0)) return false;
  const std::size_t n = f.size();
  out.q.resize(n);
  out.dfdt.assign(n, 0.0);
  apply_pair_raw(f, tables, out.q, workers);
  const double pref = kappa0 / nc;
  double sum = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    out.dfdt[i] = pref * (out.q[i] / tables.node_mass(i));
    sum += out.q[i];
  }
  out.dflux = sum;
  out.dnc = -pref * sum;
  return true;
}

}  // namespace

Rhs coupled_rhs(const SimState& state, const CollisionTables& tables, double kappa0,
                unsigned workers) {
  require_same_grid(state.f.grid(), tables.grid());
  RawRhs r;
  if (!eval_rhs(state.f.values(), state.n_c, tables, kappa0, workers, r))
    throw SingularCondensate("n_c must be > 0 to evaluate the collision rate");
  return Rhs{std::move(r.dfdt), r.dnc, r.dflux};
}

double nc_closed_form(double n0, double flux_integral, double kappa0) {
  const double rad = n0 * n0 - 2.0 * kappa0 * flux_integral;
  if (rad < 0.0)
    throw CondensateDepleted("condensate radicand is negative (" + std::to_string(rad) + ")");
  return std::sqrt(rad);
}

namespace {

enum class Attempt { ok, negative, singular };

struct Rk4Out {
  std::vector<double> f;
  double nc = 0.0;
  double flux = 0.0;
};

Attempt rk4(const SimState& s, double dt, const CollisionTables& tables, double kappa0,
            unsigned workers, Rk4Out& out) {
  const auto f0 = s.f.values();
  const std::size_t n = f0.size();
  RawRhs k1, k2, k3, k4;
  std::vector<double> tmp(n);
  auto stage = [&](const RawRhs& k, double h) {
    for (std::size_t i = 0; i < n; ++i) tmp[i] = f0[i] + h * k.dfdt[i];
    return std::pair<double, double>{s.n_c + h * k.dnc, s.flux_integral + h * k.dflux};
  };
  if (!eval_rhs(f0, s.n_c, tables, kappa0, workers, k1)) return Attempt::singular;
  auto [nc2, fl2] = stage(k1, 0.5 * dt);
  (void)fl2;
  if (!eval_rhs(tmp, nc2, tables, kappa0, workers, k2)) return Attempt::singular;
  auto [nc3, fl3] = stage(k2, 0.5 * dt);
  (void)fl3;
  if (!eval_rhs(tmp, nc3, tables, kappa0, workers, k3)) return Attempt::singular;
  auto [nc4, fl4] = stage(k3, dt);
  (void)fl4;
  if (!eval_rhs(tmp, nc4, tables, kappa0, workers, k4)) return Attempt::singular;

  const double h6 = dt / 6.0;
  out.f.resize(n);
  bool negative = false;
  for (std::size_t i = 0; i < n; ++i) {
    out.f[i] = f0[i] + h6 * (k1.dfdt[i] + 2.0 * k2.dfdt[i] + 2.0 * k3.dfdt[i] + k4.dfdt[i]);
    if (out.f[i] < 0.0) negative = true;
  }
  out.nc = s.n_c + h6 * (k1.dnc + 2.0 * k2.dnc + 2.0 * k3.dnc + k4.dnc);
  out.flux = s.flux_integral + h6 * (k1.dflux + 2.0 * k2.dflux + 2.0 * k3.dflux + k4.dflux);
  return negative ? Attempt::negative : Attempt::ok;
}

}  // namespace

StepResult step(const SimState& state, double dt, const CollisionTables& tables,
                double kappa0, const StepControl& control) {
  if (!(dt > 0.0)) throw DomainError("time step must be > 0");
  require_same_grid(state.f.grid(), tables.grid());
  if (!(state.n_c > control.nc_floor))
    throw StabilityLoss("n_c is already at or below the floor", state.t);

  const RadialGrid& g = state.f.grid();
  Rk4Out out;
  double h = dt;
  int halvings = 0;
  double clamped = 0.0;
  for (;;) {
    const Attempt a = rk4(state, h, tables, kappa0, control.workers, out);
    if (a == Attempt::ok) break;
    if (a == Attempt::negative && control.positivity == PositivityPolicy::clamp_with_ledger) {
      const double e_before = line_moment(g, out.f, 3);
      const double total_before = full_moment(g, out.f, 0) + out.nc;
      for (double& v : out.f) v = std::max(v, 0.0);
      const double e_after = line_moment(g, out.f, 3);
      if (e_after > 0.0) {
        const double s = e_before / e_after;
        for (double& v : out.f) v *= s;
      }
      const double mass = full_moment(g, out.f, 0);
      clamped += total_before - out.nc - mass;
      out.nc = total_before - mass;
      break;
    }
    if (halvings >= control.max_halvings)
      throw StiffnessError("positivity not restored after " + std::to_string(halvings) +
                           " halvings at t = " + std::to_string(state.t));
    h *= 0.5;
    ++halvings;
  }

  if (!(out.nc > control.nc_floor)) {
    const double drop = state.n_c - out.nc;
    const double frac = drop > 0.0 ? (state.n_c - control.nc_floor) / drop : 1.0;
    throw StabilityLoss("n_c reached the floor", state.t + std::clamp(frac, 0.0, 1.0) * h);
  }

  StepResult r{SimState{state.t + h, RadialFunction(state.f.grid_ptr(), std::move(out.f)),
                        out.nc, out.flux, state.n0, state.total_mass0, state.energy0},
               h, halvings, clamped};
  return r;
}

DtCandidates adaptive_dt_candidates(const SimState& state, const CollisionTables& tables,
                                    double kappa0, const StepControl& control) {
  if (!(state.n_c > 0.0)) throw SingularCondensate("adaptive_dt needs n_c > 0");
  const auto nu = collision_frequency_raw(state.f.grid(), state.f.values());
  double rate = 0.0;
  for (std::size_t i = 1; i < nu.size(); ++i) rate = std::max(rate, nu[i]);
  rate *= kappa0 / state.n_c;
  const double inf = std::numeric_limits<double>::infinity();
  DtCandidates c;
  c.relaxation = rate > 0.0 ? control.safety / rate : inf;
  const Rhs rhs = coupled_rhs(state, tables, kappa0, control.workers);
  const double dnc = std::abs(rhs.dncdt);
  const double room = std::max(state.n_c - control.nc_floor, 0.0);
  c.depletion = dnc > 0.0 ? control.depletion_fraction * room / dnc : inf;
  c.chosen = std::min({control.dt_max, c.relaxation, c.depletion});
  return c;
}

double adaptive_dt(const SimState& state, const CollisionTables& tables, double kappa0,
                   const StepControl& control) {
  return adaptive_dt_candidates(state, tables, kappa0, control).chosen;
}

Trajectory integrate(const SimState& s0, const CollisionTables& tables, double kappa0,
                     const StepControl& control, const IntegrateOptions& options) {
  control.validate();
  if (!(options.t_end >= s0.t)) throw DomainError("t_end lies before the initial time");
  if (options.fixed_dt && !(*options.fixed_dt > 0.0))
    throw DomainError("fixed time step must be > 0");

  std::vector<double> outs;
  for (double t : options.output_times)
    if (t > s0.t && t < options.t_end) outs.push_back(t);
  std::sort(outs.begin(), outs.end());
  outs.push_back(options.t_end);
  std::size_t next_out = 0;

  Trajectory traj;
  traj.snapshots.push_back(s0);
  traj.snapshot_dt.push_back(0.0);
  traj.min_nc = s0.n_c;

  SimState s = s0;
  const double t_eps = 1e-12 * std::max(1.0, std::abs(options.t_end));
  std::size_t since_snapshot = 0;
  while (options.t_end - s.t > t_eps) {
    if (traj.steps >= options.max_steps)
      throw Error("step budget of " + std::to_string(options.max_steps) + " exhausted at t = " +
                  std::to_string(s.t));
    double dt = options.fixed_dt ? *options.fixed_dt : adaptive_dt(s, tables, kappa0, control);
    bool hit = false;
    const double target = outs[next_out];
    if (s.t + dt >= target - t_eps) {
      dt = target - s.t;
      hit = true;
    }
    std::optional<StepResult> attempt;
    try {
      attempt.emplace(step(s, dt, tables, kappa0, control));
    } catch (const StabilityLoss& e) {
      traj.stability_loss = true;
      traj.crossing_time = e.crossing_time();
      break;
    }
    StepResult& r = *attempt;
    ++traj.steps;
    traj.clamped_mass += r.clamped_mass;
    const bool full = r.halvings == 0;
    s = std::move(r.state);
    if (hit && full) {
      s.t = target;
      ++next_out;
    } else {
      hit = false;
    }
    traj.min_nc = std::min(traj.min_nc, s.n_c);
    double gap;
    try {
      gap = std::abs(nc_closed_form(s.n0, s.flux_integral, kappa0) - s.n_c) / s.n0;
    } catch (const CondensateDepleted&) {
      gap = std::abs(s.n_c) / s.n0;
    }
    traj.max_closed_form_gap = std::max(traj.max_closed_form_gap, gap);
    ++since_snapshot;

    const bool depleted = s.n_c - control.nc_floor <= 1e-9 * control.nc_floor;
    const bool stride =
        options.snapshot_stride > 0 && since_snapshot >= options.snapshot_stride;
    if (hit || stride || depleted) {
      traj.snapshots.push_back(s);
      traj.snapshot_dt.push_back(r.dt_used);
      since_snapshot = 0;
    }
    if (depleted) {
      traj.stability_loss = true;
      traj.crossing_time = s.t;
      break;
    }
  }
  if (traj.snapshots.back().t != s.t) {
    traj.snapshots.push_back(s);
    traj.snapshot_dt.push_back(0.0);
  }
  return traj;
}

double c0_constant() {
  // z^2 (1 - z)^2 = z^2 - 2 z^3 + z^4
  return 1.0 / 3.0 - 2.0 / 4.0 + 1.0 / 5.0;
}

double stability_threshold(const RadialFunction& f0, double C8) {
  if (!(C8 > 0.0)) throw DomainError("C8 must be > 0");
  const double m3 = line_moment(f0, 3);
  bool nonzero = false;
  for (double v : f0.values()) nonzero = nonzero || v > 0.0;
  if (!nonzero) return 0.0;
  if (!(m3 > 0.0)) throw DomainError("degenerate energy: m_3 = 0 for nonzero f0");
  const double m4 = line_moment(f0, 4);
  const double wsup = weighted_sup(f0);
  const double c0 = c0_constant();
  const double inner =
      3.0 * std::max(m4, C8 * std::pow(m3, 1.25)) / (2.0 * std::pow(c0, 0.25) * std::pow(m3, 0.75));
  return 2.0 * std::sqrt(m3 * std::max(wsup, inner));
}

ThresholdResult threshold_check(const RadialFunction& f0, double n0, double delta, double C8,
                                ThresholdConvention convention) {
  if (!(delta > 0.0)) throw DomainError("delta must be > 0");
  ThresholdResult r;
  r.convention = convention;
  r.threshold = stability_threshold(f0, C8);
  r.m2 = line_moment(f0, 2);
  r.required = convention == ThresholdConvention::total_mass
                   ? 4.0 * M_PI * (r.threshold - r.m2) + delta
                   : r.threshold - r.m2 + delta;
  r.margin = n0 - r.required;
  r.passed = r.margin >= 0.0;
  return r;
}

}  // namespace bpk
