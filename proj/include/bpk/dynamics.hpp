#pragma once

// Coupled quasi-particle / condensate system
//
//   df/dt   = (kappa0 / n_c) Q[f]
//   dn_c/dt = -(kappa0 / n_c) int Q[f] dp
//
// integrated jointly with classical RK4. Total mass 4 pi m_2 + n_c and energy
// m_3 are linear invariants of the discrete system, so RK4 keeps both to
// round-off.

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "bpk/collision.hpp"
#include "bpk/radial_grid.hpp"

namespace bpk {

class PhysicalParams {
 public:
  PhysicalParams(double m, double g, std::optional<double> kBT = std::nullopt);

  double m() const noexcept { return m_; }
  double g() const noexcept { return g_; }
  std::optional<double> kBT() const noexcept { return kBT_; }
  /// 9 / (64 pi^2 m), cached at construction.
  double kappa0() const noexcept { return kappa0_; }

  static double kappa0_for(double m);

 private:
  double m_;
  double g_;
  std::optional<double> kBT_;
  double kappa0_;
};

/// k_B T / sqrt(g n_c / m); the cold-gas reduction wants this small.
/// Empty when no temperature was supplied.
std::optional<double> cold_gas_ratio(const PhysicalParams& p, double n_c);

double dispersion_bogoliubov(double p, const PhysicalParams& params, double n_c);
double dispersion_phonon(double p, const PhysicalParams& params, double n_c);

/// kappa p p1 p2 with kappa = 9 / (64 pi^2 (m g n_c)^{3/2}).
double transition_probability(double p, double p1, double p2, const PhysicalParams& params,
                              double n_c);

struct SimState {
  double t = 0.0;
  RadialFunction f;
  double n_c = 0.0;
  double flux_integral = 0.0;
  double n0 = 0.0;
  double total_mass0 = 0.0;  ///< 4 pi m_2(f0) + n0
  double energy0 = 0.0;      ///< m_3(f0)

  double mass_f() const;
  double total_mass() const { return mass_f() + n_c; }
  double energy() const;
};

/// Initial state at t = 0 with conserved targets taken from (f0, n0).
SimState make_state(RadialFunction f0, double n0);

enum class PositivityPolicy { reject_and_halve, clamp_with_ledger };

struct StepControl {
  double safety = 0.5;
  double dt_max = 1.0;
  double nc_floor = 1e-3;
  double depletion_fraction = 0.004;  ///< max |dn_c| per step as a share of n_c - floor
  PositivityPolicy positivity = PositivityPolicy::reject_and_halve;
  int max_halvings = 30;
  unsigned workers = 1;

  void validate() const;
};

struct Rhs {
  std::vector<double> dfdt;
  double dncdt = 0.0;
  double dflux = 0.0;
};

Rhs coupled_rhs(const SimState& state, const CollisionTables& tables, double kappa0,
                unsigned workers = 1);

/// sqrt(n0^2 - 2 kappa0 flux); CondensateDepleted on a negative radicand.
double nc_closed_form(double n0, double flux_integral, double kappa0);

struct StepResult {
  SimState state;
  double dt_used = 0.0;
  int halvings = 0;
  double clamped_mass = 0.0;  ///< mass removed by clamping negatives (clamp policy)
};

/// One RK4 step of (f, n_c, flux). Throws StabilityLoss when n_c falls to the
/// floor (crossing time interpolated inside the step) and StiffnessError when
/// positivity cannot be restored within the halving budget.
StepResult step(const SimState& state, double dt, const CollisionTables& tables,
                double kappa0, const StepControl& control);

struct DtCandidates {
  double relaxation = 0.0;  ///< safety / (kappa0 / n_c * max nu_hat)
  double depletion = 0.0;   ///< keeps |dn_c| per step <= depletion_fraction (n_c - floor)
  double chosen = 0.0;
};

DtCandidates adaptive_dt_candidates(const SimState& state, const CollisionTables& tables,
                                    double kappa0, const StepControl& control);
double adaptive_dt(const SimState& state, const CollisionTables& tables, double kappa0,
                   const StepControl& control);

struct IntegrateOptions {
  double t_end = 1.0;
  std::optional<double> fixed_dt;   ///< constant step instead of adaptive_dt
  std::size_t max_steps = 10000000;
  std::size_t snapshot_stride = 0;  ///< 0: only the forced output times and the end
  std::vector<double> output_times; ///< steps are shortened to land on these
};

struct Trajectory {
  std::vector<SimState> snapshots;
  std::vector<double> snapshot_dt;  ///< step size that produced each snapshot
  std::size_t steps = 0;
  double clamped_mass = 0.0;
  double max_closed_form_gap = 0.0;  ///< max |nc_closed_form - n_c| / n0
  double min_nc = 0.0;
  bool stability_loss = false;
  double crossing_time = 0.0;
};

/// Integrates from s0 to options.t_end. Stability loss ends the run early and
/// is reported in the trajectory (the final snapshot is the last good state).
Trajectory integrate(const SimState& s0, const CollisionTables& tables, double kappa0,
                     const StepControl& control, const IntegrateOptions& options);

/// c0 = int_0^1 z^2 (1 - z)^2 dz.
double c0_constant();

/// C(f0) = 2 sqrt(m3 max{ ||f0 r^2||_inf,
///                        3 max{m4, C8 m3^{5/4}} / (2 c0^{1/4} m3^{3/4}) }).
double stability_threshold(const RadialFunction& f0, double C8);

enum class ThresholdConvention {
  total_mass,   ///< n0 >= 4 pi (C - m2) + delta
  line_moment,  ///< n0 >= C - m2 + delta
};

struct ThresholdResult {
  double threshold = 0.0;  ///< C(f0)
  double m2 = 0.0;
  double required = 0.0;   ///< right-hand side including delta
  double margin = 0.0;     ///< n0 - required
  bool passed = false;
  ThresholdConvention convention = ThresholdConvention::total_mass;
};

ThresholdResult threshold_check(const RadialFunction& f0, double n0, double delta, double C8,
                                ThresholdConvention convention = ThresholdConvention::total_mass);

}  // namespace bpk
