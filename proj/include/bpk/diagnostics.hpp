#pragma once

// Numerical checks of the conservation laws, entropy monotonicity, moment
// bounds and Mittag-Leffler tail estimates satisfied by the kinetic system.
// Checks never throw on a violated inequality; they return a CheckRecord with
// passed = false and both sides of the inequality.

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bpk/collision.hpp"
#include "bpk/dynamics.hpp"
#include "bpk/radial_grid.hpp"

namespace bpk {

struct CheckRecord {
  std::string name;
  bool passed = false;
  std::vector<std::pair<std::string, double>> measured;
  std::vector<std::pair<std::string, double>> bounds;
  double tolerance = 0.0;
  std::string reference;
  std::string note;

  /// Value of a measured or bound entry; throws std::out_of_range if absent.
  double value(const std::string& key) const;
};

struct DiagnosticsReport {
  std::vector<CheckRecord> records;

  void add(CheckRecord r) { records.push_back(std::move(r)); }
  bool all_passed() const;
  const CheckRecord* find(const std::string& name) const;
};

using Snapshots = std::span<const SimState>;

/// H = 4 pi sum w r^2 (f log f - (1 + f) log(1 + f)), integrand 0 where f = 0.
double entropy(const RadialFunction& f);

/// H non-increasing within 1e-10 |H(t0)| and every dissipation summand
/// >= -1e-13 scale. Zero samples are floored at 1e-300 for the logarithms.
CheckRecord check_h_theorem(Snapshots traj, const CollisionTables& tables);

/// c_k = 8 pi^2 int_0^1 z^2 (1 - z)^2 (1 - z^k - (1 - z)^k) dz, exact rational form.
double linear_constant(int k);

/// 8 pi^2 * 4 * 2^k, a provable constant for the quadratic moment bound.
double quadratic_bound_constant(int k);

/// Quadratic pairing with r^k against C_k (m_{k+3} m_3 + m_{k+1} m_5).
CheckRecord check_quadratic_moment_bound(const RadialFunction& f, int k,
                                         const CollisionTables& tables);

/// Linear pairing with r^k against -c_k m_{k+7}, relative tolerance `tol`.
CheckRecord check_linear_identity(const RadialFunction& f, int k,
                                  const CollisionTables& tables, double tol = 1e-6);

/// sup_t m_k <= max{m_k(0), Ck m_3^{(k+1)/4}}; reports the smallest passing Ck.
CheckRecord check_moment_propagation(Snapshots traj, int k, double Ck);

struct CreationWindow {
  double t_min = 0.0;
  double t_max = 0.0;
  double delta = 1.0;  ///< condensate floor entering the transient bound
  double slack = 0.5;
  double time_scale = 1.0;  ///< tau = time_scale * t in the bound; kappa0 for physical runs
};

/// Plateau-subtracted creation transient: sup over the window of
/// tau^{(k-3)/5} (m_k(t) - m_k(t_last)), tau = time_scale * t, against
/// (1 / (delta (k-3)))^{(k-3)/5} m_3 (1 + slack). Reports the log-log slope
/// of the decaying part. ConfigError when the window spans < 1 decade.
CheckRecord check_moment_creation(Snapshots traj, int k, const CreationWindow& window);

/// sup_t ||f r^2||_inf <= max{||f0 r^2||_inf, 3 sup_t m4 / (2 c0^{1/4} m3^{3/4})}.
CheckRecord check_linf_bound(Snapshots traj);

/// m_2 <= 2 sqrt(m_3 ||f r^2||_inf) at every snapshot.
CheckRecord check_m2_interpolation(Snapshots traj);

/// (E^n_a, I^n_{a,rho}) with full moments M_k = 4 pi m_{k+2}.
std::pair<double, double> ml_partial_sums(const RadialFunction& f, double a, double alpha,
                                          int n, int rho);

/// 4 pi sum w r^2 f E_a(alpha^a r); +inf on overflow.
double ml_moment(const RadialFunction& f, double a, double alpha);

/// Both sides of I^n_{a,5} >= alpha^{-5/2} E^n_a - alpha^{-2} M_1 E_a(alpha^{a - 1/2}).
std::pair<double, double> ml_interpolation_sides(const RadialFunction& f, double a,
                                                 double alpha, int n);

/// S(k) = sum_{i=1}^{floor((k+1)/2)} C(k, i) B(a i + 1, a (k - i) + 1).
double beta_sum(double a, int k);

/// Tabulates S(k) (a k)^{1+a} for k = 3..k_max. Passes when its maximum is
/// attained in the first half of the range and S(k) is eventually decreasing.
CheckRecord beta_sum_check(double a, int k_max);

/// Largest alpha with ml_moment(f, a, alpha) <= level, by bisection on [0, hi].
double ml_normalizing_rate(const RadialFunction& f, double a, double level = 1.0,
                           double hi = 100.0);

/// Bisection (12 steps) on (0, alpha0] for the largest rate keeping the ML
/// moment <= 2 on every snapshot. Passes when the rate is >= alpha0 / 100.
CheckRecord check_ml_propagation(Snapshots traj, double a, double alpha0);

/// Largest alpha in [0, hi] with 4 pi sum w r^3 f exp(alpha min{1, t^{1/5}} r) <= 1/(2 alpha).
double tail_rate_estimate(const RadialFunction& f, double t, double hi = 10.0);

struct MomentBudget {
  double h3 = 0.0;
  double h8 = 0.0;
  double h_inf = 0.0;
  double delta = 0.0;
};

/// 2 (C8t / c8t) h3^{9/4} + (kappa0 / delta) C8t h3^{7/2}.
double budget_h8(double h3, double delta, double kappa0, double C8t, double c8t);

/// Membership of f in the invariant set: f >= 0, m_3 = h3, m_8 <= h8,
/// ||f r^2||_inf <= h_inf.
CheckRecord budget_check(const RadialFunction& f, const MomentBudget& budget);

/// Membership along a trajectory. Reports the smallest C8t (at fixed c8t)
/// whose h8 would have covered the run.
CheckRecord budget_check(Snapshots traj, const MomentBudget& budget, double kappa0,
                         double c8t);

}  // namespace bpk
