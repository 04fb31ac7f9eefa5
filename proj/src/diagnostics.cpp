#include "bpk/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bpk/errors.hpp"
#include "bpk/special_functions.hpp"

namespace bpk {

double CheckRecord::value(const std::string& key) const {
  for (const auto& [k, v] : measured)
    if (k == key) return v;
  for (const auto& [k, v] : bounds)
    if (k == key) return v;
  throw std::out_of_range("check '" + name + "' has no entry '" + key + "'");
}

bool DiagnosticsReport::all_passed() const {
  return std::all_of(records.begin(), records.end(), [](const auto& r) { return r.passed; });
}

const CheckRecord* DiagnosticsReport::find(const std::string& name) const {
  for (const auto& r : records)
    if (r.name == name) return &r;
  return nullptr;
}

namespace {

void require_snapshots(Snapshots traj, std::size_t min_count) {
  if (traj.size() < min_count)
    throw DomainError("check needs at least " + std::to_string(min_count) + " snapshots");
}

}  // namespace

double entropy(const RadialFunction& f) {
  const RadialGrid& g = f.grid();
  double sum = 0.0;
  for (std::size_t i = 1; i < f.size(); ++i) {
    const double x = f[i];
    if (x == 0.0) continue;
    const double r = g.node(i);
    sum += g.weight(i) * r * r * (x * std::log(x) - (1.0 + x) * std::log1p(x));
  }
  return 4.0 * M_PI * sum;
}

CheckRecord check_h_theorem(Snapshots traj, const CollisionTables& tables) {
  require_snapshots(traj, 2);
  CheckRecord rec;
  rec.name = "h_theorem";
  rec.reference = "H-theorem";
  rec.tolerance = 1e-10;
  const double h0 = entropy(traj.front().f);
  const double tol_h = 1e-10 * std::abs(h0);
  double prev = h0, max_increase = -std::numeric_limits<double>::infinity();
  double worst_summand = std::numeric_limits<double>::infinity();
  double min_total = std::numeric_limits<double>::infinity();
  bool summands_ok = true;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    if (k > 0) {
      const double h = entropy(traj[k].f);
      max_increase = std::max(max_increase, h - prev);
      prev = h;
    }
    const auto d = dissipation_summands(traj[k].f, tables, LogFloor::floor);
    const double ratio = d.scale > 0.0 ? d.min_summand / d.scale : 0.0;
    worst_summand = std::min(worst_summand, ratio);
    min_total = std::min(min_total, d.scale > 0.0 ? d.total / d.scale : 0.0);
    if (d.min_summand < -1e-13 * d.scale) summands_ok = false;
  }
  rec.passed = max_increase <= tol_h && summands_ok;
  rec.measured = {{"H_initial", h0},
                  {"H_final", prev},
                  {"max_increase", max_increase},
                  {"min_summand_over_scale", worst_summand},
                  {"min_dissipation_over_scale", min_total}};
  rec.bounds = {{"max_increase", tol_h}, {"min_summand_over_scale", -1e-13}};
  return rec;
}

double linear_constant(int k) {
  if (k < 0) throw DomainError("linear_constant needs k >= 0");
  // 1/30 - 2 B(k+3, 3) = (P - 120) / (30 P), P = (k+3)(k+4)(k+5)
  const long long p = static_cast<long long>(k + 3) * (k + 4) * (k + 5);
  return 8.0 * M_PI * M_PI * static_cast<double>(p - 120) / (30.0 * static_cast<double>(p));
}

double quadratic_bound_constant(int k) {
  return 8.0 * M_PI * M_PI * 4.0 * std::ldexp(1.0, k);
}

namespace {

std::vector<double> power_vector(const RadialGrid& g, int k) {
  std::vector<double> phi(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) phi[i] = k == 0 ? 1.0 : std::pow(g.node(i), k);
  return phi;
}

}  // namespace

CheckRecord check_quadratic_moment_bound(const RadialFunction& f, int k,
                                         const CollisionTables& tables) {
  if (k < 1) throw DomainError("quadratic moment bound needs k >= 1");
  CheckRecord rec;
  rec.name = "quadratic_moment_bound_k" + std::to_string(k);
  rec.reference = "quadratic moment estimate";
  const auto phi = power_vector(f.grid(), k);
  const double j = weak_pairing_quadratic(f, phi, tables);
  const double rhs = quadratic_bound_constant(k) *
                     (line_moment(f, k + 3) * line_moment(f, 3) +
                      line_moment(f, k + 1) * line_moment(f, 5));
  rec.tolerance = 1e-12;
  rec.passed = j <= rhs * (1.0 + rec.tolerance);
  rec.measured = {{"J_k", j}};
  rec.bounds = {{"C_k", quadratic_bound_constant(k)}, {"rhs", rhs}};
  return rec;
}

CheckRecord check_linear_identity(const RadialFunction& f, int k, const CollisionTables& tables,
                                  double tol) {
  CheckRecord rec;
  rec.name = "linear_moment_identity_k" + std::to_string(k);
  rec.reference = "linear part of the moment identity";
  rec.tolerance = tol;
  const auto phi = power_vector(f.grid(), k);
  const double lin = weak_pairing_linear(f, phi, tables);
  const double expected = -linear_constant(k) * line_moment(f, k + 7);
  const double scale = std::max(std::abs(expected), std::abs(lin));
  const double rel = scale > 0.0 ? std::abs(lin - expected) / scale : 0.0;
  rec.passed = rel <= tol;
  rec.measured = {{"linear_pairing", lin}, {"relative_error", rel}};
  rec.bounds = {{"minus_ck_m_k_plus_7", expected}};
  return rec;
}

CheckRecord check_moment_propagation(Snapshots traj, int k, double Ck) {
  require_snapshots(traj, 1);
  if (k <= 3) throw DomainError("moment propagation needs k > 3");
  CheckRecord rec;
  rec.name = "moment_propagation_k" + std::to_string(k);
  rec.reference = "propagation of polynomial moments";
  rec.tolerance = 1e-12;
  const double m3 = line_moment(traj.front().f, 3);
  const double mk0 = line_moment(traj.front().f, k);
  double sup = 0.0;
  for (const auto& s : traj) sup = std::max(sup, line_moment(s.f, k));
  const double scale = std::pow(m3, (k + 1) / 4.0);
  const double bound = std::max(mk0, Ck * scale);
  const double ck_min = sup > mk0 && scale > 0.0 ? sup / scale : 0.0;
  rec.passed = sup <= bound * (1.0 + rec.tolerance);
  rec.measured = {{"sup_m_k", sup}, {"m_k_initial", mk0}, {"min_passing_Ck", ck_min}};
  rec.bounds = {{"bound", bound}, {"Ck", Ck}};
  return rec;
}

CheckRecord check_moment_creation(Snapshots traj, int k, const CreationWindow& w) {
  require_snapshots(traj, 2);
  if (k <= 3) throw DomainError("moment creation needs k > 3");
  if (!(w.t_min > 0.0) || !(w.t_max >= 10.0 * w.t_min))
    throw ConfigError("moment creation window must span at least one decade");
  if (!(w.delta > 0.0)) throw ConfigError("moment creation needs delta > 0");
  if (!(w.time_scale > 0.0)) throw ConfigError("moment creation needs time_scale > 0");
  CheckRecord rec;
  rec.name = "moment_creation_k" + std::to_string(k);
  rec.reference = "creation of polynomial moments";
  rec.tolerance = w.slack;
  const double e = (k - 3) / 5.0;
  const double floor_k = line_moment(traj.back().f, k);
  const double m3 = line_moment(traj.front().f, 3);
  double sup = 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t used = 0, in_window = 0;
  for (const auto& s : traj) {
    if (s.t < w.t_min * (1.0 - 1e-12) || s.t > w.t_max * (1.0 + 1e-12)) continue;
    ++in_window;
    const double y = line_moment(s.f, k) - floor_k;
    sup = std::max(sup, std::pow(w.time_scale * s.t, e) * y);
    if (y > 0.0) {
      const double lx = std::log(s.t), ly = std::log(y);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++used;
    }
  }
  if (in_window < 3) throw ConfigError("moment creation window holds fewer than 3 snapshots");
  double slope = std::numeric_limits<double>::quiet_NaN();
  if (used >= 2) {
    const double n = static_cast<double>(used);
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  const double bound = std::pow(1.0 / (w.delta * (k - 3)), e) * m3 * (1.0 + w.slack);
  rec.passed = sup <= bound;
  rec.measured = {{"sup_scaled_transient", sup},
                  {"plateau", floor_k},
                  {"fitted_slope", slope},
                  {"points_in_window", static_cast<double>(in_window)}};
  rec.bounds = {{"bound", bound}, {"expected_slope", -e}, {"time_scale", w.time_scale}};
  return rec;
}

CheckRecord check_linf_bound(Snapshots traj) {
  require_snapshots(traj, 1);
  CheckRecord rec;
  rec.name = "linf_bound";
  rec.reference = "weighted L-infinity estimate";
  rec.tolerance = 1e-9;
  const double m3 = line_moment(traj.front().f, 3);
  const double w0 = weighted_sup(traj.front().f);
  double sup_w = 0.0, sup_m4 = 0.0;
  for (const auto& s : traj) {
    sup_w = std::max(sup_w, weighted_sup(s.f));
    sup_m4 = std::max(sup_m4, line_moment(s.f, 4));
  }
  const double moment_term =
      m3 > 0.0 ? 3.0 * sup_m4 / (2.0 * std::pow(c0_constant(), 0.25) * std::pow(m3, 0.75)) : 0.0;
  const double bound = std::max(w0, moment_term);
  rec.passed = sup_w <= bound * (1.0 + rec.tolerance);
  rec.measured = {{"sup_weighted_sup", sup_w}, {"sup_m4", sup_m4}};
  rec.bounds = {{"bound", bound}, {"initial_weighted_sup", w0}, {"moment_term", moment_term}};
  return rec;
}

CheckRecord check_m2_interpolation(Snapshots traj) {
  require_snapshots(traj, 1);
  CheckRecord rec;
  rec.name = "m2_interpolation";
  rec.reference = "m2 interpolation bound";
  rec.tolerance = 1e-12;
  double worst = 0.0;
  bool ok = true;
  for (const auto& s : traj) {
    const double m2 = line_moment(s.f, 2);
    const double rhs = 2.0 * std::sqrt(line_moment(s.f, 3) * weighted_sup(s.f));
    if (m2 > rhs * (1.0 + rec.tolerance)) ok = false;
    if (rhs > 0.0) worst = std::max(worst, m2 / rhs);
  }
  rec.passed = ok;
  rec.measured = {{"max_ratio", worst}};
  rec.bounds = {{"max_ratio", 1.0}};
  return rec;
}

namespace {

// 4 pi sum_i w_i f_i r_i^{k+2} alpha^{a k} / Gamma(a k + 1), in log space.
double ml_term(const RadialFunction& f, double a, double alpha, int k, int rho) {
  const RadialGrid& g = f.grid();
  const double kk = static_cast<double>(k);
  const double lc = a * kk * std::log(alpha) - std::lgamma(a * kk + 1.0);
  const int p = k + rho + 2;
  double sum = 0.0;
  for (std::size_t i = 1; i < f.size(); ++i) {
    if (f[i] == 0.0) continue;
    sum += g.weight(i) * f[i] * std::exp(p * std::log(g.node(i)) + lc);
  }
  return 4.0 * M_PI * sum;
}

}  // namespace

std::pair<double, double> ml_partial_sums(const RadialFunction& f, double a, double alpha,
                                          int n, int rho) {
  if (n < 1 || rho < 0) throw DomainError("partial sums need n >= 1 and rho >= 0");
  if (!(a >= 1.0) || !(alpha > 0.0)) throw DomainError("partial sums need a >= 1, alpha > 0");
  double e = 0.0, in = 0.0;
  for (int k = 1; k <= n; ++k) {
    e += ml_term(f, a, alpha, k, 0);
    in += rho == 0 ? ml_term(f, a, alpha, k, 0) : ml_term(f, a, alpha, k, rho);
  }
  return {e, in};
}

double ml_moment(const RadialFunction& f, double a, double alpha) {
  const RadialGrid& g = f.grid();
  const double s = std::pow(alpha, a);
  double sum = 0.0;
  for (std::size_t i = 1; i < f.size(); ++i) {
    if (f[i] == 0.0) continue;
    const auto e = mittag_leffler(a, s * g.node(i));
    if (e.overflow) return std::numeric_limits<double>::infinity();
    const double r = g.node(i);
    sum += g.weight(i) * r * r * f[i] * e.value;
  }
  return 4.0 * M_PI * sum;
}

std::pair<double, double> ml_interpolation_sides(const RadialFunction& f, double a,
                                                 double alpha, int n) {
  const auto [e, i5] = ml_partial_sums(f, a, alpha, n, 5);
  const double m1 = full_moment(f, 1);
  const double rhs = std::pow(alpha, -2.5) * e -
                     std::pow(alpha, -2.0) * m1 * mittag_leffler_value(a, std::pow(alpha, a - 0.5));
  return {i5, rhs};
}

double beta_sum(double a, int k) {
  if (k < 1) throw DomainError("beta_sum needs k >= 1");
  const double kk = static_cast<double>(k);
  double s = 0.0;
  for (int i = 1; i <= (k + 1) / 2; ++i) {
    const double ii = static_cast<double>(i);
    s += std::exp(log_binomial(kk, ii) + log_beta(a * ii + 1.0, a * (kk - ii) + 1.0));
  }
  return s;
}

CheckRecord beta_sum_check(double a, int k_max) {
  if (k_max < 3) throw DomainError("beta_sum_check needs k_max >= 3");
  if (!(a >= 1.0)) throw DomainError("beta_sum_check needs a >= 1");
  CheckRecord rec;
  rec.name = "beta_sum";
  rec.reference = "beta function sum estimate";
  std::vector<double> s(k_max + 1, 0.0), scaled(k_max + 1, 0.0);
  double c_a = 0.0;
  int k_at = 3;
  for (int k = 3; k <= k_max; ++k) {
    s[k] = beta_sum(a, k);
    scaled[k] = s[k] * std::pow(a * k, 1.0 + a);
    if (scaled[k] > c_a) {
      c_a = scaled[k];
      k_at = k;
    }
  }
  bool decreasing = true;
  for (int k = std::max(3, (3 * k_max) / 4); k < k_max; ++k)
    if (s[k + 1] > s[k]) decreasing = false;
  const bool small_k = k_at <= std::max(3, k_max / 2);
  rec.passed = small_k && decreasing;
  const int half = std::max(3, k_max / 2);
  rec.measured = {{"a", a},
                  {"S_3", s[3]},
                  {"S_4", k_max >= 4 ? s[4] : std::numeric_limits<double>::quiet_NaN()},
                  {"empirical_C_a", c_a},
                  {"k_at_max", static_cast<double>(k_at)},
                  {"scaled_growth_ratio", scaled[half] > 0.0 ? scaled[k_max] / scaled[half] : 0.0},
                  {"eventually_decreasing", decreasing ? 1.0 : 0.0}};
  rec.bounds = {{"k_max", static_cast<double>(k_max)}};
  if (!rec.passed)
    rec.note = "S(k)(ak)^(1+a) keeps growing with k: the i = 1 term alone behaves like "
               "k B(a + 1, a(k - 1) + 1) ~ Gamma(a + 1) a^(-a-1) k^(-a), so the scaled sum grows "
               "linearly in k";
  return rec;
}

double ml_normalizing_rate(const RadialFunction& f, double a, double level, double hi) {
  if (ml_moment(f, a, hi) <= level) return hi;
  double lo = 0.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (ml_moment(f, a, mid) <= level)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

CheckRecord check_ml_propagation(Snapshots traj, double a, double alpha0) {
  require_snapshots(traj, 1);
  if (!(alpha0 > 0.0)) throw DomainError("alpha0 must be > 0");
  CheckRecord rec;
  rec.name = "ml_propagation";
  rec.reference = "propagation of Mittag-Leffler tails";
  const double pre = ml_moment(traj.front().f, a, alpha0);
  auto sup_at = [&](double alpha) {
    double sup = 0.0;
    for (const auto& s : traj) sup = std::max(sup, ml_moment(s.f, a, alpha));
    return sup;
  };
  rec.bounds = {{"initial_level", 1.0}, {"propagated_level", 2.0}, {"min_rate", alpha0 / 100.0}};
  if (!(pre <= 1.0)) {
    rec.passed = false;
    rec.measured = {{"initial_ml_moment", pre}};
    rec.note = "precondition failed: initial Mittag-Leffler moment exceeds 1";
    return rec;
  }
  double alpha = alpha0;
  double sup = sup_at(alpha0);
  if (!(sup <= 2.0)) {
    double lo = 0.0, hi = alpha0;
    for (int it = 0; it < 12; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (sup_at(mid) <= 2.0)
        lo = mid;
      else
        hi = mid;
    }
    alpha = lo;
    sup = alpha > 0.0 ? sup_at(alpha) : 0.0;
  }
  rec.passed = alpha >= alpha0 / 100.0;
  rec.measured = {{"initial_ml_moment", pre}, {"rate_found", alpha}, {"sup_ml_moment", sup}};
  return rec;
}

double tail_rate_estimate(const RadialFunction& f, double t, double hi) {
  if (!(t > 0.0)) throw DomainError("tail_rate_estimate needs t > 0");
  const RadialGrid& g = f.grid();
  const double s = std::min(1.0, std::pow(t, 0.2));
  auto lhs = [&](double alpha) {
    double sum = 0.0;
    for (std::size_t i = 1; i < f.size(); ++i) {
      const double r = g.node(i);
      sum += g.weight(i) * r * r * r * f[i] * std::exp(alpha * s * r);
    }
    return 2.0 * alpha * 4.0 * M_PI * sum;
  };
  if (lhs(hi) <= 1.0) return hi;
  double lo = 0.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (lhs(mid) <= 1.0)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

double budget_h8(double h3, double delta, double kappa0, double C8t, double c8t) {
  if (!(delta > 0.0) || !(c8t > 0.0)) throw DomainError("budget needs delta > 0, c8t > 0");
  return 2.0 * (C8t / c8t) * std::pow(h3, 2.25) + kappa0 / delta * C8t * std::pow(h3, 3.5);
}

namespace {

struct Membership {
  bool energy = false, eighth = false, sup = false;
  double m3 = 0.0, m8 = 0.0, ws = 0.0;
};

Membership membership(const RadialFunction& f, const MomentBudget& b) {
  Membership m;
  m.m3 = line_moment(f, 3);
  m.m8 = line_moment(f, 8);
  m.ws = weighted_sup(f);
  m.energy = std::abs(m.m3 - b.h3) <= 1e-10 * b.h3;
  m.eighth = m.m8 <= b.h8;
  m.sup = m.ws <= b.h_inf;
  return m;
}

}  // namespace

CheckRecord budget_check(const RadialFunction& f, const MomentBudget& budget) {
  CheckRecord rec;
  rec.name = "budget";
  rec.reference = "invariant set membership";
  rec.tolerance = 1e-10;
  const auto m = membership(f, budget);
  rec.passed = m.energy && m.eighth && m.sup;
  rec.measured = {{"m3", m.m3}, {"m8", m.m8}, {"weighted_sup", m.ws}};
  rec.bounds = {{"h3", budget.h3}, {"h8", budget.h8}, {"h_inf", budget.h_inf}};
  return rec;
}

CheckRecord budget_check(Snapshots traj, const MomentBudget& budget, double kappa0, double c8t) {
  require_snapshots(traj, 1);
  CheckRecord rec;
  rec.name = "budget_trajectory";
  rec.reference = "invariant set membership";
  rec.tolerance = 1e-10;
  const auto m0 = membership(traj.front().f, budget);
  double sup_m8 = 0.0, sup_ws = 0.0, worst_e = 0.0;
  bool all = true;
  for (const auto& s : traj) {
    const auto m = membership(s.f, budget);
    all = all && m.energy && m.eighth && m.sup;
    sup_m8 = std::max(sup_m8, m.m8);
    sup_ws = std::max(sup_ws, m.ws);
    if (budget.h3 > 0.0) worst_e = std::max(worst_e, std::abs(m.m3 - budget.h3) / budget.h3);
  }
  const double per_c = 2.0 / c8t * std::pow(budget.h3, 2.25) +
                       kappa0 / budget.delta * std::pow(budget.h3, 3.5);
  const bool initial = m0.energy && m0.eighth && m0.sup;
  rec.passed = initial && all;
  rec.measured = {{"sup_m8", sup_m8},
                  {"sup_weighted_sup", sup_ws},
                  {"max_energy_drift", worst_e},
                  {"min_passing_C8t", per_c > 0.0 ? sup_m8 / per_c : 0.0}};
  rec.bounds = {{"h3", budget.h3}, {"h8", budget.h8}, {"h_inf", budget.h_inf}};
  if (!initial) rec.note = "initial state is not in the budget set";
  return rec;
}

}  // namespace bpk
