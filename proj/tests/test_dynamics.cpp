#include <cmath>
#include <numbers>
#include <random>

#include "bpk/diagnostics.hpp"
#include "bpk/dynamics.hpp"
#include "bpk/errors.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace bpk;
using bpk::test::bose_einstein;

namespace {

constexpr double kPi = std::numbers::pi;

double max_rel_diff(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return num / den;
}

SimState run_fixed(const SimState& s0, const CollisionTables& t, double kappa0, double dt,
                   int steps) {
  StepControl c;
  SimState s = s0;
  for (int i = 0; i < steps; ++i) s = step(s, dt, t, kappa0, c).state;
  return s;
}

}  // namespace

TEST_CASE("physical constants") {
  const PhysicalParams p(1.0, 1.0);
  CHECK(p.kappa0() == doctest::Approx(9.0 / (64.0 * kPi * kPi)).epsilon(1e-15));
  CHECK(PhysicalParams::kappa0_for(2.0) == doctest::Approx(p.kappa0() / 2).epsilon(1e-15));
  CHECK_THROWS_AS(PhysicalParams(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(PhysicalParams(1.0, -1.0), DomainError);
  CHECK_THROWS_AS(PhysicalParams(1.0, 1.0, 0.0), DomainError);
  CHECK_FALSE(cold_gas_ratio(p, 1.0).has_value());
  CHECK(*cold_gas_ratio(PhysicalParams(1.0, 1.0, 0.1), 4.0) == doctest::Approx(0.05));
}

TEST_CASE("dispersion laws") {
  const PhysicalParams p(1.0, 1.0);
  CHECK(dispersion_bogoliubov(0.0, p, 1.0) == 0.0);
  CHECK(dispersion_bogoliubov(3.0, p, 0.0) == doctest::Approx(4.5));
  CHECK(dispersion_bogoliubov(2.0, p, 1.0) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-15));
  CHECK(dispersion_phonon(3.0, p, 4.0) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(dispersion_phonon(3.0, p, 0.0) == 0.0);
  const double n_c = 2.0;
  const double q = 0.01 * 2.0 * std::sqrt(p.g() * n_c * p.m());
  const double rel = std::abs(dispersion_phonon(q, p, n_c) - dispersion_bogoliubov(q, p, n_c)) /
                     dispersion_bogoliubov(q, p, n_c);
  // leading series term of the relative gap
  CHECK(rel == doctest::Approx(q * q / (8.0 * p.g() * n_c * p.m())).epsilon(1e-3));
}

TEST_CASE("transition probability") {
  const PhysicalParams p(1.0, 1.0);
  CHECK(transition_probability(0.0, 1.0, 1.0, p, 1.0) == 0.0);
  CHECK(transition_probability(1.0, 1.0, 1.0, p, 1.0) ==
        doctest::Approx(9.0 / (64.0 * kPi * kPi)).epsilon(1e-15));
  CHECK(transition_probability(1.0, 2.0, 3.0, p, 2.0) ==
        doctest::Approx(transition_probability(1.0, 2.0, 3.0, p, 1.0) * std::pow(2.0, -1.5))
            .epsilon(1e-14));
  CHECK_THROWS_AS(transition_probability(1.0, 1.0, 1.0, p, 0.0), SingularCondensate);
}

TEST_CASE("coupled right-hand side") {
  const auto g = make_grid(64, 10.0);
  const CollisionTables t(g);
  const double k0 = PhysicalParams::kappa0_for(1.0);
  SUBCASE("zero state") {
    const auto r = coupled_rhs(make_state(RadialFunction::zero(g), 1.0), t, k0);
    for (double v : r.dfdt) CHECK(v == 0.0);
    CHECK(r.dncdt == 0.0);
  }
  SUBCASE("equilibrium") {
    const auto be = bose_einstein(make_grid(64, 25.0), 1.0);
    const CollisionTables tb(be.grid_ptr());
    const auto r = coupled_rhs(make_state(be, 5.0), tb, k0);
    CHECK(std::abs(r.dncdt) <= 1e-12 * k0 / 5.0 * max_pair_contribution(be, tb));
  }
  SUBCASE("total mass identity") {
    std::mt19937_64 rng(12);
    const auto f = bpk::test::random_state(g, rng, 1.0, 0.2);
    const auto r = coupled_rhs(make_state(f, 3.0), t, k0);
    const double dmass = full_moment(*g, r.dfdt, 0);
    double scale = 0.0;
    for (std::size_t i = 0; i < r.dfdt.size(); ++i)
      scale += 4 * kPi * g->weight(i) * g->node(i) * g->node(i) * std::abs(r.dfdt[i]);
    CHECK(std::abs(dmass + r.dncdt) <= 1e-14 * scale);
    CHECK(std::abs(line_moment(*g, r.dfdt, 3)) <= 1e-13 * scale * 10.0);
  }
  SUBCASE("singular condensate") {
    auto s = make_state(RadialFunction::zero(g), 1.0);
    s.n_c = 0.0;
    CHECK_THROWS_AS(coupled_rhs(s, t, k0), SingularCondensate);
  }
}

TEST_CASE("closed-form condensate mass") {
  const double k0 = 0.3;
  CHECK(nc_closed_form(2.0, 0.0, k0) == 2.0);
  CHECK(nc_closed_form(2.0, 4.0 / (2 * k0), k0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(nc_closed_form(2.0, -1.0, k0) == doctest::Approx(std::sqrt(4.0 + 0.6)));
  CHECK_THROWS_AS(nc_closed_form(2.0, 10.0, k0), CondensateDepleted);
}

TEST_CASE("single RK4 step") {
  const double k0 = PhysicalParams::kappa0_for(1.0);
  SUBCASE("zero state only advances time") {
    const auto g = make_grid(32, 4.0);
    const CollisionTables t(g);
    const auto s0 = make_state(RadialFunction::zero(g), 2.0);
    const auto r = step(s0, 0.25, t, k0, StepControl{});
    CHECK(r.state.t == 0.25);
    CHECK(r.state.n_c == 2.0);
    CHECK(r.halvings == 0);
    for (std::size_t i = 0; i < g->size(); ++i) CHECK(r.state.f[i] == 0.0);
  }
  SUBCASE("equilibrium is a fixed point for 100 steps") {
    const auto g = make_grid(128, 25.0);
    const CollisionTables t(g);
    const auto be = bose_einstein(g, 1.0);
    const auto s0 = make_state(be, 10.0);
    const auto s = run_fixed(s0, t, k0, adaptive_dt(s0, t, k0, StepControl{}), 100);
    for (std::size_t i = 1; i < g->size(); ++i)
      CHECK(std::abs(s.f[i] - be[i]) <= 1e-12 * be[i]);
  }
  SUBCASE("conserves mass and energy") {
    const auto g = make_grid(64, 12.0);
    const CollisionTables t(g);
    const auto s0 = make_state(bpk::test::bump(g, 0.2, 3.0, 0.5), 50.0);
    StepControl c;
    c.dt_max = 1e9;
    const auto s = run_fixed(s0, t, k0, 0.5 * adaptive_dt(s0, t, k0, c), 200);
    CHECK(std::abs(s.total_mass() - s0.total_mass0) <= 1e-13 * s0.total_mass0);
    CHECK(std::abs(s.energy() - s0.energy0) <= 1e-13 * s0.energy0);
    CHECK(std::abs(nc_closed_form(s.n0, s.flux_integral, k0) - s.n_c) <= 1e-8 * s.n0);
  }
  SUBCASE("argument checks") {
    const auto g = make_grid(16, 4.0);
    const CollisionTables t(g);
    const auto s0 = make_state(RadialFunction::zero(g), 1.0);
    CHECK_THROWS_AS(step(s0, 0.0, t, k0, StepControl{}), DomainError);
    CHECK_THROWS_AS(step(s0, 0.1, CollisionTables(make_grid(17, 4.0)), k0, StepControl{}),
                    GridMismatch);
    CHECK_THROWS_AS(make_state(RadialFunction::zero(g), 0.0), SingularCondensate);
  }
}

TEST_CASE("positivity policies") {
  // a spike next to empty nodes with a step well above the stability limit
  const auto g = make_grid(32, 8.0);
  const CollisionTables t(g);
  std::vector<double> v(g->size(), 0.0);
  v[20] = 5.0;
  v[21] = 1.0;
  const auto s0 = make_state(RadialFunction(g, v), 1000.0);
  const double k0 = PhysicalParams::kappa0_for(1.0);
  const double dt = 10.0;

  StepControl halve;
  const auto h = step(s0, dt, t, k0, halve);
  CHECK(h.halvings > 0);
  CHECK(h.dt_used == dt / std::pow(2.0, h.halvings));
  for (double x : h.state.f.values()) CHECK(x >= 0.0);
  CHECK(h.clamped_mass == 0.0);

  StepControl clamp;
  clamp.positivity = PositivityPolicy::clamp_with_ledger;
  const auto c = step(s0, dt, t, k0, clamp);
  CHECK(c.halvings == 0);
  CHECK(c.dt_used == dt);
  CHECK(c.clamped_mass != 0.0);
  for (double x : c.state.f.values()) CHECK(x >= 0.0);
  CHECK(c.state.total_mass() == doctest::Approx(s0.total_mass0).epsilon(1e-13));
  CHECK(c.state.energy() == doctest::Approx(s0.energy0).epsilon(1e-13));

  StepControl tight;
  tight.max_halvings = 0;
  CHECK_THROWS_AS(step(s0, dt, t, k0, tight), StiffnessError);
}

TEST_CASE("step control validation") {
  StepControl c;
  CHECK_NOTHROW(c.validate());
  c.safety = 0.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = StepControl{};
  c.depletion_fraction = 0.1;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = StepControl{};
  c.nc_floor = -1.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("adaptive time step") {
  const auto g = make_grid(32, 4.0);
  const CollisionTables t(g);
  const double k0 = PhysicalParams::kappa0_for(1.0);
  StepControl c;
  c.dt_max = 0.5;
  SUBCASE("zero state takes dt_max") {
    CHECK(adaptive_dt(make_state(RadialFunction::zero(g), 10.0), t, k0, c) == 0.5);
  }
  SUBCASE("monotone in f and linear in n_c") {
    c.dt_max = 1e9;
    const auto f = bpk::test::bump(g, 0.5, 2.0, 0.5);
    const auto a = adaptive_dt_candidates(make_state(f, 10.0), t, k0, c);
    const auto b = adaptive_dt_candidates(make_state(bpk::test::scaled(f, 2.0), 10.0), t, k0, c);
    const auto d = adaptive_dt_candidates(make_state(f, 20.0), t, k0, c);
    CHECK(b.chosen <= a.chosen);
    CHECK(b.relaxation <= a.relaxation);
    CHECK(d.relaxation == doctest::Approx(2.0 * a.relaxation).epsilon(1e-14));
    CHECK(a.chosen == std::min({a.relaxation, a.depletion}));
  }
  SUBCASE("depletion cap") {
    c.dt_max = 1e9;
    const auto s = make_state(bpk::test::bump(g, 0.5, 2.0, 0.5), 0.5);
    const auto dc = adaptive_dt_candidates(s, t, k0, c);
    const auto r = coupled_rhs(s, t, k0);
    CHECK(std::abs(r.dncdt) * dc.depletion ==
          doctest::Approx(c.depletion_fraction * (s.n_c - c.nc_floor)).epsilon(1e-12));
  }
}

TEST_CASE("integration driver") {
  const double k0 = PhysicalParams::kappa0_for(1.0);
  SUBCASE("lands on output times and t_end") {
    const auto g = make_grid(32, 8.0);
    const CollisionTables t(g);
    IntegrateOptions o;
    o.t_end = 3.0;
    o.output_times = {0.5, 1.25, 2.0};
    StepControl c;
    c.dt_max = 0.4;
    const auto tr = integrate(make_state(bpk::test::bump(g, 0.3, 3, 0.7), 50.0), t, k0, c, o);
    REQUIRE(tr.snapshots.size() == 5);
    CHECK(tr.snapshots[0].t == 0.0);
    CHECK(tr.snapshots[1].t == 0.5);
    CHECK(tr.snapshots[2].t == 1.25);
    CHECK(tr.snapshots[3].t == 2.0);
    CHECK(tr.snapshots[4].t == 3.0);
    CHECK(tr.snapshot_dt.size() == tr.snapshots.size());
    CHECK_FALSE(tr.stability_loss);
  }
  SUBCASE("closed-form gap shrinks with the safety factor") {
    // n_c small against the cloud: RK4 drifts off the quadratic invariant
    const auto g = make_grid(32, 8.0);
    const CollisionTables t(g);
    const auto s0 = make_state(bpk::test::bump(g, 0.3, 3, 0.7), 5.0);
    IntegrateOptions o;
    o.t_end = 3.0;
    double prev = 0.0;
    for (double safety : {0.5, 0.25, 0.125}) {
      StepControl c;
      c.dt_max = 0.4;
      c.safety = safety;
      const double gap = integrate(s0, t, k0, c, o).max_closed_form_gap;
      if (prev > 0.0) CHECK(gap < prev / 4.0);
      prev = gap;
    }
    CHECK(prev <= 1e-7);
  }
  SUBCASE("snapshot stride") {
    const auto g = make_grid(16, 4.0);
    const CollisionTables t(g);
    IntegrateOptions o;
    o.t_end = 1.0;
    o.fixed_dt = 0.05;
    o.snapshot_stride = 5;
    const auto tr =
        integrate(make_state(bpk::test::bump(g, 0.3, 2, 0.5), 5.0), t, k0, StepControl{}, o);
    CHECK(tr.steps == 20);
    CHECK(tr.snapshots.size() == 5);
    CHECK(tr.snapshots.back().t == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("depletion ends the run with a crossing time") {
    const auto g = make_grid(48, 12.0);
    const CollisionTables t(g);
    std::vector<double> v(g->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / (1.0 + std::pow(g->node(i), 4));
    IntegrateOptions o;
    o.t_end = 10.0;
    StepControl c;
    c.dt_max = 1e6;
    const auto tr = integrate(make_state(RadialFunction(g, v), 1.0), t, k0, c, o);
    CHECK(tr.stability_loss);
    CHECK(tr.crossing_time > 0.0);
    CHECK(tr.crossing_time < 10.0);
    CHECK(tr.min_nc >= c.nc_floor);
    CHECK(tr.snapshots.back().n_c - c.nc_floor <= 1e-6);
    CHECK(tr.max_closed_form_gap <= 1e-8);
  }
  SUBCASE("fixed steps crossing the floor interpolate the crossing") {
    const auto g = make_grid(48, 12.0);
    const CollisionTables t(g);
    std::vector<double> v(g->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / (1.0 + std::pow(g->node(i), 4));
    IntegrateOptions o;
    o.t_end = 1.0;
    o.fixed_dt = 1e-4;
    const auto tr = integrate(make_state(RadialFunction(g, v), 1.0), t, k0, StepControl{}, o);
    CHECK(tr.stability_loss);
    CHECK(tr.crossing_time > tr.snapshots.back().t);
    CHECK(tr.crossing_time <= tr.snapshots.back().t + 1e-4);
  }
}

TEST_CASE("RK4 self-convergence") {
  const auto g = make_grid(48, 10.0);
  const CollisionTables t(g);
  const double k0 = PhysicalParams::kappa0_for(1.0);
  const auto s0 = make_state(bpk::test::bump(g, 0.2, 3.0, 0.6), 20.0);
  StepControl c;
  c.dt_max = 1e9;
  const double h = adaptive_dt(s0, t, k0, c);
  const auto ref = run_fixed(s0, t, k0, h / 8, 256);
  const auto a = run_fixed(s0, t, k0, h, 32);
  const auto b = run_fixed(s0, t, k0, h / 2, 64);
  const double ea = max_rel_diff(a.f.values(), ref.f.values());
  const double eb = max_rel_diff(b.f.values(), ref.f.values());
  const double order = std::log2(ea / eb);
  CHECK(order == doctest::Approx(4.0).epsilon(0.3 / 4.0));
}

TEST_CASE("stability threshold") {
  CHECK(c0_constant() == doctest::Approx(1.0 / 30.0).epsilon(1e-15));
  const auto g = make_grid(256, 25.0);
  CHECK(stability_threshold(RadialFunction::zero(g), 1.0) == 0.0);

  const auto be = bose_einstein(g, 1.0);
  const double m3 = line_moment(be, 3), m4 = line_moment(be, 4);
  CHECK(m3 == doctest::Approx(std::pow(kPi, 4) / 15.0).epsilon(1e-3));
  CHECK(m4 == doctest::Approx(24.0 * 1.0369277551433699).epsilon(1e-3));
  const double inner = std::max(weighted_sup(be), 3.0 * std::max(m4, std::pow(m3, 1.25)) /
                                                      (2.0 * std::pow(1.0 / 30.0, 0.25) *
                                                       std::pow(m3, 0.75)));
  CHECK(stability_threshold(be, 1.0) == doctest::Approx(2.0 * std::sqrt(m3 * inner)).epsilon(1e-14));

  SUBCASE("zero data passes for any n0 above delta") {
    const auto r = threshold_check(RadialFunction::zero(g), 0.5, 1e-3, 1.0);
    CHECK(r.passed);
    CHECK(r.threshold == 0.0);
    CHECK(r.margin == doctest::Approx(0.5 - 1e-3).epsilon(1e-15));
  }
  SUBCASE("margin increases with n0") {
    const auto lo = threshold_check(be, 10.0, 1e-3, 1.0);
    const auto hi = threshold_check(be, 20.0, 1e-3, 1.0);
    CHECK(hi.margin > lo.margin);
    CHECK(hi.margin - lo.margin == doctest::Approx(10.0));
  }
  SUBCASE("conventions") {
    const auto a = threshold_check(be, 500.0, 1e-3, 1.0, ThresholdConvention::total_mass);
    const auto b = threshold_check(be, 500.0, 1e-3, 1.0, ThresholdConvention::line_moment);
    CHECK(a.required == doctest::Approx(4 * kPi * (a.threshold - a.m2) + 1e-3));
    CHECK(b.required == doctest::Approx(b.threshold - b.m2 + 1e-3));
  }
}
