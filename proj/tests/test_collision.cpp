#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "bpk/collision.hpp"
#include "bpk/errors.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace bpk;
using bpk::test::bose_einstein;

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("kernel values") {
  CHECK(kernel(1, 1) == 4.0);
  CHECK(kernel(5.5, 0) == 0.0);
  CHECK(kernel(2, 3) == 900.0);
  CHECK(kernel0(5, 2, 3) == kernel(2, 3));
  CHECK(kernel_reduced(2, 3, 4) == 24.0);
}

TEST_CASE("collision bracket") {
  SUBCASE("zero state") {
    const auto g = make_grid(8, 4.0);
    const auto z = RadialFunction::zero(g);
    CHECK(collision_bracket(z, 2, 3) == 0.0);
  }
  SUBCASE("Bose-Einstein identity at r = ln 2") {
    const auto g = make_grid(8, 8.0 * std::numbers::ln2);
    const auto be = bose_einstein(g, 1.0);
    CHECK(be[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(be[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(std::abs(collision_bracket(be, 1, 1)) < 1e-15);
  }
  SUBCASE("arithmetic") {
    const auto g = make_grid(4, 4.0);
    CHECK(collision_bracket(RadialFunction(g, {0, 2, 3, 1, 0}), 1, 2) == 0.0);
    CHECK(collision_bracket(RadialFunction(g, {0, 2, 3, 2, 0}), 1, 2) == -6.0);
    CHECK_THROWS_AS(collision_bracket(RadialFunction(g, {0, 2, 3, 2, 0}), 2, 3), IndexOutOfRange);
  }
}

TEST_CASE("pair weights") {
  const auto g = make_grid(16, 4.0);
  const CollisionTables t(g);
  CHECK(t.pair_weight(0, 5) == 0.0);
  CHECK(t.pair_weight(5, 0) == 0.0);
  CHECK_THROWS_AS(t.pair_weight(9, 8), IndexOutOfRange);
  const double w = 8 * kPi * kPi * g->weight(3) * g->weight(5) *
                   kernel0(g->node(8), g->node(3), g->node(5));
  CHECK(t.pair_weight(3, 5) == doctest::Approx(w).epsilon(1e-15));
  CHECK(t.pair_weight(3, 5) == t.pair_weight(5, 3));
  CHECK(t.row(0).empty());
  CHECK(t.row(16).empty());
  CHECK(t.row(1).size() == 15);
  CHECK(t.pair_count() == 15 * 16 / 2);
  CHECK(t.node_mass(4) == doctest::Approx(4 * kPi * g->weight(4) * 1.0).epsilon(1e-15));
}

TEST_CASE("pair assembly") {
  SUBCASE("zero state") {
    const auto g = make_grid(32, 8.0);
    const CollisionTables t(g);
    const auto q = apply_pair(RadialFunction::zero(g), t);
    CHECK(max_abs(q.rate) == 0.0);
  }
  SUBCASE("Bose-Einstein is annihilated") {
    for (double alpha : {0.5, 1.0, 2.0}) {
      const auto g = make_grid(128, 25.0);
      const CollisionTables t(g);
      const auto be = bose_einstein(g, alpha);
      const auto q = apply_pair(be, t);
      CHECK(max_abs(q.rate) <= 1e-12 * max_pair_contribution(be, t));
    }
  }
  SUBCASE("energy pairing vanishes") {
    std::mt19937_64 rng(11);
    const auto g = make_grid(96, 12.0);
    const CollisionTables t(g);
    for (int s = 0; s < 5; ++s) {
      const auto f = bpk::test::random_state(g, rng);
      const auto q = apply_pair(f, t);
      double sum = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < q.rate.size(); ++i) {
        sum += q.rate[i] * g->node(i);
        scale += std::abs(q.rate[i]) * g->node(i);
      }
      CHECK(std::abs(sum) <= 1e-13 * scale);
    }
  }
  SUBCASE("bitwise identical across worker counts") {
    std::mt19937_64 rng(3);
    const auto g = make_grid(101, 10.0);
    const CollisionTables t(g);
    const auto f = bpk::test::random_state(g, rng);
    const auto ref = apply_pair(f, t, 1);
    for (unsigned w : {2u, 3u, 7u, 64u}) {
      const auto q = apply_pair(f, t, w);
      CHECK(q.rate == ref.rate);
      CHECK(q.point_rate == ref.point_rate);
    }
  }
  SUBCASE("point rate and grid checks") {
    const auto g = make_grid(16, 4.0);
    const CollisionTables t(g);
    std::mt19937_64 rng(5);
    const auto f = bpk::test::random_state(g, rng);
    const auto q = apply_pair(f, t);
    CHECK(q.point_rate[0] == 0.0);
    CHECK(q.point_rate[5] == doctest::Approx(q.rate[5] / t.node_mass(5)).epsilon(1e-15));
    CHECK_THROWS_AS(apply_pair(RadialFunction::zero(make_grid(17, 4.0)), t), GridMismatch);
  }
}

TEST_CASE("strong form") {
  SUBCASE("zero state") {
    const auto s = apply_strong(RadialFunction::zero(make_grid(20, 5.0)));
    CHECK(max_abs(s) == 0.0);
  }
  SUBCASE("Bose-Einstein residual is round-off") {
    const auto g = make_grid(256, 25.0);
    const auto be = bose_einstein(g, 1.0);
    double worst = 0.0;
    for (std::size_t i = 1; i < be.size(); ++i) {
      const auto terms = strong_terms(be, i);
      REQUIRE(terms.size() == 12);
      double sum = 0.0, scale = 0.0;
      for (double x : terms) {
        sum += x;
        scale = std::max(scale, std::abs(x));
      }
      if (scale > 0.0) worst = std::max(worst, std::abs(sum) / scale);
    }
    CHECK(worst <= 1e-10);
  }
  SUBCASE("weak pairing matches the pair assembly") {
    std::mt19937_64 rng(19);
    const auto g = make_grid(64, 10.0);
    const CollisionTables t(g);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int s = 0; s < 5; ++s) {
      const auto f = bpk::test::random_state(g, rng);
      const auto q = apply_pair(f, t);
      const auto strong = apply_strong(f);
      std::vector<double> phi(f.size());
      for (auto& x : phi) x = u(rng);
      double a = 0.0, b = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < f.size(); ++i) {
        a += q.rate[i] * phi[i];
        b += g->weight(i) * strong[i] * phi[i];
        scale += std::abs(q.rate[i] * phi[i]);
      }
      CHECK(std::abs(a - b) <= 1e-12 * scale);
      CHECK(weak_pairing(f, phi, t) == doctest::Approx(a).epsilon(1e-10));
    }
  }
}

TEST_CASE("loss frequency") {
  SUBCASE("spontaneous decay term for f = 0") {
    const auto g = make_grid(400, 4.0);
    const auto nu = loss_frequency(RadialFunction::zero(g));
    CHECK(nu[0] == 0.0);
    for (std::size_t i : {100u, 250u, 399u}) {
      const double r = g->node(i);
      CHECK(nu[i] == doctest::Approx(std::pow(r, 7) / 30.0).epsilon(1e-4));
    }
    // the half cell at p_max doubles the pair-consistent weight
    CHECK(nu[400] == doctest::Approx(2.0 * std::pow(4.0, 7) / 30.0).epsilon(1e-4));
  }
  SUBCASE("closed-form bound on exp(-r)") {
    const auto g = make_grid(512, 30.0);
    const auto f = bpk::test::exponential(g);
    const auto nu = loss_frequency(f);
    const double m2 = 2.0, m4 = 24.0;
    CHECK(nu[0] == 0.0);
    for (std::size_t i = 1; i < nu.size(); ++i) {
      const double r = g->node(i);
      CHECK(nu[i] <= 4 * std::pow(r, 4) * m2 + 4 * r * r * m4 + 4 * std::pow(r, 7));
    }
  }
  SUBCASE("pointwise rate normalization") {
    const auto g = make_grid(32, 4.0);
    std::mt19937_64 rng(2);
    const auto f = bpk::test::random_state(g, rng);
    const auto nu = loss_frequency(f);
    const auto hat = collision_frequency(f);
    CHECK(hat[0] == 0.0);
    for (std::size_t i = 1; i < nu.size(); ++i)
      CHECK(hat[i] == doctest::Approx(2 * kPi * nu[i] / (g->node(i) * g->node(i))).epsilon(1e-14));
  }
}

TEST_CASE("gain and loss split") {
  const auto g = make_grid(128, 20.0);
  const CollisionTables t(g);
  SUBCASE("zero state") {
    CHECK(max_abs(gain(RadialFunction::zero(g), t)) == 0.0);
  }
  SUBCASE("split reproduces the point rate") {
    std::mt19937_64 rng(8);
    const auto f = bpk::test::random_state(g, rng, 2.0, 0.3);
    const auto q = apply_pair(f, t);
    const auto gp = gain(f, t);
    const auto hat = collision_frequency(f);
    for (std::size_t i = 1; i < f.size(); ++i) {
      CHECK(gp[i] >= 0.0);
      const double scale = std::max(gp[i], f[i] * hat[i]);
      CHECK(std::abs(gp[i] - f[i] * hat[i] - q.point_rate[i]) <= 1e-12 * scale);
    }
  }
  SUBCASE("detailed balance at equilibrium") {
    const auto be = bose_einstein(g, 1.0);
    const auto gp = gain(be, t);
    const auto hat = collision_frequency(be);
    for (std::size_t i = 1; i < be.size(); ++i)
      CHECK(gp[i] == doctest::Approx(be[i] * hat[i]).epsilon(1e-10));
  }
}

TEST_CASE("weak pairing") {
  const auto g = make_grid(64, 10.0);
  const CollisionTables t(g);
  std::mt19937_64 rng(4);
  const auto f = bpk::test::random_state(g, rng);
  std::vector<double> energy(g->nodes().begin(), g->nodes().end());
  std::vector<double> ones(g->size(), 1.0);
  double scale = 0.0;
  for (std::size_t j = 1; j < g->size(); ++j)
    for (std::size_t l = 1; j + l < g->size(); ++l)
      scale += std::abs(t.pair_weight(j, l) * collision_bracket(f, j, l)) * g->node(j + l);
  CHECK(std::abs(weak_pairing(f, energy, t)) <= 1e-13 * scale);

  double flux = 0.0;
  for (std::size_t j = 1; j < g->size(); ++j)
    for (std::size_t l = 1; j + l < g->size(); ++l)
      flux -= t.pair_weight(j, l) * collision_bracket(f, j, l);
  CHECK(weak_pairing(f, ones, t) == doctest::Approx(flux).epsilon(1e-12));
  CHECK(weak_pairing_quadratic(f, ones, t) + weak_pairing_linear(f, ones, t) ==
        doctest::Approx(weak_pairing(f, ones, t)).epsilon(1e-12));

  const auto be = bose_einstein(g, 0.7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> phi(g->size());
  for (auto& x : phi) x = u(rng);
  CHECK(std::abs(weak_pairing(be, phi, t)) <= 1e-13 * max_pair_contribution(be, t) * g->size());
  CHECK_THROWS_AS(weak_pairing(f, std::vector<double>(3, 1.0), t), GridMismatch);
}

TEST_CASE("entropy dissipation") {
  const auto g = make_grid(128, 25.0);
  const CollisionTables t(g);
  SUBCASE("zero at equilibrium") {
    const auto be = bose_einstein(g, 1.0);
    const auto d = dissipation_summands(be, t);
    CHECK(std::abs(d.total) <= 1e-12 * d.scale);
  }
  SUBCASE("positive off equilibrium") {
    const auto f = bpk::test::scaled(bose_einstein(g, 1.0), 1.2);
    const auto d = dissipation_summands(f, t);
    CHECK(d.total > 0.0);
    CHECK(d.min_summand >= -1e-13 * d.scale);
    CHECK(entropy_dissipation(f, t) == d.total);
  }
  SUBCASE("single pair sign algebra") {
    // f_j f_l > f_{j+l}(1 + f_j + f_l) gives a positive summand
    const auto g4 = make_grid(4, 4.0);
    const CollisionTables t4(g4);
    const RadialFunction f(g4, {0, 2, 3, 0.5, 0.1});
    CHECK(collision_bracket(f, 1, 2) > 0.0);
    const auto h = [&](std::size_t i) { return std::log(f[i] / (1 + f[i])); };
    CHECK(h(3) - h(1) - h(2) < 0.0);
    CHECK(dissipation_summands(f, t4).min_summand >= 0.0);
  }
  SUBCASE("zero samples") {
    const auto g4 = make_grid(4, 4.0);
    const CollisionTables t4(g4);
    const RadialFunction f(g4, {0, 2, 0, 0.5, 0.1});
    CHECK_THROWS_AS(entropy_dissipation(f, t4, LogFloor::reject), DomainError);
    CHECK(std::isfinite(entropy_dissipation(f, t4, LogFloor::floor)));
  }
}
