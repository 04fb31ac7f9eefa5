#include "bpk/collision.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bpk/errors.hpp"
#include "parallel.hpp"

namespace bpk {

namespace {

constexpr double kEightPiSq = 8.0 * M_PI * M_PI;

void check_grid(const RadialFunction& f, const CollisionTables& t) {
  require_same_grid(f.grid(), t.grid());
}

// Pair-consistent weight of (j, i - j) seen from node i.
inline double inner_weight(const RadialGrid& g, std::size_t i, std::size_t j) {
  return g.weight(j) * g.weight(i - j) / g.weight(i);
}

}  // namespace

CollisionTables::CollisionTables(GridPtr grid) : grid_(std::move(grid)) {
  if (!grid_) throw DomainError("collision tables need a grid");
  const std::size_t n = grid_->intervals();
  const auto& g = *grid_;
  offsets_.assign(n + 1, 0);
  std::size_t total = 0;
  for (std::size_t j = 1; j < n; ++j) {
    offsets_[j] = total;
    total += n - j;
  }
  offsets_[n] = total;
  weights_.resize(total);
  for (std::size_t j = 1; j < n; ++j) {
    double* row = weights_.data() + offsets_[j];
    const double rj = g.node(j), wj = g.weight(j);
    for (std::size_t l = 1; l + j <= n; ++l)
      row[l - 1] = kEightPiSq * wj * g.weight(l) * kernel0(g.node(j + l), rj, g.node(l));
  }
  node_mass_.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.node(i);
    node_mass_[i] = 4.0 * M_PI * g.weight(i) * r * r;
  }
}

double CollisionTables::pair_weight(std::size_t j, std::size_t l) const {
  const std::size_t n = grid_->intervals();
  if (j + l > n)
    throw IndexOutOfRange("pair (" + std::to_string(j) + ", " + std::to_string(l) +
                          ") leaves the grid");
  if (j == 0 || l == 0) return 0.0;
  return weights_[offsets_[j] + l - 1];
}

std::span<const double> CollisionTables::row(std::size_t j) const {
  const std::size_t n = grid_->intervals();
  if (j > n) throw IndexOutOfRange("row index beyond the grid");
  if (j == 0 || j == n) return {};
  return std::span<const double>(weights_).subspan(offsets_[j], n - j);
}

double collision_bracket(const RadialFunction& f, std::size_t j, std::size_t l) {
  const std::size_t n = f.grid().intervals();
  if (j < 1 || l < 1 || j + l > n)
    throw IndexOutOfRange("bracket needs 1 <= j, l and j + l <= N");
  const double fj = f[j], fl = f[l], fs = f[j + l];
  return fj * fl - fj * fs - fl * fs - fs;
}

void apply_pair_raw(std::span<const double> f, const CollisionTables& tables,
                    std::span<double> rate, unsigned workers) {
  const RadialGrid& g = tables.grid();
  const std::size_t n = g.intervals();
  if (f.size() != g.size() || rate.size() != g.size())
    throw GridMismatch("apply_pair: sample count does not match grid");

  // W*G for every pair, then a gather per node in a fixed order.
  std::vector<double> wg(tables.pair_count());
  const auto weights = tables.flat_weights();
  detail::parallel_blocks(n, workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t j = std::max<std::size_t>(b, 1); j < e; ++j) {
      const std::size_t off = tables.row_offset(j);
      const double fj = f[j];
      for (std::size_t l = 1; l + j <= n; ++l) {
        const double fl = f[l], fs = f[j + l];
        wg[off + l - 1] = weights[off + l - 1] * (fj * fl - fs * (fj + fl + 1.0));
      }
    }
  });

  detail::parallel_blocks(n + 1, workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      if (i == 0) {
        rate[0] = 0.0;
        continue;
      }
      double in = 0.0;
      for (std::size_t j = 1; j < i; ++j) in += wg[tables.row_offset(j) + (i - j) - 1];
      double out = 0.0;
      if (i < n) {
        const double* row = wg.data() + tables.row_offset(i);
        for (std::size_t l = 1; l + i <= n; ++l) out += row[l - 1];
      }
      rate[i] = in - 2.0 * out;
    }
  });
}

CollisionOutput apply_pair(const RadialFunction& f, const CollisionTables& tables,
                           unsigned workers) {
  check_grid(f, tables);
  CollisionOutput out;
  out.rate.assign(f.size(), 0.0);
  apply_pair_raw(f.values(), tables, out.rate, workers);
  out.point_rate.assign(f.size(), 0.0);
  for (std::size_t i = 1; i < f.size(); ++i)
    out.point_rate[i] = out.rate[i] / tables.node_mass(i);
  return out;
}

std::vector<double> strong_terms(const RadialFunction& f, std::size_t i) {
  const RadialGrid& g = f.grid();
  const std::size_t n = g.intervals();
  if (i < 1 || i > n) throw IndexOutOfRange("strong form is defined at nodes 1..N");
  const double ri = g.node(i), fi = f[i];
  std::vector<double> t(12, 0.0);
  for (std::size_t j = 1; j < i; ++j) {
    const double w = inner_weight(g, i, j);
    const double rj = g.node(j), rm = g.node(i - j);
    t[0] += w * kernel(rj, rm) * f[j] * f[i - j];
    t[5] -= fi * w * kernel(rm, rj) * f[j];
    t[8] -= fi * w * kernel(rj, rm) * f[j];
    t[11] -= fi * w * kernel(rj, rm);
  }
  for (std::size_t l = 1; l + i <= n; ++l) {
    const double w = g.weight(l), rl = g.node(l);
    const double fs = f[i + l], fl = f[l];
    t[1] += w * kernel(rl, ri) * fs * fl;
    t[2] += w * kernel(ri, rl) * fs * fl;
    t[3] += fi * w * kernel(ri, rl) * fs;
    t[4] -= fi * w * kernel(ri, rl) * fl;
    t[6] += fi * w * kernel(rl, ri) * fs;
    t[7] -= fi * w * kernel(rl, ri) * fl;
    t[9] += w * kernel(ri, rl) * fs;
    t[10] += w * kernel(rl, ri) * fs;
  }
  for (double& v : t) v *= kEightPiSq;
  return t;
}

std::vector<double> apply_strong(const RadialFunction& f) {
  std::vector<double> s(f.size(), 0.0);
  for (std::size_t i = 1; i < f.size(); ++i) {
    double sum = 0.0;
    for (double v : strong_terms(f, i)) sum += v;
    s[i] = sum;
  }
  return s;
}

std::vector<double> loss_frequency_raw(const RadialGrid& g, std::span<const double> f) {
  const std::size_t n = g.intervals();
  if (f.size() != g.size()) throw GridMismatch("loss_frequency: sample count does not match grid");
  std::vector<double> nu(g.size(), 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    const double ri = g.node(i);
    double out = 0.0;
    for (std::size_t l = 1; l + i <= n; ++l) out += g.weight(l) * kernel(g.node(l), ri) * f[l];
    double in_f = 0.0, in_1 = 0.0;
    for (std::size_t j = 1; j < i; ++j) {
      const double wk = inner_weight(g, i, j) * kernel(g.node(j), g.node(i - j));
      in_f += wk * f[j];
      in_1 += wk;
    }
    nu[i] = 2.0 * out + 2.0 * in_f + in_1;
  }
  return nu;
}

std::vector<double> loss_frequency(const RadialFunction& f) {
  return loss_frequency_raw(f.grid(), f.values());
}

std::vector<double> collision_frequency_raw(const RadialGrid& g, std::span<const double> f) {
  std::vector<double> nu = loss_frequency_raw(g, f);
  nu[0] = 0.0;
  for (std::size_t i = 1; i < nu.size(); ++i) {
    const double r = g.node(i);
    nu[i] *= 2.0 * M_PI / (r * r);
  }
  return nu;
}

std::vector<double> collision_frequency(const RadialFunction& f) {
  return collision_frequency_raw(f.grid(), f.values());
}

std::vector<double> gain(const RadialFunction& f, const CollisionTables& tables) {
  check_grid(f, tables);
  const RadialGrid& g = f.grid();
  const std::size_t n = g.intervals();
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    const double fi = f[i];
    double in = 0.0;
    for (std::size_t j = 1; j < i; ++j) in += tables.pair_weight(j, i - j) * f[j] * f[i - j];
    double up = 0.0;
    for (std::size_t l = 1; l + i <= n; ++l)
      up += tables.pair_weight(i, l) * f[i + l] * (fi + f[l] + 1.0);
    out[i] = (in + 2.0 * up) / tables.node_mass(i);
  }
  return out;
}

namespace {

template <class Bracket>
double pairing(const RadialFunction& f, std::span<const double> phi,
               const CollisionTables& tables, Bracket bracket) {
  check_grid(f, tables);
  if (phi.size() != f.size()) throw GridMismatch("test vector does not match grid");
  const std::size_t n = f.grid().intervals();
  double sum = 0.0;
  for (std::size_t j = 1; j < n; ++j) {
    const auto row = tables.row(j);
    for (std::size_t l = 1; l + j <= n; ++l)
      sum += row[l - 1] * bracket(f[j], f[l], f[j + l]) * (phi[j + l] - phi[j] - phi[l]);
  }
  return sum;
}

}  // namespace

double weak_pairing(const RadialFunction& f, std::span<const double> phi,
                    const CollisionTables& tables) {
  return pairing(f, phi, tables, [](double a, double b, double s) {
    return a * b - a * s - b * s - s;
  });
}

double weak_pairing_quadratic(const RadialFunction& f, std::span<const double> phi,
                              const CollisionTables& tables) {
  return pairing(f, phi, tables, [](double a, double b, double s) {
    return a * b - a * s - b * s;
  });
}

double weak_pairing_linear(const RadialFunction& f, std::span<const double> phi,
                           const CollisionTables& tables) {
  return pairing(f, phi, tables, [](double, double, double s) { return -s; });
}

DissipationSummary dissipation_summands(const RadialFunction& f,
                                        const CollisionTables& tables, LogFloor policy) {
  check_grid(f, tables);
  const std::size_t n = f.grid().intervals();
  std::vector<double> h(f.size(), 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    double v = f[i];
    if (!(v > 0.0)) {
      if (policy == LogFloor::reject)
        throw DomainError("entropy dissipation needs f > 0; node " + std::to_string(i) +
                          " holds " + std::to_string(v));
      v = 1e-300;
    }
    h[i] = std::log(v) - std::log1p(v);
  }
  DissipationSummary s;
  bool first = true;
  for (std::size_t j = 1; j < n; ++j) {
    const auto row = tables.row(j);
    for (std::size_t l = 1; l + j <= n; ++l) {
      const double a = f[j], b = f[l], c = f[j + l];
      const double dh = h[j + l] - h[j] - h[l];
      const double term = -row[l - 1] * (a * b - c * (a + b + 1.0)) * dh;
      const double mag = row[l - 1] * (a * b + c * (a + b + 1.0)) *
                         (std::abs(h[j + l]) + std::abs(h[j]) + std::abs(h[l]));
      s.total += term;
      s.min_summand = first ? term : std::min(s.min_summand, term);
      s.scale = std::max(s.scale, mag);
      first = false;
    }
  }
  return s;
}

double entropy_dissipation(const RadialFunction& f, const CollisionTables& tables,
                           LogFloor policy) {
  return dissipation_summands(f, tables, policy).total;
}

double max_pair_contribution(const RadialFunction& f, const CollisionTables& tables) {
  check_grid(f, tables);
  const std::size_t n = f.grid().intervals();
  double best = 0.0;
  for (std::size_t j = 1; j < n; ++j) {
    const auto row = tables.row(j);
    for (std::size_t l = 1; l + j <= n; ++l) {
      const double a = f[j], b = f[l], c = f[j + l];
      best = std::max(best, row[l - 1] * (a * b + c * (a + b + 1.0)));
    }
  }
  return best;
}

}  // namespace bpk
