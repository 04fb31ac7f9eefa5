#pragma once

// Low-temperature three-wave collision operator for radial distributions.
//
// The production operator is the pair assembly: every ordered node pair
// (j, l) with j + l <= N exchanges W_jl * G_jl between node j + l and the two
// nodes j and l. Written this way the discrete weak form
//
//   sum_i q_i phi_i = sum_{j+l<=N} W_jl G_jl (phi_{j+l} - phi_j - phi_l)
//
// holds for every test vector, so phi = r (energy) is conserved to round-off
// and any sampled Bose-Einstein state is an exact fixed point.

#include <cstddef>
#include <span>
#include <vector>

#include "bpk/radial_grid.hpp"

namespace bpk {

/// Symmetric collision kernel K(x, y) = x^2 y^2 (x + y)^2.
inline double kernel(double x, double y) {
  const double s = x + y;
  return x * x * y * y * s * s;
}

/// K0(a, b, c) = a^2 b^2 c^2, so that K(x, y) = K0(x + y, x, y).
inline double kernel0(double a, double b, double c) { return a * a * b * b * c * c; }

/// Transition weight without the Jacobian, a * b * c.
inline double kernel_reduced(double a, double b, double c) { return a * b * c; }

/// Precomputed pair weights W_jl = 8 pi^2 w_j w_l K0(r_{j+l}, r_j, r_l), stored
/// row by row over the triangle {j >= 1, l >= 1, j + l <= N}.
class CollisionTables {
 public:
  explicit CollisionTables(GridPtr grid);

  const RadialGrid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }

  /// Zero when j or l is 0; throws IndexOutOfRange when j + l > N.
  double pair_weight(std::size_t j, std::size_t l) const;

  /// W_{j,1..N-j}. Row j is empty for j = 0 and j = N.
  std::span<const double> row(std::size_t j) const;
  std::size_t row_offset(std::size_t j) const { return offsets_[j]; }
  std::size_t pair_count() const noexcept { return weights_.size(); }
  std::span<const double> flat_weights() const noexcept { return weights_; }

  /// mu_i = 4 pi w_i r_i^2, the particle-count weight of node i.
  double node_mass(std::size_t i) const { return node_mass_[i]; }
  std::span<const double> node_masses() const noexcept { return node_mass_; }

 private:
  GridPtr grid_;
  std::vector<std::size_t> offsets_;
  std::vector<double> weights_;
  std::vector<double> node_mass_;
};

struct CollisionOutput {
  /// q_i: particles per unit time entering node i (no kappa0 / n_c prefactor).
  std::vector<double> rate;
  /// q_i / mu_i for i >= 1; zero at the inert node 0.
  std::vector<double> point_rate;
};

/// G_jl = f_j f_l - f_j f_{j+l} - f_l f_{j+l} - f_{j+l}.
double collision_bracket(const RadialFunction& f, std::size_t j, std::size_t l);

/// Pair assembly of the operator. `workers` partitions the pair loop; the
/// result is bitwise identical for every worker count.
CollisionOutput apply_pair(const RadialFunction& f, const CollisionTables& tables,
                           unsigned workers = 1);

/// Raw form used inside the integrator, where stage values may be slightly
/// negative. Writes q into `rate`.
void apply_pair_raw(std::span<const double> f, const CollisionTables& tables,
                    std::span<double> rate, unsigned workers = 1);

/// Line-density value (Q_q + L)(r_i) from the twelve strong-form terms
/// (nine quadratic, three linear), evaluated with pair-consistent trapezoid
/// weights. sum_i w_i S_i phi_i reproduces the pair pairing.
std::vector<double> apply_strong(const RadialFunction& f);

/// The twelve strong-form terms at one node, in the order B1..B9, L1..L3.
std::vector<double> strong_terms(const RadialFunction& f, std::size_t i);

/// Collision frequency in line-density normalization:
///   nu_i = 2 sum_j w_j K(r_j, r_i) f_j + 2 sum_{j<i} w K(r_j, r_i - r_j) f_j
///          + sum_{j<i} w K(r_j, r_i - r_j),
/// with the same pair-consistent weights as the assembly.
std::vector<double> loss_frequency(const RadialFunction& f);
std::vector<double> loss_frequency_raw(const RadialGrid& grid, std::span<const double> f);

/// Pointwise attenuation rate nu_hat_i = 8 pi^2 nu_i / (4 pi r_i^2), the factor
/// multiplying f_i in df_i/dt (up to kappa0 / n_c). Zero at node 0.
std::vector<double> collision_frequency(const RadialFunction& f);
std::vector<double> collision_frequency_raw(const RadialGrid& grid, std::span<const double> f);

/// Pointwise gain Q+_i = point_rate_i + f_i nu_hat_i.
std::vector<double> gain(const RadialFunction& f, const CollisionTables& tables);

/// sum_{j+l<=N} W_jl G_jl (phi_{j+l} - phi_j - phi_l), the discrete
/// integral of Q[f] phi over R^3.
double weak_pairing(const RadialFunction& f, std::span<const double> phi,
                    const CollisionTables& tables);

/// Same pairing restricted to the quadratic or the linear part of G.
double weak_pairing_quadratic(const RadialFunction& f, std::span<const double> phi,
                              const CollisionTables& tables);
double weak_pairing_linear(const RadialFunction& f, std::span<const double> phi,
                           const CollisionTables& tables);

enum class LogFloor { reject, floor };

struct DissipationSummary {
  double total = 0.0;        ///< D = -weak_pairing(f, log(f / (1 + f)))
  double min_summand = 0.0;  ///< smallest per-pair contribution
  double scale = 0.0;        ///< magnitude of the largest pair term, for round-off bounds
};

/// Entropy dissipation D >= 0. With LogFloor::reject a non-positive value at
/// nodes 1..N raises DomainError naming the node; LogFloor::floor clamps at
/// 1e-300 before taking logarithms.
double entropy_dissipation(const RadialFunction& f, const CollisionTables& tables,
                           LogFloor policy = LogFloor::reject);
DissipationSummary dissipation_summands(const RadialFunction& f,
                                        const CollisionTables& tables,
                                        LogFloor policy = LogFloor::reject);

/// max_{pairs} W_jl (f_j f_l + f_{j+l} (1 + f_j + f_l)); the size of the
/// largest single pair contribution, used to judge round-off residuals.
double max_pair_contribution(const RadialFunction& f, const CollisionTables& tables);

}  // namespace bpk
