#pragma once

// Uniform radial momentum grid with composite-trapezoid weights, and the
// nonnegative radial distributions that live on it.
//
// Node i sits at r_i = i * spacing, i = 0..N. Because the grid is uniform,
// r_j + r_l and r_{j+l} name the same node, which is what lets the collision
// operator move particles between nodes without interpolation.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace bpk {

class RadialGrid {
 public:
  /// `intervals` is N; the grid has N + 1 nodes spanning [0, p_max].
  RadialGrid(std::size_t intervals, double p_max);

  std::size_t intervals() const noexcept { return intervals_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  double spacing() const noexcept { return spacing_; }
  double p_max() const noexcept { return p_max_; }

  double node(std::size_t i) const { return nodes_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }
  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> weights() const noexcept { return weights_; }

  bool same_as(const RadialGrid& other) const noexcept {
    return intervals_ == other.intervals_ && spacing_ == other.spacing_;
  }

 private:
  std::size_t intervals_;
  double p_max_;
  double spacing_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

GridPtr make_grid(std::size_t intervals, double p_max);

/// Samples f_i >= 0 of a radial distribution bound to one grid.
class RadialFunction {
 public:
  /// Throws DomainError on negative or non-finite samples and GridMismatch on
  /// a length that does not match the grid.
  RadialFunction(GridPtr grid, std::vector<double> values);

  static RadialFunction zero(GridPtr grid);

  const RadialGrid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// Throws GridMismatch unless both grids describe the same nodes.
void require_same_grid(const RadialGrid& a, const RadialGrid& b);

/// m_k = sum_i w_i f_i r_i^k, the quadrature of int_0^pmax f(r) r^k dr.
double line_moment(const RadialFunction& f, int k);
double line_moment(const RadialGrid& grid, std::span<const double> f, int k);

/// Full 3D moment 4 pi m_{k+2}.
double full_moment(const RadialFunction& f, int k);
double full_moment(const RadialGrid& grid, std::span<const double> f, int k);

/// max_i f_i r_i^2.
double weighted_sup(const RadialFunction& f);
double weighted_sup(const RadialGrid& grid, std::span<const double> f);

/// f_N r_N^2, the truncation-health indicator at the domain edge.
double boundary_mass(const RadialFunction& f);

}  // namespace bpk
