#include "bpk/radial_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bpk/errors.hpp"

namespace bpk {

RadialGrid::RadialGrid(std::size_t intervals, double p_max)
    : intervals_(intervals), p_max_(p_max) {
  if (intervals < 2) throw DomainError("grid needs at least 2 intervals");
  if (!(p_max > 0.0) || !std::isfinite(p_max))
    throw DomainError("grid p_max must be a positive finite number");
  spacing_ = p_max / static_cast<double>(intervals);
  nodes_.resize(intervals + 1);
  weights_.assign(intervals + 1, spacing_);
  for (std::size_t i = 0; i <= intervals; ++i)
    nodes_[i] = static_cast<double>(i) * spacing_;
  weights_.front() = 0.5 * spacing_;
  weights_.back() = 0.5 * spacing_;
  p_max_ = nodes_.back();
}

GridPtr make_grid(std::size_t intervals, double p_max) {
  return std::make_shared<const RadialGrid>(intervals, p_max);
}

RadialFunction::RadialFunction(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw DomainError("radial function needs a grid");
  if (values_.size() != grid_->size())
    throw GridMismatch("radial function has " + std::to_string(values_.size()) +
                       " samples, grid has " + std::to_string(grid_->size()) +
                       " nodes");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] >= 0.0) || !std::isfinite(values_[i]))
      throw DomainError("radial function value at node " + std::to_string(i) +
                        " is negative or not finite");
  }
}

RadialFunction RadialFunction::zero(GridPtr grid) {
  const std::size_t n = grid->size();
  return RadialFunction(std::move(grid), std::vector<double>(n, 0.0));
}

void require_same_grid(const RadialGrid& a, const RadialGrid& b) {
  if (!a.same_as(b)) throw GridMismatch("operands live on different grids");
}

double line_moment(const RadialGrid& grid, std::span<const double> f, int k) {
  if (k < 0) throw DomainError("moment order must be nonnegative");
  if (f.size() != grid.size()) throw GridMismatch("sample count does not match grid");
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double r = grid.node(i);
    sum += grid.weight(i) * f[i] * (k == 0 ? 1.0 : std::pow(r, k));
  }
  return sum;
}

double line_moment(const RadialFunction& f, int k) {
  return line_moment(f.grid(), f.values(), k);
}

double full_moment(const RadialGrid& grid, std::span<const double> f, int k) {
  return 4.0 * M_PI * line_moment(grid, f, k + 2);
}

double full_moment(const RadialFunction& f, int k) {
  return full_moment(f.grid(), f.values(), k);
}

double weighted_sup(const RadialGrid& grid, std::span<const double> f) {
  double best = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double r = grid.node(i);
    best = std::max(best, f[i] * r * r);
  }
  return best;
}

double weighted_sup(const RadialFunction& f) { return weighted_sup(f.grid(), f.values()); }

double boundary_mass(const RadialFunction& f) {
  const double r = f.grid().nodes().back();
  return f.values().back() * r * r;
}

}  // namespace bpk
