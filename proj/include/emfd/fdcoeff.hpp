/// @file fdcoeff.hpp
/// @brief Interpolation and derivative weights for arbitrary 1D node layouts.
///
/// Weights come from the rows of the inverse of a transposed Vandermonde
/// matrix built on the node offsets from the evaluation point.  The solves
/// use the O(n^2) Bjorck-Pereyra recurrences; no dense elimination anywhere.
/// All returned rows carry the physical scaling (units m^-order), so callers
/// apply them to samples without further division by spacings.

#pragma once

#include <vector>

namespace emfd::fdcoeff {

/// A 1D evaluation point plus the surrounding nodes used for its stencil.
/// Nodes must be strictly ascending and distinct.  Derivative stencils on
/// staggered grids additionally keep the center strictly between the middle
/// pair (half_length() nodes on each side), which is what makes the system
/// well conditioned; interpolation stencils only need the center inside the
/// node hull.
struct NodeStencil {
  double center = 0.0;
  std::vector<double> nodes;

  int half_length() const { return static_cast<int>(nodes.size()) / 2; }
  /// true when exactly half the nodes lie strictly below center and half
  /// strictly above (the staggered construction)
  bool is_staggered() const;
};

/// One row of operator weights: applying `weights` to samples f(nodes[j])
/// approximates d^order f / dx^order at the stencil center.
struct WeightRow {
  std::vector<double> weights;
  int derivative_order = 0;
};

/// Dimensionless coefficients b_1..b_L of the uniform staggered first
/// derivative; the stencil weight for the node at offset (2l-1)*dx/2 is
/// b_l / ((2l-1)*dx).
struct UniformStaggeredWeights {
  std::vector<double> b;
};

/// Weight rows for derivative orders 0..max_order at the stencil center.
/// Row i is scaled by i! so it yields the plain i-th derivative.
/// Requires distinct ascending nodes and max_order < nodes.size().
std::vector<WeightRow> vandermonde_rows(const NodeStencil& stencil, int max_order);

/// Row-0 weights for evaluating f at the stencil center.  If the center
/// coincides with a node the exact 0/1 indicator row is returned without
/// solving.  The center must lie inside the node hull (no extrapolation).
WeightRow interpolation_weights(const NodeStencil& stencil);

/// Coefficients b_l of the classical staggered first-derivative operator of
/// order 2L on a uniform grid, from the L x L moment system with abscissae
/// (2i-1)^2.  Valid for 1 <= L <= 8.
UniformStaggeredWeights uniform_staggered_weights(int half_length);

/// Expand uniform staggered b coefficients into a full 2L-point derivative
/// row (ascending node order, spacing dx, centered stencil).
WeightRow uniform_staggered_row(int half_length, double dx);

/// Derivative weights at node `node_index` of a constant-ratio region,
/// obtained by scaling the region's base row by r^-node_index.  Exact for a
/// geometric grid because the stencil geometry is self-similar.
WeightRow scaled_region_weights(const WeightRow& base, double r, int node_index);

}  // namespace emfd::fdcoeff
