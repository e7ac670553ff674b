#include "emfd/fdcoeff.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace emfd::fdcoeff {

namespace {

void check_nodes(const NodeStencil& s) {
  if (s.nodes.size() < 1) throw std::invalid_argument("fdcoeff: empty stencil");
  for (size_t j = 1; j < s.nodes.size(); ++j) {
    if (!(s.nodes[j] > s.nodes[j - 1]))
      throw std::invalid_argument("fdcoeff: nodes must be strictly ascending");
  }
}

// Bjorck-Pereyra solve of the polynomial-interpolation (dual Vandermonde)
// system: rows [1, t_j, t_j^2, ...] * a = f, in place.  First stage forms
// Newton divided differences, second stage converts to monomial
// coefficients about t = 0.
void dual_solve(const std::vector<double>& t, std::vector<double>& f) {
  const int n = static_cast<int>(t.size()) - 1;
  for (int k = 0; k < n; ++k)
    for (int i = n; i > k; --i)
      f[i] = (f[i] - f[i - 1]) / (t[i] - t[i - k - 1]);
  for (int k = n - 1; k >= 0; --k)
    for (int i = k; i < n; ++i)
      f[i] -= t[k] * f[i + 1];
}

// Bjorck-Pereyra solve of the primal (moment) system sum_j x_j^i z_j = b_i,
// in place.
void primal_solve(const std::vector<double>& x, std::vector<double>& b) {
  const int n = static_cast<int>(x.size()) - 1;
  for (int k = 0; k < n; ++k)
    for (int i = n; i > k; --i)
      b[i] -= x[k] * b[i - 1];
  for (int k = n - 1; k >= 0; --k) {
    for (int i = k + 1; i <= n; ++i)
      b[i] /= x[i] - x[i - k - 1];
    for (int i = k; i < n; ++i)
      b[i] -= b[i + 1];
  }
}

}  // namespace

bool NodeStencil::is_staggered() const {
  const int n = static_cast<int>(nodes.size());
  if (n < 2 || n % 2 != 0) return false;
  int below = 0, above = 0;
  for (double x : nodes) {
    if (x < center) ++below;
    else if (x > center) ++above;
    else return false;
  }
  return below == n / 2 && above == n / 2;
}

std::vector<WeightRow> vandermonde_rows(const NodeStencil& stencil, int max_order) {
  check_nodes(stencil);
  const int n = static_cast<int>(stencil.nodes.size());
  if (max_order < 0 || max_order >= n)
    throw std::invalid_argument("fdcoeff: max_order must satisfy 0 <= max_order < node count");

  std::vector<double> t(n);
  for (int j = 0; j < n; ++j) t[j] = stencil.nodes[j] - stencil.center;

  std::vector<WeightRow> rows(max_order + 1);
  for (int i = 0; i <= max_order; ++i) {
    rows[i].derivative_order = i;
    rows[i].weights.assign(n, 0.0);
  }

  // Column j of the inverse comes from one dual solve with the unit vector
  // e_j as right-hand side; a_i of that solve is w_ij.
  std::vector<double> f(n);
  for (int j = 0; j < n; ++j) {
    std::fill(f.begin(), f.end(), 0.0);
    f[j] = 1.0;
    dual_solve(t, f);
    double factorial = 1.0;
    for (int i = 0; i <= max_order; ++i) {
      if (i >= 2) factorial *= i;
      rows[i].weights[j] = factorial * f[i];
    }
  }
  return rows;
}

WeightRow interpolation_weights(const NodeStencil& stencil) {
  check_nodes(stencil);
  const int n = static_cast<int>(stencil.nodes.size());
  const double span = stencil.nodes.back() - stencil.nodes.front();
  const double tol = 1e-12 * std::max(span, 1e-300);

  for (int j = 0; j < n; ++j) {
    if (std::abs(stencil.center - stencil.nodes[j]) <= tol) {
      WeightRow row;
      row.derivative_order = 0;
      row.weights.assign(n, 0.0);
      row.weights[j] = 1.0;
      return row;
    }
  }
  if (stencil.center < stencil.nodes.front() || stencil.center > stencil.nodes.back())
    throw std::invalid_argument("fdcoeff: interpolation center outside node hull");

  return vandermonde_rows(stencil, 0).front();
}

UniformStaggeredWeights uniform_staggered_weights(int half_length) {
  if (half_length < 1 || half_length > 8)
    throw std::invalid_argument("fdcoeff: half_length must be in [1, 8]");
  std::vector<double> x(half_length), b(half_length, 0.0);
  for (int i = 0; i < half_length; ++i) {
    const double odd = 2.0 * i + 1.0;
    x[i] = odd * odd;
  }
  b[0] = 1.0;
  primal_solve(x, b);
  return UniformStaggeredWeights{std::move(b)};
}

WeightRow uniform_staggered_row(int half_length, double dx) {
  if (!(dx > 0.0)) throw std::invalid_argument("fdcoeff: dx must be positive");
  const UniformStaggeredWeights u = uniform_staggered_weights(half_length);
  WeightRow row;
  row.derivative_order = 1;
  row.weights.assign(2 * half_length, 0.0);
  for (int l = 1; l <= half_length; ++l) {
    const double w = u.b[l - 1] / ((2 * l - 1) * dx);
    row.weights[half_length + l - 1] = w;   // node at +(2l-1)dx/2
    row.weights[half_length - l] = -w;      // node at -(2l-1)dx/2
  }
  return row;
}

WeightRow scaled_region_weights(const WeightRow& base, double r, int node_index) {
  if (!(r > 0.0)) throw std::invalid_argument("fdcoeff: stretch ratio must be positive");
  WeightRow row = base;
  const double scale = std::pow(r, -static_cast<double>(node_index));
  for (double& w : row.weights) w *= scale;
  return row;
}

}  // namespace emfd::fdcoeff
