#include "emfd/operator_table.hpp"

#include <cmath>
#include <stdexcept>

namespace emfd::kernel {

double DerivTable1D::max_abs_row_sum() const {
  if (empty()) throw std::invalid_argument("operator table is empty");
  double m = 0.0;
  const int n2 = 2 * half_length;
  for (int r = 0; r < rows(); ++r) {
    double s = 0.0;
    for (int l = 0; l < n2; ++l) s += std::abs(w[static_cast<size_t>(r) * n2 + l]);
    m = std::max(m, s);
  }
  return m;
}

namespace {

// Coordinates of the (possibly ghost-extended) axis.  Index 0 maps to
// physical index -ghost.
struct ExtendedAxis {
  std::vector<double> ref, stag;
  std::vector<int> region_id;  // per cell; -1 marks ghost cells
  std::vector<double> region_r;
  int ghost = 0;

  int ncells() const { return static_cast<int>(stag.size()); }
};

ExtendedAxis extend(const gridgen::Axis1D& axis, int ghost) {
  ExtendedAxis ea;
  ea.ghost = ghost;
  const double d0 = axis.dcell.front();
  for (int g = ghost; g >= 1; --g) ea.ref.push_back(axis.ref.front() - g * d0);
  ea.ref.insert(ea.ref.end(), axis.ref.begin(), axis.ref.end());
  for (int g = ghost; g >= 1; --g) ea.stag.push_back(axis.ref.front() - (g - 0.5) * d0);
  ea.stag.insert(ea.stag.end(), axis.stag.begin(), axis.stag.end());
  for (int g = 0; g < ghost; ++g) {
    ea.region_id.push_back(-1);
    ea.region_r.push_back(1.0);
  }
  for (int c = 0; c < axis.ncells(); ++c) {
    int id = 0;
    for (int r = 0; r < static_cast<int>(axis.regions.size()); ++r) {
      if (c >= axis.regions[r].cell_begin && c < axis.regions[r].cell_end) id = r;
    }
    ea.region_id.push_back(id);
    ea.region_r.push_back(axis.regions[id].r);
  }
  return ea;
}

// All cells in [c0, c1] inside one non-ghost region -> its id, else -1.
int common_region(const ExtendedAxis& ea, int c0, int c1) {
  if (c0 < 0 || c1 >= static_cast<int>(ea.region_id.size())) return -1;
  const int id = ea.region_id[c0];
  if (id < 0) return -1;
  for (int c = c0 + 1; c <= c1; ++c)
    if (ea.region_id[c] != id) return -1;
  return id;
}

// forward: output = staggered node s, inputs ref[s-L+1 .. s+L]
// backward: output = reference node i, inputs stag[i-L .. i+L-1]
DerivTable1D build_table(const ExtendedAxis& ea, int L, bool forward) {
  DerivTable1D t;
  t.half_length = L;
  const int n2 = 2 * L;
  const int ncells = ea.ncells();
  const int nref = ncells + 1;

  int lo, hi;
  if (forward) {
    lo = (ea.ghost > 0) ? ea.ghost : L - 1;
    hi = ncells - 1 - L;  // s+L <= nref-1  ->  s <= ncells - L
    t.in_shift = -(L - 1);
  } else {
    lo = (ea.ghost > 0) ? ea.ghost : L;
    hi = nref - 1 - L;
    t.in_shift = -L;
  }
  // report ranges in physical indices
  t.out_lo = lo - ea.ghost;
  t.out_hi = hi - ea.ghost;
  if (t.empty()) throw std::invalid_argument("gridgen axis too short for operator table");
  t.w.resize(static_cast<size_t>(t.rows()) * n2);

  // Within a constant-ratio region the stencil geometry is self-similar, so
  // one solved base row serves the whole region via pure scaling.  Rows whose
  // stencil straddles a region boundary (or the ghost extension) fall back to
  // a fresh Vandermonde solve.
  int base_region = -2;
  int base_out = 0;
  std::vector<double> base_row;

  for (int out = lo; out <= hi; ++out) {
    fdcoeff::NodeStencil st;
    int c0, c1;  // cells spanned by the stencil
    if (forward) {
      st.center = ea.stag[out];
      st.nodes.assign(ea.ref.begin() + (out - L + 1), ea.ref.begin() + (out + L + 1));
      c0 = out - L + 1;
      c1 = out + L - 1;
    } else {
      st.center = ea.ref[out];
      st.nodes.assign(ea.stag.begin() + (out - L), ea.stag.begin() + (out + L));
      c0 = out - L;
      c1 = out + L - 1;
    }
    double* dst = t.w.data() + static_cast<size_t>(out - lo) * n2;

    const int reg = common_region(ea, c0, c1);
    if (reg >= 0 && reg == base_region) {
      const fdcoeff::WeightRow scaled = fdcoeff::scaled_region_weights(
          fdcoeff::WeightRow{base_row, 1}, ea.region_r[c0], out - base_out);
      for (int l = 0; l < n2; ++l) dst[l] = scaled.weights[l];
      continue;
    }
    const auto rows = fdcoeff::vandermonde_rows(st, 1);
    for (int l = 0; l < n2; ++l) dst[l] = rows[1].weights[l];
    if (reg >= 0) {
      base_region = reg;
      base_out = out;
      base_row.assign(dst, dst + n2);
    } else {
      base_region = -2;
    }
  }
  return t;
}

}  // namespace

AxisOperators build_axis_operators(const gridgen::Axis1D& axis, int half_length,
                                   int ghost_top) {
  if (half_length < 1) throw std::invalid_argument("operator table: half_length >= 1");
  const ExtendedAxis ea = extend(axis, ghost_top > 0 ? half_length : 0);
  AxisOperators ops;
  ops.fwd = build_table(ea, half_length, true);
  ops.bwd = build_table(ea, half_length, false);
  return ops;
}

double dmax(const AxisOperators& ops) {
  return std::max(ops.fwd.max_abs_row_sum(), ops.bwd.max_abs_row_sum());
}

}  // namespace emfd::kernel
