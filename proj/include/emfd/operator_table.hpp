/// @file operator_table.hpp
/// @brief Precomputed staggered first-derivative operator tables per axis.
///
/// Tables are built once at setup from Vandermonde solves (with the scaled
/// fast path inside constant-ratio regions) and are immutable afterwards,
/// so they can be shared freely across worker threads.

#pragma once

#include <vector>

#include "emfd/gridgen.hpp"

namespace emfd::kernel {

/// One direction of the staggered derivative along one axis.  Output node
/// `out` applies row(out) to 2L consecutive inputs starting at
/// out + in_shift.  Valid outputs are [out_lo, out_hi]; with an airwave
/// ghost extension the shift may reach negative (in-air) input indices.
struct DerivTable1D {
  int half_length = 1;
  int out_lo = 0;
  int out_hi = -1;
  int in_shift = 0;
  std::vector<double> w;

  const double* row(int out) const {
    return w.data() + static_cast<size_t>(out - out_lo) * 2 * half_length;
  }
  int rows() const { return out_hi - out_lo + 1; }
  bool empty() const { return out_hi < out_lo; }
  double max_abs_row_sum() const;
};

struct AxisOperators {
  DerivTable1D fwd;  // reference -> staggered outputs
  DerivTable1D bwd;  // staggered -> reference outputs
};

/// Build both derivative tables for one axis.  ghost_top > 0 extends the
/// axis upward with `ghost_top` uniform levels (airwave ghost region) and
/// widens the valid output ranges down to index 0.
AxisOperators build_axis_operators(const gridgen::Axis1D& axis, int half_length,
                                   int ghost_top = 0);

/// Largest absolute row sum over both operator directions (the discrete
/// derivative bound entering the stability condition).
double dmax(const AxisOperators& ops);

}  // namespace emfd::kernel
