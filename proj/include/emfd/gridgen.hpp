/// @file gridgen.hpp
/// @brief 1D axis generation (uniform + power-law stretched segments, PML
/// padding) and assembly of the 3D tensor-product staggered grid.

#pragma once

#include <string>
#include <vector>

#include "emfd/fdcoeff.hpp"

namespace emfd::gridgen {

/// A span to be covered by `intervals` geometrically growing cells whose
/// smallest cell is `min_spacing`.
struct StretchSpec {
  double span = 0.0;         // m
  double min_spacing = 0.0;  // m, first (smallest) cell
  int intervals = 0;
};

struct StretchSolve {
  double r = 1.0;
  int iterations = 0;     // fixed-point + polish steps combined
  double residual = 0.0;  // |dx*(r^n-1)/(r-1) - span| / span
  std::vector<double> iterates;  // fixed-point trace, filled when requested
};

/// Span of n geometric cells starting at dx with ratio r, evaluated as the
/// plain geometric sum (stable for r -> 1).
double geometric_span(double dx, int n, double r);

/// Solve span = dx*(r^n-1)/(r-1) for the stretch factor r >= 1.
///
/// Runs the fixed-point iteration r <- (1 + (span/dx)(r-1))^(1/n), which is
/// guaranteed convergent from any r0 > 1, then polishes the root with a few
/// safeguarded Newton steps on the span residual so the returned factor
/// reproduces the span to near round-off even in the slow regime where the
/// fixed point alone stalls (span/(n*dx) close to 1).
/// span == n*dx returns r = 1 exactly; span < n*dx is rejected.
StretchSolve solve_stretch_factor(const StretchSpec& spec, double r0 = 1.5,
                                  double tol = 1e-12, bool trace = false);

/// ceil(ln(1 + (span/dx)(r-1)) / ln r); requires r > 1.  Approximate by
/// construction: the resulting n cells generally overshoot the span.
int estimate_interval_count(double span, double min_spacing, double r);

enum class RegionKind { Uniform, Stretched, Pml };

/// Contiguous run of cells sharing one spacing law.  cell range [begin,end).
struct Region {
  RegionKind kind = RegionKind::Uniform;
  double r = 1.0;  // spacing ratio within the region (1 for uniform/pml)
  int cell_begin = 0;
  int cell_end = 0;
};

/// Interior axis segment description, listed in ascending coordinate order.
struct AxisSegment {
  RegionKind kind = RegionKind::Uniform;  // Uniform or Stretched
  double span = 0.0;
  double spacing = 0.0;  // uniform: the cell size; stretched: the first cell
  int cells = 0;
};

struct Axis1D {
  std::vector<double> ref;    // reference nodes, ascending
  std::vector<double> stag;   // staggered nodes, midpoints of the cells
  std::vector<double> dcell;  // cell sizes ref[i+1]-ref[i]
  std::vector<Region> regions;
  int pml_lo = 0, pml_hi = 0;  // cell counts at each end

  int nref() const { return static_cast<int>(ref.size()); }
  int ncells() const { return static_cast<int>(dcell.size()); }
  int interior_node_begin() const { return pml_lo; }
  int interior_node_end() const { return nref() - pml_hi; }  // one past
  int interior_node_count() const { return interior_node_end() - interior_node_begin(); }
  double interior_min() const { return ref[interior_node_begin()]; }
  double interior_max() const { return ref[interior_node_end() - 1]; }
  /// distance between adjacent staggered nodes around reference node i
  double dual_spacing(int i) const;
  /// region owning a given cell
  const Region& region_of_cell(int cell) const;
};

/// Build one axis: interior segments appended left to right starting at
/// `origin`, then pml_lo/pml_hi equal-spacing cells copied from the adjacent
/// interior cell size on each end.  Staggered nodes are the cell midpoints.
Axis1D build_axis(double origin, const std::vector<AxisSegment>& segments,
                  int pml_lo, int pml_hi);

struct StaggeredGrid3D {
  Axis1D axis[3];  // x, y, z
  int half_length = 1;
  bool airwave = false;  // open top z face, interface at the first z node

  const Axis1D& x() const { return axis[0]; }
  const Axis1D& y() const { return axis[1]; }
  const Axis1D& z() const { return axis[2]; }

  /// stencil of the forward derivative (reference -> staggered) at staggered
  /// output node `s` of `ax`
  fdcoeff::NodeStencil forward_stencil(int ax, int s) const;
  /// stencil of the backward derivative (staggered -> reference) at
  /// reference output node `i` of `ax`
  fdcoeff::NodeStencil backward_stencil(int ax, int i) const;
};

/// Assemble the tensor grid and verify every axis can host full 2L stencils.
/// With airwave active the z axis must have no top PML and its first node is
/// the air interface.
StaggeredGrid3D assemble_grid(Axis1D ax, Axis1D ay, Axis1D az, int half_length,
                              bool airwave);

/// One reference-node coordinate per line (plotting/debugging sidecar).
void write_axis_sidecar(const Axis1D& axis, const std::string& path);

}  // namespace emfd::gridgen
