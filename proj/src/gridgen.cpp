#include "emfd/gridgen.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace emfd::gridgen {

double geometric_span(double dx, int n, double r) {
  double s = 0.0, p = 1.0;
  for (int j = 0; j < n; ++j) {
    s += p;
    p *= r;
  }
  return dx * s;
}

namespace {

// d(span)/dr
double geometric_span_dr(double dx, int n, double r) {
  double s = 0.0, p = 1.0;  // p = r^(j-1)
  for (int j = 1; j < n; ++j) {
    s += j * p;
    p *= r;
  }
  return dx * s;
}

}  // namespace

StretchSolve solve_stretch_factor(const StretchSpec& spec, double r0, double tol,
                                  bool trace) {
  const double span = spec.span, dx = spec.min_spacing;
  const int n = spec.intervals;
  if (!(dx > 0.0) || n < 1) throw std::invalid_argument("gridgen: invalid stretch spec");
  if (!(r0 > 1.0)) throw std::invalid_argument("gridgen: initial guess must exceed 1");
  const double uniform_span = n * dx;
  if (span < uniform_span * (1.0 - 1e-12))
    throw std::invalid_argument("gridgen: span shorter than n*min_spacing");

  StretchSolve out;
  // Degenerate spec: r = 1 is the exact (and only admissible) factor.  Do
  // not iterate; r = 1 is a spurious fixed point when a nontrivial root
  // exists, and the true root when it does not.
  if (std::abs(span - uniform_span) <= 1e-12 * span) {
    out.r = 1.0;
    out.residual = std::abs(uniform_span - span) / span;
    return out;
  }

  const double ratio = span / dx;
  double r = r0;
  if (trace) out.iterates.push_back(r);
  constexpr int kMaxFixedPoint = 60;
  for (int k = 0; k < kMaxFixedPoint; ++k) {
    const double rn = std::pow(1.0 + ratio * (r - 1.0), 1.0 / n);
    ++out.iterations;
    if (trace) out.iterates.push_back(rn);
    const bool done = std::abs(rn - r) < 1e-14;
    r = rn;
    if (done) break;
  }

  // Newton polish on F(r) = geometric_span(r) - span.  The fixed point is
  // globally convergent but only linearly, with rate approaching 1 as
  // span -> n*dx; Newton finishes the job in a handful of steps.
  for (int k = 0; k < 40; ++k) {
    const double F = geometric_span(dx, n, r) - span;
    if (std::abs(F) <= 0.5 * tol * span) break;
    const double dF = geometric_span_dr(dx, n, r);
    if (!(dF > 0.0)) break;
    double rn = r - F / dF;
    if (rn <= 1.0) rn = 0.5 * (r + 1.0);
    ++out.iterations;
    if (std::abs(rn - r) < 1e-16 * r) {
      r = rn;
      break;
    }
    r = rn;
  }

  out.r = r;
  out.residual = std::abs(geometric_span(dx, n, r) - span) / span;
  if (out.residual > tol)
    throw std::runtime_error("gridgen: stretch factor solve did not reach tolerance");
  return out;
}

int estimate_interval_count(double span, double min_spacing, double r) {
  if (!(r > 1.0)) throw std::invalid_argument("gridgen: interval estimate needs r > 1");
  if (!(span > 0.0) || !(min_spacing > 0.0))
    throw std::invalid_argument("gridgen: invalid span or spacing");
  return static_cast<int>(std::ceil(std::log1p(span / min_spacing * (r - 1.0)) / std::log(r)));
}

double Axis1D::dual_spacing(int i) const {
  if (i <= 0) return dcell.front();
  if (i >= ncells()) return dcell.back();
  return stag[i] - stag[i - 1];
}

const Region& Axis1D::region_of_cell(int cell) const {
  for (const Region& reg : regions)
    if (cell >= reg.cell_begin && cell < reg.cell_end) return reg;
  throw std::out_of_range("gridgen: cell outside axis");
}

Axis1D build_axis(double origin, const std::vector<AxisSegment>& segments,
                  int pml_lo, int pml_hi) {
  if (segments.empty()) throw std::invalid_argument("gridgen: no axis segments");
  if (pml_lo < 0 || pml_hi < 0) throw std::invalid_argument("gridgen: negative pml layers");

  std::vector<double> cells;
  std::vector<Region> regions;
  for (const AxisSegment& seg : segments) {
    if (seg.cells < 1 || !(seg.span > 0.0))
      throw std::invalid_argument("gridgen: segment must have positive span and cells");
    Region reg;
    reg.cell_begin = static_cast<int>(cells.size());
    if (seg.kind == RegionKind::Uniform) {
      const double d = seg.span / seg.cells;
      reg.kind = RegionKind::Uniform;
      reg.r = 1.0;
      for (int c = 0; c < seg.cells; ++c) cells.push_back(d);
    } else if (seg.kind == RegionKind::Stretched) {
      if (!(seg.spacing > 0.0))
        throw std::invalid_argument("gridgen: stretched segment needs a first cell size");
      const StretchSolve sol =
          solve_stretch_factor({seg.span, seg.spacing, seg.cells});
      reg.kind = RegionKind::Stretched;
      reg.r = sol.r;
      double d = seg.spacing;
      for (int c = 0; c < seg.cells; ++c) {
        cells.push_back(d);
        d *= sol.r;
      }
    } else {
      throw std::invalid_argument("gridgen: segments may be uniform or stretched only");
    }
    reg.cell_end = static_cast<int>(cells.size());
    regions.push_back(reg);
  }

  Axis1D axis;
  axis.pml_lo = pml_lo;
  axis.pml_hi = pml_hi;

  // PML padding copies the adjacent interior cell size.
  if (pml_lo > 0) {
    Region reg{RegionKind::Pml, 1.0, 0, pml_lo};
    axis.regions.push_back(reg);
  }
  for (Region reg : regions) {
    reg.cell_begin += pml_lo;
    reg.cell_end += pml_lo;
    axis.regions.push_back(reg);
  }
  const int n_int = static_cast<int>(cells.size());
  if (pml_hi > 0) {
    Region reg{RegionKind::Pml, 1.0, pml_lo + n_int, pml_lo + n_int + pml_hi};
    axis.regions.push_back(reg);
  }

  axis.dcell.reserve(pml_lo + n_int + pml_hi);
  for (int c = 0; c < pml_lo; ++c) axis.dcell.push_back(cells.front());
  for (double d : cells) axis.dcell.push_back(d);
  for (int c = 0; c < pml_hi; ++c) axis.dcell.push_back(cells.back());

  axis.ref.resize(axis.dcell.size() + 1);
  axis.ref[pml_lo] = origin;
  for (int i = pml_lo + 1; i < axis.nref(); ++i)
    axis.ref[i] = axis.ref[i - 1] + axis.dcell[i - 1];
  for (int i = pml_lo - 1; i >= 0; --i) axis.ref[i] = axis.ref[i + 1] - axis.dcell[i];

  axis.stag.resize(axis.ncells());
  for (int c = 0; c < axis.ncells(); ++c)
    axis.stag[c] = 0.5 * (axis.ref[c] + axis.ref[c + 1]);
  return axis;
}

fdcoeff::NodeStencil StaggeredGrid3D::forward_stencil(int ax, int s) const {
  const Axis1D& a = axis[ax];
  const int L = half_length;
  if (s - (L - 1) < 0 || s + L >= a.nref())
    throw std::out_of_range("gridgen: forward stencil does not fit");
  fdcoeff::NodeStencil st;
  st.center = a.stag[s];
  st.nodes.assign(a.ref.begin() + (s - L + 1), a.ref.begin() + (s + L + 1));
  return st;
}

fdcoeff::NodeStencil StaggeredGrid3D::backward_stencil(int ax, int i) const {
  const Axis1D& a = axis[ax];
  const int L = half_length;
  if (i - L < 0 || i + L - 1 >= a.ncells())
    throw std::out_of_range("gridgen: backward stencil does not fit");
  fdcoeff::NodeStencil st;
  st.center = a.ref[i];
  st.nodes.assign(a.stag.begin() + (i - L), a.stag.begin() + (i + L));
  return st;
}

StaggeredGrid3D assemble_grid(Axis1D ax, Axis1D ay, Axis1D az, int half_length,
                              bool airwave) {
  if (half_length < 1) throw std::invalid_argument("gridgen: half_length must be >= 1");
  StaggeredGrid3D g;
  g.axis[0] = std::move(ax);
  g.axis[1] = std::move(ay);
  g.axis[2] = std::move(az);
  g.half_length = half_length;
  g.airwave = airwave;
  for (int a = 0; a < 3; ++a) {
    if (g.axis[a].nref() < 2 * half_length + 1)
      throw std::invalid_argument("gridgen: axis too short for stencil half-length");
  }
  if (airwave && g.axis[2].pml_lo != 0)
    throw std::invalid_argument("gridgen: airwave requires no PML on the top z face");
  return g;
}

void write_axis_sidecar(const Axis1D& axis, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("gridgen: cannot write " + path);
  char buf[64];
  for (double x : axis.ref) {
    std::snprintf(buf, sizeof buf, "%.17g\n", x);
    out << buf;
  }
}

}  // namespace emfd::gridgen
