/// @file cpml.hpp
/// @brief Convolutional PML recursion coefficients per axis and node.
///
/// Standard polynomial-graded profile: sigma = sigma_max*(d/Lp)^order with
/// sigma_max set by the reflection target, alpha graded linearly from
/// alpha_max at the interior boundary to zero at the outer edge, kappa
/// graded like sigma up to kappa_max.  The memory recursion per step is
///   psi <- b*psi + a*(raw derivative),  adjusted = raw/kappa + psi,
/// with b = exp(-(sigma/kappa + alpha)*dt) and
/// a = sigma*(b-1)/(kappa*(sigma + kappa*alpha)).

#pragma once

#include <vector>

#include "emfd/gridgen.hpp"

namespace emfd::boundary {

struct CpmlConfig {
  bool enabled = true;
  int layers = 12;           // cells per absorbing face
  double r0 = 1e-3;          // reflection target
  int grading_order = 2;
  double kappa_max = 1.0;
  double alpha_scale = 1.0;  // alpha_max = alpha_scale * pi * f_source
};

/// Recursion coefficients for every output node along one axis at one
/// staggering.  Profiles are identity outside the two bands
/// [0, lo_end) and [hi_begin, n).
struct CpmlAxisCoeffs {
  int n = 0;
  int lo_end = 0;
  int hi_begin = 0;
  std::vector<double> b, a, inv_kappa;

  bool in_band(int idx) const { return idx < lo_end || idx >= hi_begin; }
};

/// Build coefficients for the axis nodes (staggered or reference positions).
/// skip_lo drops the low-side band (open top face under the airwave
/// condition).  c_ref is the fictitious-domain reference speed used for
/// sigma_max; f_source sets alpha_max.
CpmlAxisCoeffs build_cpml_coeffs(const gridgen::Axis1D& axis, bool staggered_nodes,
                                 const CpmlConfig& cfg, double c_ref, double f_source,
                                 double dt, bool skip_lo = false);

/// One memory-variable pair for a derivative term of one field component:
/// the two slabs of the component array whose derivative-axis index falls in
/// a PML band.  Slab layout matches the component array with the derivative
/// axis dimension replaced by the band width.
struct PsiBand {
  int axis = 0;
  int nx = 0, ny = 0, nz = 0;  // parent component dims
  int lo_n = 0, hi_n = 0, hi_begin = 0;
  std::vector<double> lo, hi;

  void init(int deriv_axis, const CpmlAxisCoeffs& c, int nx_, int ny_, int nz_);
  size_t lo_index(int i, int j, int k) const;  // axis coordinate < lo_n
  size_t hi_index(int i, int j, int k) const;  // axis coordinate >= hi_begin
};

}  // namespace emfd::boundary
