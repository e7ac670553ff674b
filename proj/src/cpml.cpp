#include "emfd/cpml.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace emfd::boundary {

CpmlAxisCoeffs build_cpml_coeffs(const gridgen::Axis1D& axis, bool staggered_nodes,
                                 const CpmlConfig& cfg, double c_ref, double f_source,
                                 double dt, bool skip_lo) {
  if (!(dt > 0.0)) throw std::invalid_argument("cpml: dt must be positive");
  const std::vector<double>& pos = staggered_nodes ? axis.stag : axis.ref;
  CpmlAxisCoeffs c;
  c.n = static_cast<int>(pos.size());
  c.b.assign(c.n, 1.0);
  c.a.assign(c.n, 0.0);
  c.inv_kappa.assign(c.n, 1.0);

  const int pml_lo = skip_lo ? 0 : axis.pml_lo;
  const int pml_hi = axis.pml_hi;
  c.lo_end = (cfg.enabled && pml_lo > 0) ? pml_lo : 0;
  c.hi_begin = (cfg.enabled && pml_hi > 0) ? c.n - pml_hi : c.n;
  if (!cfg.enabled) return c;

  const double alpha_max = cfg.alpha_scale * std::numbers::pi * f_source;

  const auto fill = [&](int begin, int end, double boundary, double depth_total) {
    if (depth_total <= 0.0) return;
    const double sigma_max =
        -(cfg.grading_order + 1) * c_ref * std::log(cfg.r0) / (2.0 * depth_total);
    for (int i = begin; i < end; ++i) {
      const double d = std::min(std::abs(pos[i] - boundary) / depth_total, 1.0);
      const double g = std::pow(d, cfg.grading_order);
      const double sigma = sigma_max * g;
      const double alpha = alpha_max * (1.0 - d);
      const double kappa = 1.0 + (cfg.kappa_max - 1.0) * g;
      c.inv_kappa[i] = 1.0 / kappa;
      c.b[i] = std::exp(-(sigma / kappa + alpha) * dt);
      const double den = kappa * (sigma + kappa * alpha);
      c.a[i] = den > 0.0 ? sigma * (c.b[i] - 1.0) / den : 0.0;
    }
  };

  if (c.lo_end > 0) {
    const double boundary = axis.ref[axis.pml_lo];
    fill(0, c.lo_end, boundary, boundary - axis.ref.front());
  }
  if (c.hi_begin < c.n) {
    const double boundary = axis.ref[axis.nref() - 1 - pml_hi];
    fill(c.hi_begin, c.n, boundary, axis.ref.back() - boundary);
  }
  return c;
}

void PsiBand::init(int deriv_axis, const CpmlAxisCoeffs& c, int nx_, int ny_, int nz_) {
  axis = deriv_axis;
  nx = nx_;
  ny = ny_;
  nz = nz_;
  lo_n = c.lo_end;
  hi_begin = c.hi_begin;
  hi_n = c.n - c.hi_begin;
  const size_t other = (axis == 0)   ? static_cast<size_t>(ny) * nz
                       : (axis == 1) ? static_cast<size_t>(nx) * nz
                                     : static_cast<size_t>(nx) * ny;
  lo.assign(static_cast<size_t>(lo_n) * other, 0.0);
  hi.assign(static_cast<size_t>(hi_n) * other, 0.0);
}

size_t PsiBand::lo_index(int i, int j, int k) const {
  switch (axis) {
    case 0: return static_cast<size_t>(i) + static_cast<size_t>(lo_n) * (j + static_cast<size_t>(ny) * k);
    case 1: return static_cast<size_t>(i) + static_cast<size_t>(nx) * (j + static_cast<size_t>(lo_n) * k);
    default: return static_cast<size_t>(i) + static_cast<size_t>(nx) * (j + static_cast<size_t>(ny) * k);
  }
}

size_t PsiBand::hi_index(int i, int j, int k) const {
  switch (axis) {
    case 0:
      return static_cast<size_t>(i - hi_begin) +
             static_cast<size_t>(hi_n) * (j + static_cast<size_t>(ny) * k);
    case 1:
      return static_cast<size_t>(i) +
             static_cast<size_t>(nx) * ((j - hi_begin) + static_cast<size_t>(hi_n) * k);
    default:
      return static_cast<size_t>(i) +
             static_cast<size_t>(nx) * (j + static_cast<size_t>(ny) * (k - hi_begin));
  }
}

}  // namespace emfd::boundary
