/// @file airwave.hpp
/// @brief Wavenumber-domain air-water boundary condition for the top face.
///
/// In the air half-space the quasi-static field components satisfy the
/// Laplace equation, so a horizontal plane of values continues upward by a
/// factor exp(-k_h * dz) per spectral mode, k_h = sqrt(kx^2 + ky^2).  The
/// ghost planes above the interface needed by the vertical stencils are
/// synthesized each step: horizontal E from the interface level itself and
/// horizontal H from the first staggered level below it.  The DC mode
/// passes unchanged.  Requires uniform horizontal spacing (exact-length
/// transforms, any extent).

#pragma once

#include <memory>
#include <vector>

#include "emfd/field3.hpp"
#include "emfd/gridgen.hpp"

namespace emfd::boundary {

/// Upward continuation of one horizontal plane family: n1 x n2 values
/// (first index fastest), spacings d1/d2, `levels` destination planes at
/// heights (g+1)*dz above the source plane.
class AirwavePlan {
 public:
  AirwavePlan(int n1, int n2, double d1, double d2, double dz, int levels);
  ~AirwavePlan();
  AirwavePlan(AirwavePlan&&) noexcept;
  AirwavePlan& operator=(AirwavePlan&&) noexcept;
  AirwavePlan(const AirwavePlan&) = delete;
  AirwavePlan& operator=(const AirwavePlan&) = delete;

  int levels() const;
  /// Continue src (n1*n2 values) into dst[g] for g in [0, levels).
  void continue_up(const double* src, const std::vector<double*>& dst);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Ghost-plane manager for the four horizontal components near the top
/// interface.  E ghosts live at reference levels -1..-(L-1), H ghosts at
/// staggered levels -1..-L (array index g = level-1).
class AirwaveOperator {
 public:
  AirwaveOperator(const gridgen::StaggeredGrid3D& grid);

  void refresh_e(const Field3& ex, const Field3& ey);  // from the k = 0 planes
  void refresh_h(const Field3& hx, const Field3& hy);  // from the K = 0 planes

  const double* ghost_ex(int g) const { return gex_[g].data(); }
  const double* ghost_ey(int g) const { return gey_[g].data(); }
  const double* ghost_hx(int g) const { return ghx_[g].data(); }
  const double* ghost_hy(int g) const { return ghy_[g].data(); }

 private:
  int L_;
  std::vector<std::vector<double>> gex_, gey_, ghx_, ghy_;
  std::vector<AirwavePlan> plans_;  // ex, ey, hx, hy
};

}  // namespace emfd::boundary
