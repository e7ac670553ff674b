/// @file kernel.hpp
/// @brief Leapfrog FDTD engine in the fictitious wave domain: staggered curl
/// updates via precomputed operator tables, CPML hooks, airwave ghost
/// planes, source injection, and the stability-bounded time loop.

#pragma once

#include <iosfwd>
#include <memory>
#include <utility>
#include <vector>

#include "emfd/airwave.hpp"
#include "emfd/cpml.hpp"
#include "emfd/field3.hpp"
#include "emfd/gridgen.hpp"
#include "emfd/medium.hpp"
#include "emfd/operator_table.hpp"
#include "emfd/source.hpp"
#include "emfd/spectral.hpp"

namespace emfd::kernel {

struct Tables {
  AxisOperators x, y, z;
};

/// Derivative tables for all axes; the z axis gets the airwave ghost
/// extension when the grid's top face is open.
Tables build_tables(const gridgen::StaggeredGrid3D& grid);

struct StabilityReport {
  double dmax[3] = {0.0, 0.0, 0.0};  // 1/m per axis
  double c_max = 0.0;                // m/s
  double dt_bound = 0.0;             // s
  double dt = 0.0;                   // chosen step
  double safety = 0.9;
};

/// dt_bound = 2 / (c_max * sqrt(sum dmax^2)); chosen dt = safety * bound.
StabilityReport timestep_bound(const Tables& tables, double c_max, double safety = 0.9);

struct KernelOptions {
  boundary::CpmlConfig cpml;
  double dt = 0.0;
  double f_source = 1.0;  // sets the CPML alpha grading
};

class Kernel {
 public:
  Kernel(const gridgen::StaggeredGrid3D& grid, const medium::FictitiousMedium& med,
         const Tables& tables, const KernelOptions& opt);

  void set_dipole(const DipoleSpec& dipole);
  const DipoleSpec* dipole() const { return has_dipole_ ? &dipole_ : nullptr; }

  /// H half-step update from the current E state (refreshes E ghosts first
  /// when the airwave condition is active).
  void update_h();
  /// E full-step update from the current H state; `waveform_value` is the
  /// source current at the half step being integrated over.
  void update_e(double waveform_value);
  /// One full leapfrog step n -> n+1.
  void advance(long n);

  const Field3& field(Component c) const;
  Field3& field(Component c);

  double dt() const { return dt_; }
  const gridgen::StaggeredGrid3D& grid() const { return grid_; }

  /// max |E| over all three electric arrays; finite=false on any NaN/Inf.
  double max_abs_e(bool* finite = nullptr) const;

  /// Raw curl of E at the H positions (no CPML adjustment); outputs are
  /// resized to the H component shapes.
  void curl_e(Field3& cx, Field3& cy, Field3& cz) const;
  /// Raw curl of H at the E positions.
  void curl_h(Field3& cx, Field3& cy, Field3& cz) const;

  struct DivergenceStats {
    double max_abs = 0.0;  // max |div H| over the interior margin
    double scale = 0.0;    // (sum of axis derivative bounds) * max |H|
    double relative() const { return scale > 0.0 ? max_abs / scale : 0.0; }
  };
  /// Staggered divergence of H evaluated at (I,J,K) nodes at least one
  /// stencil length inside the non-PML interior, where the tensor-product
  /// operators commute exactly.
  DivergenceStats divergence_h() const;

 private:
  void update_hx();
  void update_hy();
  void update_hz();
  void update_ex();
  void update_ey();
  void update_ez();
  void inject(double waveform_value);

  const gridgen::StaggeredGrid3D& grid_;
  Tables tables_;
  int L_;
  int nx_, ny_, nz_;  // reference node counts
  double dt_, mu_;
  bool cpml_on_ = false;

  Field3 ex_, ey_, ez_, hx_, hy_, hz_;
  Field3 cxx_, cyy_, czz_;  // dt / eps at the staggered E positions

  boundary::CpmlAxisCoeffs cx_ref_, cx_stag_, cy_ref_, cy_stag_, cz_ref_, cz_stag_;
  boundary::PsiBand psi_hx_y_, psi_hx_z_, psi_hy_z_, psi_hy_x_, psi_hz_x_, psi_hz_y_;
  boundary::PsiBand psi_ex_y_, psi_ex_z_, psi_ey_z_, psi_ey_x_, psi_ez_x_, psi_ez_y_;

  std::unique_ptr<boundary::AirwaveOperator> air_;

 public:
  struct Injection {
    size_t index;
    int i, j, k;
    double density;  // interpolation weight / node volume
  };
  const std::vector<Injection>& injections() const { return injections_; }

 private:
  bool has_dipole_ = false;
  DipoleSpec dipole_;
  std::vector<Injection> injections_;
  Field3* inject_field_ = nullptr;
  const Field3* inject_coef_ = nullptr;
};

struct TimeLoopOptions {
  long max_steps = 0;
  int cadence = 100;              // checkpoint interval in steps
  double convergence_tol = 1e-5;  // <= 0 disables early termination
  double instability_factor = 1e6;
  bool verbose = false;
};

struct TimeLoopResult {
  long steps = 0;
  bool converged = false;
  bool aborted_unstable = false;
  double wall_seconds = 0.0;
  double per_step_seconds = 0.0;
  double peak_max_e = 0.0;
  double final_max_e = 0.0;
  std::vector<std::pair<long, double>> history;  // (step, convergence metric)
};

/// Run the leapfrog loop with on-the-fly spectral accumulation, convergence
/// checking on the lowest frequency, and instability detection at every
/// checkpoint.
TimeLoopResult run_time_loop(Kernel& kernel, SpectralAccumulator& acc,
                             const std::vector<SampleEntry>& entries,
                             const TimeLoopOptions& opt, std::ostream* log = nullptr);

}  // namespace emfd::kernel
