/// @file source.hpp
/// @brief Dipole source description and the band-limited wave-domain
/// waveform.  The diffusive result does not depend on the waveform's
/// spectral content, so the shape is chosen purely so the grid resolves it.

#pragma once

#include <array>
#include <cmath>

namespace emfd::kernel {

/// First derivative of a Gaussian; spectral peak at f_center.
struct SourceWaveform {
  double moment = 1.0;   // A m, scales the waveform
  double f_center = 1.0; // Hz
  double tau = 0.0;      // s
  double t0 = 0.0;       // s

  static SourceWaveform design(double f_center, double moment = 1.0) {
    SourceWaveform w;
    w.moment = moment;
    w.f_center = f_center;
    w.tau = 1.0 / (2.0 * 3.14159265358979323846 * f_center);
    w.t0 = 6.0 * w.tau;
    return w;
  }

  double value(double t) const {
    const double u = (t - t0) / tau;
    // peak magnitude equals `moment`
    return -moment * u * std::exp(0.5 * (1.0 - u * u));
  }
  double end_time() const { return t0 + 7.0 * tau; }
};

/// Axis-aligned electric point dipole.
struct DipoleSpec {
  std::array<double, 3> position{0.0, 0.0, 0.0};
  int axis = 0;  // 0 = x, 1 = y, 2 = z
  SourceWaveform waveform;
};

}  // namespace emfd::kernel
