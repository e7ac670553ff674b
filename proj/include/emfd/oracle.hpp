/// @file oracle.hpp
/// @brief Analytic whole-space diffusive dipole field and amplitude/phase
/// error metrics against a reference solution.

#pragma once

#include <array>
#include <complex>
#include <optional>
#include <vector>

namespace emfd::oracle {

struct WholeSpaceParams {
  double sigma = 1.0;   // S/m, isotropic
  double mu = 1.2566370614359173e-6;
  double omega = 1.0;   // rad/s
  double moment = 1.0;  // A m
  std::array<double, 3> source{0.0, 0.0, 0.0};
  std::array<double, 3> receiver{0.0, 0.0, 0.0};
};

/// Frequency-domain E field of an x-directed electric dipole in a
/// homogeneous conductive whole space (time convention exp(-i w t),
/// diffusive wavenumber k^2 = i w mu sigma, k = (1+i)/skin_depth).
std::array<std::complex<double>, 3> wholespace_E(const WholeSpaceParams& p);

/// Same field assembled from Richardson-extrapolated numerical derivatives
/// of the scalar potential exp(ikr)/(4 pi r); independent of the closed-form
/// dyadic algebra and used to certify it.
std::array<std::complex<double>, 3> wholespace_E_numeric(const WholeSpaceParams& p);

double skin_depth(double rho, double freq_hz, double mu = 1.2566370614359173e-6);

struct AmplitudePhaseError {
  double ratio = 0.0;       // |fd| / |ref|
  double dphase_deg = 0.0;  // wrapped to (-180, 180]
};

/// Per-receiver amplitude ratio and phase difference in degrees.  Receivers
/// with a vanishing reference value are flagged (nullopt) and excluded.
std::vector<std::optional<AmplitudePhaseError>> amplitude_phase_errors(
    const std::vector<std::complex<double>>& fd_values,
    const std::vector<std::complex<double>>& ref_values);

}  // namespace emfd::oracle
