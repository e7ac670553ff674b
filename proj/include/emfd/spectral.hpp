/// @file spectral.hpp
/// @brief On-the-fly complex-frequency transforms at receiver positions and
/// Green's-function normalization.
///
/// Each requested angular frequency w maps to the complex frequency
/// w' = (1+i)*sqrt(w*w0); the transform sum(value * exp(i w' t) * dt) damps
/// late arrivals exponentially.  Electric samples are taken at integer
/// steps, magnetic samples and the source waveform at half steps, matching
/// the leapfrog time centering.

#pragma once

#include <complex>
#include <string>
#include <vector>

#include "emfd/field3.hpp"
#include "emfd/gridgen.hpp"
#include "emfd/source.hpp"

namespace emfd::kernel {

enum class Component { Ex, Ey, Ez, Hx, Hy, Hz };

bool is_electric(Component c);
const char* component_name(Component c);
Component component_from_name(const std::string& name);

struct Receiver {
  double x = 0.0, y = 0.0, z = 0.0;
};

/// Tensor-product interpolation rows for sampling one field component at
/// one receiver: flattened (2L)^3 stencil indices into the component array
/// plus weights.  Built once, reused every step.
struct SampleEntry {
  int receiver = 0;
  Component component = Component::Ex;
  std::vector<size_t> index;
  std::vector<double> weight;

  double sample(const Field3& f) const {
    double v = 0.0;
    for (size_t m = 0; m < index.size(); ++m) v += weight[m] * f[index[m]];
    return v;
  }
};

/// Build sample entries for every (receiver, component) pair.  Receivers
/// must lie inside the interior (non-PML) domain.
std::vector<SampleEntry> build_sample_entries(const gridgen::StaggeredGrid3D& grid,
                                              const std::vector<Receiver>& receivers,
                                              const std::vector<Component>& components);

class SpectralAccumulator {
 public:
  SpectralAccumulator() = default;
  SpectralAccumulator(std::vector<double> freqs_hz, double omega0, double dt,
                      int n_entries);

  int n_freq() const { return static_cast<int>(omega_.size()); }
  int n_entries() const { return n_entries_; }
  double dt() const { return dt_; }
  double omega0() const { return omega0_; }
  double omega(int m) const { return omega_[m]; }
  double freq_hz(int m) const { return freqs_hz_[m]; }
  std::complex<double> omega_prime(int m) const { return omega_prime_[m]; }

  /// Add value(t)*exp(i w' t)*dt for all frequencies to one entry's sums.
  void accumulate(int entry, double value, const std::vector<std::complex<double>>& phases);
  /// Phase factors exp(i w'_m t)*dt for the current sample time.
  std::vector<std::complex<double>> phases_at(double t) const;

  std::complex<double> sum(int entry, int m) const {
    return sums_[static_cast<size_t>(entry) * omega_.size() + m];
  }

  /// Snapshot the lowest-frequency sums; relative_change compares against
  /// the previous snapshot.  The lowest frequency is the least damped and
  /// therefore the last to reach steady state.
  void checkpoint();
  int checkpoints() const { return n_checkpoints_; }
  double relative_change() const;

 private:
  std::vector<double> freqs_hz_, omega_;
  std::vector<std::complex<double>> omega_prime_;
  double omega0_ = 0.0, dt_ = 0.0;
  int n_entries_ = 0;
  std::vector<std::complex<double>> sums_;
  std::vector<std::complex<double>> snap_prev_, snap_cur_;
  int n_checkpoints_ = 0;
};

/// Source waveform spectrum with the same half-step convention as the
/// magnetic accumulation: sum over n of w((n+1/2)dt)*exp(i w'(n+1/2)dt)*dt.
std::vector<std::complex<double>> waveform_spectrum(const SourceWaveform& w,
                                                    const SpectralAccumulator& acc);

struct GreenRecord {
  int receiver = 0;
  Component component = Component::Ex;
  double freq_hz = 0.0;
  std::complex<double> value;
  bool reliable = true;
};

/// Normalize accumulated spectra by the source spectrum.  Electric entries
/// carry the extra factor sqrt(-i w/(2 w0)) (principal branch, phase -pi/4
/// for w > 0); magnetic entries are the raw ratio.  Frequencies whose
/// source spectrum is vanishingly small are flagged unreliable.
std::vector<GreenRecord> green_functions(const SpectralAccumulator& acc,
                                         const std::vector<SampleEntry>& entries,
                                         const std::vector<std::complex<double>>& source_spectrum);

}  // namespace emfd::kernel
