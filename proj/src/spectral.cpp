#include "emfd/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace emfd::kernel {

bool is_electric(Component c) {
  return c == Component::Ex || c == Component::Ey || c == Component::Ez;
}

const char* component_name(Component c) {
  switch (c) {
    case Component::Ex: return "Ex";
    case Component::Ey: return "Ey";
    case Component::Ez: return "Ez";
    case Component::Hx: return "Hx";
    case Component::Hy: return "Hy";
    default: return "Hz";
  }
}

Component component_from_name(const std::string& name) {
  for (Component c : {Component::Ex, Component::Ey, Component::Ez, Component::Hx,
                      Component::Hy, Component::Hz})
    if (name == component_name(c)) return c;
  throw std::invalid_argument("unknown field component " + name);
}

namespace {

// 2L nearest nodes: the contiguous window whose hull contains `pos`,
// shifted to balance around the bracketing pair where the axis allows.
void window_weights(const std::vector<double>& nodes, double pos, int L,
                    int& start, std::vector<double>& w) {
  const int n = static_cast<int>(nodes.size());
  if (n < 2 * L) throw std::invalid_argument("receiver stencil does not fit axis");
  auto it = std::lower_bound(nodes.begin(), nodes.end(), pos);
  int hi = static_cast<int>(it - nodes.begin());  // first node >= pos
  start = std::clamp(hi - L, 0, n - 2 * L);
  fdcoeff::NodeStencil st;
  st.center = pos;
  st.nodes.assign(nodes.begin() + start, nodes.begin() + start + 2 * L);
  w = fdcoeff::interpolation_weights(st).weights;
}

struct ComponentLayout {
  // per axis: true if the component is staggered along it
  bool stag[3];
};

ComponentLayout layout_of(Component c) {
  switch (c) {
    case Component::Ex: return {{true, false, false}};
    case Component::Ey: return {{false, true, false}};
    case Component::Ez: return {{false, false, true}};
    case Component::Hx: return {{false, true, true}};
    case Component::Hy: return {{true, false, true}};
    default: return {{true, true, false}};
  }
}

}  // namespace

std::vector<SampleEntry> build_sample_entries(const gridgen::StaggeredGrid3D& grid,
                                              const std::vector<Receiver>& receivers,
                                              const std::vector<Component>& components) {
  const int L = grid.half_length;
  std::vector<SampleEntry> entries;
  for (int r = 0; r < static_cast<int>(receivers.size()); ++r) {
    const Receiver& rx = receivers[r];
    const double pos[3] = {rx.x, rx.y, rx.z};
    for (int a = 0; a < 3; ++a) {
      const gridgen::Axis1D& ax = grid.axis[a];
      if (pos[a] < ax.interior_min() || pos[a] > ax.interior_max())
        throw std::invalid_argument("receiver outside the interior domain");
    }
    for (Component c : components) {
      const ComponentLayout lay = layout_of(c);
      int start[3];
      std::vector<double> w[3];
      int dims[3];
      for (int a = 0; a < 3; ++a) {
        const gridgen::Axis1D& ax = grid.axis[a];
        const std::vector<double>& nodes = lay.stag[a] ? ax.stag : ax.ref;
        dims[a] = static_cast<int>(nodes.size());
        window_weights(nodes, pos[a], L, start[a], w[a]);
      }
      SampleEntry e;
      e.receiver = r;
      e.component = c;
      const int n1 = 2 * L;
      e.index.reserve(static_cast<size_t>(n1) * n1 * n1);
      e.weight.reserve(e.index.capacity());
      for (int kk = 0; kk < n1; ++kk)
        for (int jj = 0; jj < n1; ++jj)
          for (int ii = 0; ii < n1; ++ii) {
            const double weight = w[0][ii] * w[1][jj] * w[2][kk];
            const size_t idx =
                static_cast<size_t>(start[0] + ii) +
                static_cast<size_t>(dims[0]) *
                    (static_cast<size_t>(start[1] + jj) +
                     static_cast<size_t>(dims[1]) * (start[2] + kk));
            e.index.push_back(idx);
            e.weight.push_back(weight);
          }
      entries.push_back(std::move(e));
    }
  }
  return entries;
}

SpectralAccumulator::SpectralAccumulator(std::vector<double> freqs_hz, double omega0,
                                         double dt, int n_entries)
    : freqs_hz_(std::move(freqs_hz)), omega0_(omega0), dt_(dt), n_entries_(n_entries) {
  if (freqs_hz_.empty()) throw std::invalid_argument("spectral: no frequencies");
  if (!(omega0 > 0.0) || !(dt > 0.0))
    throw std::invalid_argument("spectral: omega0 and dt must be positive");
  for (size_t m = 0; m < freqs_hz_.size(); ++m) {
    if (!(freqs_hz_[m] > 0.0)) throw std::invalid_argument("spectral: frequencies must be positive");
    if (m > 0 && !(freqs_hz_[m] > freqs_hz_[m - 1]))
      throw std::invalid_argument("spectral: frequencies must ascend");
    omega_.push_back(2.0 * 3.14159265358979323846 * freqs_hz_[m]);
    const double root = std::sqrt(omega_.back() * omega0_);
    omega_prime_.push_back(std::complex<double>(root, root));  // (1+i)sqrt(w w0)
  }
  sums_.assign(static_cast<size_t>(n_entries_) * omega_.size(), {0.0, 0.0});
  snap_prev_.assign(n_entries_, {0.0, 0.0});
  snap_cur_.assign(n_entries_, {0.0, 0.0});
}

std::vector<std::complex<double>> SpectralAccumulator::phases_at(double t) const {
  std::vector<std::complex<double>> ph(omega_.size());
  for (size_t m = 0; m < omega_.size(); ++m) {
    // exp(i w' t) with w' = (1+i)s: modulus exp(-s t), rotation s t
    const double s = omega_prime_[m].real();
    ph[m] = std::polar(std::exp(-s * t) * dt_, s * t);
  }
  return ph;
}

void SpectralAccumulator::accumulate(int entry, double value,
                                     const std::vector<std::complex<double>>& phases) {
  std::complex<double>* dst = sums_.data() + static_cast<size_t>(entry) * omega_.size();
  for (size_t m = 0; m < omega_.size(); ++m) dst[m] += value * phases[m];
}

void SpectralAccumulator::checkpoint() {
  snap_prev_ = snap_cur_;
  for (int e = 0; e < n_entries_; ++e) snap_cur_[e] = sum(e, 0);
  ++n_checkpoints_;
}

double SpectralAccumulator::relative_change() const {
  double scale = 0.0;
  for (int e = 0; e < n_entries_; ++e) scale = std::max(scale, std::abs(snap_cur_[e]));
  if (scale == 0.0) return 0.0;
  // entries far below the strongest receiver are measured against a floor so
  // a pattern null cannot stall convergence
  const double floor = 1e-8 * scale;
  double worst = 0.0;
  for (int e = 0; e < n_entries_; ++e) {
    const double den = std::max(std::abs(snap_cur_[e]), floor);
    worst = std::max(worst, std::abs(snap_cur_[e] - snap_prev_[e]) / den);
  }
  return worst;
}

std::vector<std::complex<double>> waveform_spectrum(const SourceWaveform& w,
                                                    const SpectralAccumulator& acc) {
  std::vector<std::complex<double>> spec(acc.n_freq(), {0.0, 0.0});
  const double dt = acc.dt();
  const long n_end = static_cast<long>(std::ceil(w.end_time() / dt)) + 1;
  for (long n = 0; n < n_end; ++n) {
    const double t = (n + 0.5) * dt;
    const double v = w.value(t);
    const auto ph = acc.phases_at(t);
    for (int m = 0; m < acc.n_freq(); ++m) spec[m] += v * ph[m];
  }
  return spec;
}

std::vector<GreenRecord> green_functions(const SpectralAccumulator& acc,
                                         const std::vector<SampleEntry>& entries,
                                         const std::vector<std::complex<double>>& source_spectrum) {
  if (static_cast<int>(source_spectrum.size()) != acc.n_freq())
    throw std::invalid_argument("green: source spectrum size mismatch");
  double src_scale = 0.0;
  for (const auto& s : source_spectrum) src_scale = std::max(src_scale, std::abs(s));

  std::vector<GreenRecord> out;
  out.reserve(entries.size() * acc.n_freq());
  for (int e = 0; e < static_cast<int>(entries.size()); ++e) {
    const bool electric = is_electric(entries[e].component);
    for (int m = 0; m < acc.n_freq(); ++m) {
      GreenRecord rec;
      rec.receiver = entries[e].receiver;
      rec.component = entries[e].component;
      rec.freq_hz = acc.freq_hz(m);
      rec.reliable = std::abs(source_spectrum[m]) > 1e-12 * src_scale && src_scale > 0.0;
      std::complex<double> g = rec.reliable ? acc.sum(e, m) / source_spectrum[m]
                                            : std::complex<double>(0.0, 0.0);
      if (electric) {
        // sqrt(-i w / (2 w0)), principal branch: phase -pi/4 for w > 0
        const double mag = std::sqrt(acc.omega(m) / (2.0 * acc.omega0()));
        const std::complex<double> root_minus_i(std::sqrt(0.5), -std::sqrt(0.5));
        g *= mag * root_minus_i;
      }
      rec.value = g;
      out.push_back(rec);
    }
  }
  return out;
}

}  // namespace emfd::kernel
