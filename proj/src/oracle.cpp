#include "emfd/oracle.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace emfd::oracle {

namespace {

using cplx = std::complex<double>;

cplx scalar_green(const WholeSpaceParams& p, double x, double y, double z) {
  const double r = std::sqrt(x * x + y * y + z * z);
  const double delta = std::sqrt(2.0 / (p.omega * p.mu * p.sigma));
  const cplx ik = cplx(-1.0, 1.0) / delta;  // i*k with k = (1+i)/delta
  return std::exp(ik * r) / (4.0 * std::numbers::pi * r);
}

}  // namespace

double skin_depth(double rho, double freq_hz, double mu) {
  return std::sqrt(2.0 * rho / (2.0 * std::numbers::pi * freq_hz * mu));
}

std::array<cplx, 3> wholespace_E(const WholeSpaceParams& p) {
  const double dx = p.receiver[0] - p.source[0];
  const double dy = p.receiver[1] - p.source[1];
  const double dz = p.receiver[2] - p.source[2];
  const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
  if (!(r > 0.0)) throw std::invalid_argument("oracle: receiver coincides with source");
  if (!(p.sigma > 0.0)) throw std::invalid_argument("oracle: sigma must be positive");

  const double delta = std::sqrt(2.0 / (p.omega * p.mu * p.sigma));
  const cplx k = cplx(1.0, 1.0) / delta;
  const cplx ikr = cplx(0.0, 1.0) * k * r;
  const cplx k2r2 = k * k * r * r;
  const cplx front = p.moment * std::exp(ikr) /
                     (4.0 * std::numbers::pi * p.sigma * r * r * r);
  const double u[3] = {dx / r, dy / r, dz / r};

  // E_i = front * [ (3 u_i u_x - delta_ix)(1 - ikr) + (delta_ix - u_i u_x) k^2 r^2 ]
  std::array<cplx, 3> e;
  for (int i = 0; i < 3; ++i) {
    const double dix = (i == 0) ? 1.0 : 0.0;
    e[i] = front * ((3.0 * u[i] * u[0] - dix) * (1.0 - ikr) + (dix - u[i] * u[0]) * k2r2);
  }
  return e;
}

std::array<cplx, 3> wholespace_E_numeric(const WholeSpaceParams& p) {
  const double dx = p.receiver[0] - p.source[0];
  const double dy = p.receiver[1] - p.source[1];
  const double dz = p.receiver[2] - p.source[2];
  const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
  if (!(r > 0.0)) throw std::invalid_argument("oracle: receiver coincides with source");

  const double delta = std::sqrt(2.0 / (p.omega * p.mu * p.sigma));
  const cplx k = cplx(1.0, 1.0) / delta;

  // second partials of G by central differences with Richardson extrapolation
  const auto g = [&](double a, double b, double c) { return scalar_green(p, a, b, c); };
  const auto second = [&](int i, int j) {
    const double base = 0.02 * std::min(r, delta);
    cplx est[3];
    for (int m = 0; m < 3; ++m) {
      const double h = base / std::pow(2.0, m);
      double e1[3] = {dx, dy, dz}, e2[3] = {dx, dy, dz};
      if (i == j) {
        e1[i] += h;
        e2[i] -= h;
        est[m] = (g(e1[0], e1[1], e1[2]) - 2.0 * g(dx, dy, dz) + g(e2[0], e2[1], e2[2])) /
                 (h * h);
      } else {
        cplx s = 0.0;
        for (int si = -1; si <= 1; si += 2)
          for (int sj = -1; sj <= 1; sj += 2) {
            double q[3] = {dx, dy, dz};
            q[i] += si * h;
            q[j] += sj * h;
            s += static_cast<double>(si * sj) * g(q[0], q[1], q[2]);
          }
        est[m] = s / (4.0 * h * h);
      }
    }
    // two Richardson stages for the O(h^2) central differences
    const cplx r1 = (4.0 * est[1] - est[0]) / 3.0;
    const cplx r2 = (4.0 * est[2] - est[1]) / 3.0;
    return (16.0 * r2 - r1) / 15.0;
  };

  const cplx g0 = g(dx, dy, dz);
  std::array<cplx, 3> e;
  e[0] = p.moment / p.sigma * (k * k * g0 + second(0, 0));
  e[1] = p.moment / p.sigma * second(1, 0);
  e[2] = p.moment / p.sigma * second(2, 0);
  return e;
}

std::vector<std::optional<AmplitudePhaseError>> amplitude_phase_errors(
    const std::vector<cplx>& fd_values, const std::vector<cplx>& ref_values) {
  if (fd_values.size() != ref_values.size())
    throw std::invalid_argument("oracle: receiver lists must match");
  std::vector<std::optional<AmplitudePhaseError>> out(fd_values.size());
  for (size_t i = 0; i < fd_values.size(); ++i) {
    const double aref = std::abs(ref_values[i]);
    if (aref == 0.0) continue;  // flagged, excluded
    AmplitudePhaseError e;
    e.ratio = std::abs(fd_values[i]) / aref;
    double d = std::arg(fd_values[i]) - std::arg(ref_values[i]);
    d *= 180.0 / std::numbers::pi;
    while (d > 180.0) d -= 360.0;
    while (d <= -180.0) d += 360.0;
    e.dphase_deg = d;
    out[i] = e;
  }
  return out;
}

}  // namespace emfd::oracle
