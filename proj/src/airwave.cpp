#include "emfd/airwave.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace emfd::boundary {

struct AirwavePlan::Impl {
  int n1 = 0, n2 = 0, levels = 0;
  fftw_complex* buf = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
  std::vector<std::vector<double>> factor;  // per level, per mode

  ~Impl() {
    if (fwd) fftw_destroy_plan(fwd);
    if (inv) fftw_destroy_plan(inv);
    if (buf) fftw_free(buf);
    if (spec) fftw_free(spec);
  }
};

AirwavePlan::AirwavePlan(int n1, int n2, double d1, double d2, double dz, int levels)
    : impl_(std::make_unique<Impl>()) {
  if (n1 < 2 || n2 < 2 || !(d1 > 0.0) || !(d2 > 0.0) || !(dz > 0.0) || levels < 1)
    throw std::invalid_argument("airwave: bad plan parameters");
  impl_->n1 = n1;
  impl_->n2 = n2;
  impl_->levels = levels;
  const size_t n = static_cast<size_t>(n1) * n2;
  impl_->buf = fftw_alloc_complex(n);
  impl_->spec = fftw_alloc_complex(n);
  // storage is first-index fastest, so FFTW sees n2 rows of length n1
  impl_->fwd = fftw_plan_dft_2d(n2, n1, impl_->buf, impl_->spec, FFTW_FORWARD, FFTW_ESTIMATE);
  impl_->inv = fftw_plan_dft_2d(n2, n1, impl_->spec, impl_->buf, FFTW_BACKWARD, FFTW_ESTIMATE);

  const double two_pi = 2.0 * std::numbers::pi;
  impl_->factor.assign(levels, std::vector<double>(n));
  for (int m2 = 0; m2 < n2; ++m2) {
    const int s2 = (m2 <= n2 / 2) ? m2 : m2 - n2;
    const double ky = two_pi * s2 / (n2 * d2);
    for (int m1 = 0; m1 < n1; ++m1) {
      const int s1 = (m1 <= n1 / 2) ? m1 : m1 - n1;
      const double kx = two_pi * s1 / (n1 * d1);
      const double kh = std::hypot(kx, ky);
      for (int g = 0; g < levels; ++g)
        impl_->factor[g][static_cast<size_t>(m1) + static_cast<size_t>(n1) * m2] =
            std::exp(-kh * (g + 1) * dz);
    }
  }
}

AirwavePlan::~AirwavePlan() = default;
AirwavePlan::AirwavePlan(AirwavePlan&&) noexcept = default;
AirwavePlan& AirwavePlan::operator=(AirwavePlan&&) noexcept = default;

int AirwavePlan::levels() const { return impl_->levels; }

void AirwavePlan::continue_up(const double* src, const std::vector<double*>& dst) {
  Impl& im = *impl_;
  const size_t n = static_cast<size_t>(im.n1) * im.n2;
  for (size_t m = 0; m < n; ++m) {
    im.buf[m][0] = src[m];
    im.buf[m][1] = 0.0;
  }
  fftw_execute(im.fwd);
  std::vector<fftw_complex> saved(n);
  for (size_t m = 0; m < n; ++m) {
    saved[m][0] = im.spec[m][0];
    saved[m][1] = im.spec[m][1];
  }
  const double norm = 1.0 / static_cast<double>(n);
  for (int g = 0; g < im.levels; ++g) {
    const std::vector<double>& f = im.factor[g];
    for (size_t m = 0; m < n; ++m) {
      im.spec[m][0] = saved[m][0] * f[m];
      im.spec[m][1] = saved[m][1] * f[m];
    }
    fftw_execute(im.inv);
    double* out = dst[g];
    for (size_t m = 0; m < n; ++m) out[m] = im.buf[m][0] * norm;
  }
}

namespace {

void require_uniform(const gridgen::Axis1D& axis, const char* name) {
  const double d0 = axis.dcell.front();
  for (double d : axis.dcell)
    if (std::abs(d - d0) > 1e-12 * d0)
      throw std::invalid_argument(std::string("airwave: ") + name +
                                  " axis must be uniform for the wavenumber transform");
}

}  // namespace

AirwaveOperator::AirwaveOperator(const gridgen::StaggeredGrid3D& grid) : L_(grid.half_length) {
  if (!grid.airwave) throw std::invalid_argument("airwave: grid has no open top face");
  require_uniform(grid.x(), "x");
  require_uniform(grid.y(), "y");
  const gridgen::Axis1D& gz = grid.z();
  const double dz = gz.dcell.front();
  for (int c = 0; c < std::min(L_, gz.ncells()); ++c)
    if (std::abs(gz.dcell[c] - dz) > 1e-12 * dz)
      throw std::invalid_argument("airwave: top z cells must be uniform over the stencil depth");

  const int nx = grid.x().nref(), ny = grid.y().nref();
  const double dx = grid.x().dcell.front(), dy = grid.y().dcell.front();

  const int ne = L_ - 1;  // E ghost levels
  const int nh = L_;      // H ghost levels
  gex_.assign(std::max(ne, 0), std::vector<double>(static_cast<size_t>(nx - 1) * ny, 0.0));
  gey_.assign(std::max(ne, 0), std::vector<double>(static_cast<size_t>(nx) * (ny - 1), 0.0));
  ghx_.assign(nh, std::vector<double>(static_cast<size_t>(nx) * (ny - 1), 0.0));
  ghy_.assign(nh, std::vector<double>(static_cast<size_t>(nx - 1) * ny, 0.0));

  if (ne > 0) {
    plans_.emplace_back(nx - 1, ny, dx, dy, dz, ne);  // ex
    plans_.emplace_back(nx, ny - 1, dx, dy, dz, ne);  // ey
  }
  plans_.emplace_back(nx, ny - 1, dx, dy, dz, nh);  // hx
  plans_.emplace_back(nx - 1, ny, dx, dy, dz, nh);  // hy
}

void AirwaveOperator::refresh_e(const Field3& ex, const Field3& ey) {
  if (gex_.empty()) return;
  std::vector<double*> dst;
  for (auto& p : gex_) dst.push_back(p.data());
  plans_[0].continue_up(ex.data(), dst);
  dst.clear();
  for (auto& p : gey_) dst.push_back(p.data());
  plans_[1].continue_up(ey.data(), dst);
}

void AirwaveOperator::refresh_h(const Field3& hx, const Field3& hy) {
  const size_t base = gex_.empty() ? 0 : 2;
  std::vector<double*> dst;
  for (auto& p : ghx_) dst.push_back(p.data());
  plans_[base].continue_up(hx.data(), dst);
  dst.clear();
  for (auto& p : ghy_) dst.push_back(p.data());
  plans_[base + 1].continue_up(hy.data(), dst);
}

}  // namespace emfd::boundary
