#include "emfd/kernel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace emfd::kernel {

Tables build_tables(const gridgen::StaggeredGrid3D& grid) {
  Tables t;
  t.x = build_axis_operators(grid.x(), grid.half_length, 0);
  t.y = build_axis_operators(grid.y(), grid.half_length, 0);
  t.z = build_axis_operators(grid.z(), grid.half_length, grid.airwave ? grid.half_length : 0);
  return t;
}

StabilityReport timestep_bound(const Tables& tables, double c_max, double safety) {
  StabilityReport r;
  r.dmax[0] = dmax(tables.x);
  r.dmax[1] = dmax(tables.y);
  r.dmax[2] = dmax(tables.z);
  r.c_max = c_max;
  r.safety = safety;
  const double s = std::sqrt(r.dmax[0] * r.dmax[0] + r.dmax[1] * r.dmax[1] +
                             r.dmax[2] * r.dmax[2]);
  r.dt_bound = 2.0 / (c_max * s);
  r.dt = safety * r.dt_bound;
  return r;
}

namespace {

// psi <- b*psi + a*d; d <- d/kappa + psi, for a contiguous row of values
// sharing one coefficient set (derivative axis index constant along x rows)
inline void cpml_adjust_row(double* d, double* psi, int n, double b, double a,
                            double inv_kappa) {
  for (int i = 0; i < n; ++i) {
    psi[i] = b * psi[i] + a * d[i];
    d[i] = d[i] * inv_kappa + psi[i];
  }
}

}  // namespace

Kernel::Kernel(const gridgen::StaggeredGrid3D& grid, const medium::FictitiousMedium& med,
               const Tables& tables, const KernelOptions& opt)
    : grid_(grid),
      tables_(tables),
      L_(grid.half_length),
      nx_(grid.x().nref()),
      ny_(grid.y().nref()),
      nz_(grid.z().nref()),
      dt_(opt.dt),
      mu_(med.mu) {
  if (!(dt_ > 0.0)) throw std::invalid_argument("kernel: dt must be positive");

  ex_ = Field3(nx_ - 1, ny_, nz_);
  ey_ = Field3(nx_, ny_ - 1, nz_);
  ez_ = Field3(nx_, ny_, nz_ - 1);
  hx_ = Field3(nx_, ny_ - 1, nz_ - 1);
  hy_ = Field3(nx_ - 1, ny_, nz_ - 1);
  hz_ = Field3(nx_ - 1, ny_ - 1, nz_);

  // dt/eps, validated over the updated index ranges (air nodes never enter)
  const auto make_coef = [&](const Field3& eps) {
    Field3 c(eps.nx(), eps.ny(), eps.nz());
    for (size_t n = 0; n < eps.size(); ++n) c[n] = eps[n] > 0.0 ? dt_ / eps[n] : 0.0;
    return c;
  };
  cxx_ = make_coef(med.eps_xx);
  cyy_ = make_coef(med.eps_yy);
  czz_ = make_coef(med.eps_zz);
  const auto require_positive = [&](const Field3& eps, int i0, int i1, int j0, int j1,
                                    int k0, int k1) {
    for (int k = k0; k <= k1; ++k)
      for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i)
          if (!(eps(i, j, k) > 0.0))
            throw std::invalid_argument(
                "kernel: fictitious permittivity vanishes inside the update region "
                "(air below the top boundary?)");
  };
  require_positive(med.eps_xx, 0, nx_ - 2, std::max(tables_.y.bwd.out_lo, 0),
                   std::min(tables_.y.bwd.out_hi, ny_ - 1),
                   std::max(tables_.z.bwd.out_lo, 0),
                   std::min(tables_.z.bwd.out_hi, nz_ - 1));
  require_positive(med.eps_yy, std::max(tables_.x.bwd.out_lo, 0),
                   std::min(tables_.x.bwd.out_hi, nx_ - 1), 0, ny_ - 2,
                   std::max(tables_.z.bwd.out_lo, 0),
                   std::min(tables_.z.bwd.out_hi, nz_ - 1));
  require_positive(med.eps_zz, std::max(tables_.x.bwd.out_lo, 0),
                   std::min(tables_.x.bwd.out_hi, nx_ - 1),
                   std::max(tables_.y.bwd.out_lo, 0),
                   std::min(tables_.y.bwd.out_hi, ny_ - 1), 0, nz_ - 2);

  cpml_on_ = opt.cpml.enabled;
  if (cpml_on_) {
    const double cmax = med.c_max;
    cx_ref_ = boundary::build_cpml_coeffs(grid.x(), false, opt.cpml, cmax, opt.f_source, dt_);
    cx_stag_ = boundary::build_cpml_coeffs(grid.x(), true, opt.cpml, cmax, opt.f_source, dt_);
    cy_ref_ = boundary::build_cpml_coeffs(grid.y(), false, opt.cpml, cmax, opt.f_source, dt_);
    cy_stag_ = boundary::build_cpml_coeffs(grid.y(), true, opt.cpml, cmax, opt.f_source, dt_);
    cz_ref_ = boundary::build_cpml_coeffs(grid.z(), false, opt.cpml, cmax, opt.f_source, dt_,
                                          grid.airwave);
    cz_stag_ = boundary::build_cpml_coeffs(grid.z(), true, opt.cpml, cmax, opt.f_source, dt_,
                                           grid.airwave);

    psi_hx_y_.init(1, cy_stag_, hx_.nx(), hx_.ny(), hx_.nz());
    psi_hx_z_.init(2, cz_stag_, hx_.nx(), hx_.ny(), hx_.nz());
    psi_hy_z_.init(2, cz_stag_, hy_.nx(), hy_.ny(), hy_.nz());
    psi_hy_x_.init(0, cx_stag_, hy_.nx(), hy_.ny(), hy_.nz());
    psi_hz_x_.init(0, cx_stag_, hz_.nx(), hz_.ny(), hz_.nz());
    psi_hz_y_.init(1, cy_stag_, hz_.nx(), hz_.ny(), hz_.nz());
    psi_ex_y_.init(1, cy_ref_, ex_.nx(), ex_.ny(), ex_.nz());
    psi_ex_z_.init(2, cz_ref_, ex_.nx(), ex_.ny(), ex_.nz());
    psi_ey_z_.init(2, cz_ref_, ey_.nx(), ey_.ny(), ey_.nz());
    psi_ey_x_.init(0, cx_ref_, ey_.nx(), ey_.ny(), ey_.nz());
    psi_ez_x_.init(0, cx_ref_, ez_.nx(), ez_.ny(), ez_.nz());
    psi_ez_y_.init(1, cy_ref_, ez_.nx(), ez_.ny(), ez_.nz());
  }

  if (grid.airwave) air_ = std::make_unique<boundary::AirwaveOperator>(grid);
}

void Kernel::set_dipole(const DipoleSpec& dipole) {
  has_dipole_ = true;
  dipole_ = dipole;
  injections_.clear();

  const int L = L_;
  Field3* fields[3] = {&ex_, &ey_, &ez_};
  const Field3* coefs[3] = {&cxx_, &cyy_, &czz_};
  inject_field_ = fields[dipole.axis];
  inject_coef_ = coefs[dipole.axis];

  const double pos[3] = {dipole.position[0], dipole.position[1], dipole.position[2]};
  int start[3];
  std::vector<double> w[3];
  int dims[3];
  for (int a = 0; a < 3; ++a) {
    const gridgen::Axis1D& ax = grid_.axis[a];
    if (pos[a] < ax.interior_min() || pos[a] > ax.interior_max())
      throw std::invalid_argument("kernel: source outside the interior domain");
    const bool stag = (a == dipole.axis);
    const std::vector<double>& nodes = stag ? ax.stag : ax.ref;
    dims[a] = static_cast<int>(nodes.size());
    auto it = std::lower_bound(nodes.begin(), nodes.end(), pos[a]);
    int hi = static_cast<int>(it - nodes.begin());
    start[a] = std::clamp(hi - L, 0, dims[a] - 2 * L);
    fdcoeff::NodeStencil st;
    st.center = pos[a];
    st.nodes.assign(nodes.begin() + start[a], nodes.begin() + start[a] + 2 * L);
    w[a] = fdcoeff::interpolation_weights(st).weights;
  }

  const gridgen::Axis1D& gx = grid_.x();
  const gridgen::Axis1D& gy = grid_.y();
  const gridgen::Axis1D& gz = grid_.z();
  for (int kk = 0; kk < 2 * L; ++kk)
    for (int jj = 0; jj < 2 * L; ++jj)
      for (int ii = 0; ii < 2 * L; ++ii) {
        const int ia = start[0] + ii, jb = start[1] + jj, kc = start[2] + kk;
        double vol;
        switch (dipole.axis) {
          case 0: vol = gx.dcell[ia] * gy.dual_spacing(jb) * gz.dual_spacing(kc); break;
          case 1: vol = gx.dual_spacing(ia) * gy.dcell[jb] * gz.dual_spacing(kc); break;
          default: vol = gx.dual_spacing(ia) * gy.dual_spacing(jb) * gz.dcell[kc]; break;
        }
        const double weight = w[0][ii] * w[1][jj] * w[2][kk];
        if (weight == 0.0) continue;
        Injection inj;
        inj.index = inject_field_->idx(ia, jb, kc);
        inj.i = ia;
        inj.j = jb;
        inj.k = kc;
        inj.density = weight / vol;
        injections_.push_back(inj);
      }
}

const Field3& Kernel::field(Component c) const {
  switch (c) {
    case Component::Ex: return ex_;
    case Component::Ey: return ey_;
    case Component::Ez: return ez_;
    case Component::Hx: return hx_;
    case Component::Hy: return hy_;
    default: return hz_;
  }
}

Field3& Kernel::field(Component c) {
  return const_cast<Field3&>(static_cast<const Kernel*>(this)->field(c));
}

// ---------------------------------------------------------------------------
// update loops
//
// Each component update computes its two staggered derivative terms into
// whole x-rows, applies the CPML recursion where the output node falls in a
// PML band, and combines them in place.  Term A minus term B follows the
// six-equation scheme; the raw-curl diagnostics reuse the same row order so
// a boundary-free step is bit-identical to curl + explicit update.
// ---------------------------------------------------------------------------

void Kernel::update_hx() {
  const DerivTable1D& Dy = tables_.y.fwd;
  const DerivTable1D& Dz = tables_.z.fwd;
  const int L2 = 2 * L_, nx = nx_;
  const int jlo = std::max(Dy.out_lo, 0), jhi = std::min(Dy.out_hi, ny_ - 2);
  const int klo = std::max(Dz.out_lo, 0), khi = std::min(Dz.out_hi, nz_ - 2);
  const double cf = -dt_ / mu_;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int K = klo; K <= khi; ++K) {
    std::vector<double> da(nx), db(nx);
    const double* wz = Dz.row(K);
    const int k0 = K + Dz.in_shift;
    for (int J = jlo; J <= jhi; ++J) {
      const double* wy = Dy.row(J);
      const int j0 = J + Dy.in_shift;
      std::fill(da.begin(), da.end(), 0.0);
      for (int l = 0; l < L2; ++l) {
        const double w = wy[l];
        const double* src = &ez_(0, j0 + l, K);
        for (int i = 0; i < nx; ++i) da[i] += w * src[i];
      }
      std::fill(db.begin(), db.end(), 0.0);
      for (int l = 0; l < L2; ++l) {
        const double w = wz[l];
        const int kin = k0 + l;
        const double* src =
            kin >= 0 ? &ey_(0, J, kin)
                     : air_->ghost_ey(-kin - 1) + static_cast<size_t>(J) * nx;
        for (int i = 0; i < nx; ++i) db[i] += w * src[i];
      }
      if (cpml_on_) {
        if (J < cy_stag_.lo_end)
          cpml_adjust_row(da.data(), &psi_hx_y_.lo[psi_hx_y_.lo_index(0, J, K)], nx,
                          cy_stag_.b[J], cy_stag_.a[J], cy_stag_.inv_kappa[J]);
        else if (J >= cy_stag_.hi_begin)
          cpml_adjust_row(da.data(), &psi_hx_y_.hi[psi_hx_y_.hi_index(0, J, K)], nx,
                          cy_stag_.b[J], cy_stag_.a[J], cy_stag_.inv_kappa[J]);
        if (K < cz_stag_.lo_end)
          cpml_adjust_row(db.data(), &psi_hx_z_.lo[psi_hx_z_.lo_index(0, J, K)], nx,
                          cz_stag_.b[K], cz_stag_.a[K], cz_stag_.inv_kappa[K]);
        else if (K >= cz_stag_.hi_begin)
          cpml_adjust_row(db.data(), &psi_hx_z_.hi[psi_hx_z_.hi_index(0, J, K)], nx,
                          cz_stag_.b[K], cz_stag_.a[K], cz_stag_.inv_kappa[K]);
      }
      double* out = &hx_(0, J, K);
      for (int i = 0; i < nx; ++i) out[i] += cf * (da[i] - db[i]);
    }
  }
}

void Kernel::update_hy() {
  const DerivTable1D& Dz = tables_.z.fwd;
  const DerivTable1D& Dx = tables_.x.fwd;
  const int L2 = 2 * L_;
  const int nsx = nx_ - 1;  // staggered x count
  const int ilo = std::max(Dx.out_lo, 0), ihi = std::min(Dx.out_hi, nsx - 1);
  const int klo = std::max(Dz.out_lo, 0), khi = std::min(Dz.out_hi, nz_ - 2);
  const double cf = -dt_ / mu_;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int K = klo; K <= khi; ++K) {
    std::vector<double> da(nsx), db(nsx);
    const double* wz = Dz.row(K);
    const int k0 = K + Dz.in_shift;
    for (int j = 0; j < ny_; ++j) {
      // D_z+ Ex over the x row
      std::fill(da.begin(), da.end(), 0.0);
      for (int l = 0; l < L2; ++l) {
        const double w = wz[l];
        const int kin = k0 + l;
        const double* src =
            kin >= 0 ? &ex_(0, j, kin)
                     : air_->ghost_ex(-kin - 1) + static_cast<size_t>(j) * nsx;
        for (int I = 0; I < nsx; ++I) da[I] += w * src[I];
      }
      // D_x+ Ez, one dot product per output node
      const double* ezrow = &ez_(0, j, K);
      for (int I = ilo; I <= ihi; ++I) {
        const double* w = Dx.row(I);
        const double* src = ezrow + (I + Dx.in_shift);
        double s = 0.0;
        for (int l = 0; l < L2; ++l) s += w[l] * src[l];
        db[I] = s;
      }
      if (cpml_on_) {
        if (K < cz_stag_.lo_end)
          cpml_adjust_row(da.data(), &psi_hy_z_.lo[psi_hy_z_.lo_index(0, j, K)], nsx,
                          cz_stag_.b[K], cz_stag_.a[K], cz_stag_.inv_kappa[K]);
        else if (K >= cz_stag_.hi_begin)
          cpml_adjust_row(da.data(), &psi_hy_z_.hi[psi_hy_z_.hi_index(0, j, K)], nsx,
                          cz_stag_.b[K], cz_stag_.a[K], cz_stag_.inv_kappa[K]);
        for (int I = ilo; I < std::min(cx_stag_.lo_end, ihi + 1); ++I) {
          double& psi = psi_hy_x_.lo[psi_hy_x_.lo_index(I, j, K)];
          psi = cx_stag_.b[I] * psi + cx_stag_.a[I] * db[I];
          db[I] = db[I] * cx_stag_.inv_kappa[I] + psi;
        }
        for (int I = std::max(cx_stag_.hi_begin, ilo); I <= ihi; ++I) {
          double& psi = psi_hy_x_.hi[psi_hy_x_.hi_index(I, j, K)];
          psi = cx_stag_.b[I] * psi + cx_stag_.a[I] * db[I];
          db[I] = db[I] * cx_stag_.inv_kappa[I] + psi;
        }
      }
      double* out = &hy_(0, j, K);
      for (int I = ilo; I <= ihi; ++I) out[I] += cf * (da[I] - db[I]);
    }
  }
}

void Kernel::update_hz() {
  const DerivTable1D& Dx = tables_.x.fwd;
  const DerivTable1D& Dy = tables_.y.fwd;
  const int L2 = 2 * L_;
  const int nsx = nx_ - 1;
  const int ilo = std::max(Dx.out_lo, 0), ihi = std::min(Dx.out_hi, nsx - 1);
  const int jlo = std::max(Dy.out_lo, 0), jhi = std::min(Dy.out_hi, ny_ - 2);
  const double cf = -dt_ / mu_;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int k = 0; k < nz_; ++k) {
    std::vector<double> da(nsx), db(nsx);
    for (int J = jlo; J <= jhi; ++J) {
      const double* wy = Dy.row(J);
      const int j0 = J + Dy.in_shift;
      // D_x+ Ey
      const double* eyrow0 = &ey_(0, J, k);
      for (int I = ilo; I <= ihi; ++I) {
        const double* w = Dx.row(I);
        const double* src = eyrow0 + (I + Dx.in_shift);
        double s = 0.0;
        for (int l = 0; l < L2; ++l) s += w[l] * src[l];
        da[I] = s;
      }
      // D_y+ Ex
      std::fill(db.begin(), db.end(), 0.0);
      for (int l = 0; l < L2; ++l) {
        const double w = wy[l];
        const double* src = &ex_(0, j0 + l, k);
        for (int I = 0; I < nsx; ++I) db[I] += w * src[I];
      }
      if (cpml_on_) {
        for (int I = ilo; I < std::min(cx_stag_.lo_end, ihi + 1); ++I) {
          double& psi = psi_hz_x_.lo[psi_hz_x_.lo_index(I, J, k)];
          psi = cx_stag_.b[I] * psi + cx_stag_.a[I] * da[I];
          da[I] = da[I] * cx_stag_.inv_kappa[I] + psi;
        }
        for (int I = std::max(cx_stag_.hi_begin, ilo); I <= ihi; ++I) {
          double& psi = psi_hz_x_.hi[psi_hz_x_.hi_index(I, J, k)];
          psi = cx_stag_.b[I] * psi + cx_stag_.a[I] * da[I];
          da[I] = da[I] * cx_stag_.inv_kappa[I] + psi;
        }
        if (J < cy_stag_.lo_end)
          cpml_adjust_row(db.data(), &psi_hz_y_.lo[psi_hz_y_.lo_index(0, J, k)], nsx,
                          cy_stag_.b[J], cy_stag_.a[J], cy_stag_.inv_kappa[J]);
        else if (J >= cy_stag_.hi_begin)
          cpml_adjust_row(db.data(), &psi_hz_y_.hi[psi_hz_y_.hi_index(0, J, k)], nsx,
                          cy_stag_.b[J], cy_stag_.a[J], cy_stag_.inv_kappa[J]);
      }
      double* out = &hz_(0, J, k);
      for (int I = ilo; I <= ihi; ++I) out[I] += cf * (da[I] - db[I]);
    }
  }
}

void Kernel::update_ex() {
  const DerivTable1D& Dy = tables_.y.bwd;
  const DerivTable1D& Dz = tables_.z.bwd;
  const int L2 = 2 * L_;
  const int nsx = nx_ - 1;
  const int jlo = std::max(Dy.out_lo, 0), jhi = std::min(Dy.out_hi, ny_ - 1);
  const int klo = std::max(Dz.out_lo, 0), khi = std::min(Dz.out_hi, nz_ - 1);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int k = klo; k <= khi; ++k) {
    std::vector<double> da(nsx), db(nsx);
    const double* wz = Dz.row(k);
    const int k0 = k + Dz.in_shift;
    for (int j = jlo; j <= jhi; ++j) {
      const double* wy = Dy.row(j);
      const int j0 = j + Dy.in_shift;
      std::fill(da.begin(), da.end(), 0.0);
      for (int l = 0; l < L2; ++l) {
        const double w = wy[l];
        const double* src = &hz_(0, j0 + l, k);
        for (int I = 0; I < nsx; ++I) da[I] += w * src[I];
      }
      std::fill(db.begin(), db.end(), 0.0);
      for (int l = 0; l < L2; ++l) {
        const double w = wz[l];
        const int kin = k0 + l;
        const double* src =
            kin >= 0 ? &hy_(0, j, kin)
                     : air_->ghost_hy(-kin - 1) + static_cast<size_t>(j) * nsx;
        for (int I = 0; I < nsx; ++I) db[I] += w * src[I];
      }
      if (cpml_on_) {
        if (j < cy_ref_.lo_end)
          cpml_adjust_row(da.data(), &psi_ex_y_.lo[psi_ex_y_.lo_index(0, j, k)], nsx,
                          cy_ref_.b[j], cy_ref_.a[j], cy_ref_.inv_kappa[j]);
        else if (j >= cy_ref_.hi_begin)
          cpml_adjust_row(da.data(), &psi_ex_y_.hi[psi_ex_y_.hi_index(0, j, k)], nsx,
                          cy_ref_.b[j], cy_ref_.a[j], cy_ref_.inv_kappa[j]);
        if (k < cz_ref_.lo_end)
          cpml_adjust_row(db.data(), &psi_ex_z_.lo[psi_ex_z_.lo_index(0, j, k)], nsx,
                          cz_ref_.b[k], cz_ref_.a[k], cz_ref_.inv_kappa[k]);
        else if (k >= cz_ref_.hi_begin)
          cpml_adjust_row(db.data(), &psi_ex_z_.hi[psi_ex_z_.hi_index(0, j, k)], nsx,
                          cz_ref_.b[k], cz_ref_.a[k], cz_ref_.inv_kappa[k]);
      }
      const double* coef = &cxx_(0, j, k);
      double* out = &ex_(0, j, k);
      for (int I = 0; I < nsx; ++I) out[I] += coef[I] * (da[I] - db[I]);
    }
  }
}

void Kernel::update_ey() {
  const DerivTable1D& Dz = tables_.z.bwd;
  const DerivTable1D& Dx = tables_.x.bwd;
  const int L2 = 2 * L_;
  const int nx = nx_;
  const int ilo = std::max(Dx.out_lo, 0), ihi = std::min(Dx.out_hi, nx - 1);
  const int klo = std::max(Dz.out_lo, 0), khi = std::min(Dz.out_hi, nz_ - 1);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int k = klo; k <= khi; ++k) {
    std::vector<double> da(nx), db(nx);
    const double* wz = Dz.row(k);
    const int k0 = k + Dz.in_shift;
    for (int J = 0; J < ny_ - 1; ++J) {
      std::fill(da.begin(), da.end(), 0.0);
      for (int l = 0; l < L2; ++l) {
        const double w = wz[l];
        const int kin = k0 + l;
        const double* src =
            kin >= 0 ? &hx_(0, J, kin)
                     : air_->ghost_hx(-kin - 1) + static_cast<size_t>(J) * nx;
        for (int i = 0; i < nx; ++i) da[i] += w * src[i];
      }
      const double* hzrow = &hz_(0, J, k);
      for (int i = ilo; i <= ihi; ++i) {
        const double* w = Dx.row(i);
        const double* src = hzrow + (i + Dx.in_shift);
        double s = 0.0;
        for (int l = 0; l < L2; ++l) s += w[l] * src[l];
        db[i] = s;
      }
      if (cpml_on_) {
        if (k < cz_ref_.lo_end)
          cpml_adjust_row(da.data(), &psi_ey_z_.lo[psi_ey_z_.lo_index(0, J, k)], nx,
                          cz_ref_.b[k], cz_ref_.a[k], cz_ref_.inv_kappa[k]);
        else if (k >= cz_ref_.hi_begin)
          cpml_adjust_row(da.data(), &psi_ey_z_.hi[psi_ey_z_.hi_index(0, J, k)], nx,
                          cz_ref_.b[k], cz_ref_.a[k], cz_ref_.inv_kappa[k]);
        for (int i = ilo; i < std::min(cx_ref_.lo_end, ihi + 1); ++i) {
          double& psi = psi_ey_x_.lo[psi_ey_x_.lo_index(i, J, k)];
          psi = cx_ref_.b[i] * psi + cx_ref_.a[i] * db[i];
          db[i] = db[i] * cx_ref_.inv_kappa[i] + psi;
        }
        for (int i = std::max(cx_ref_.hi_begin, ilo); i <= ihi; ++i) {
          double& psi = psi_ey_x_.hi[psi_ey_x_.hi_index(i, J, k)];
          psi = cx_ref_.b[i] * psi + cx_ref_.a[i] * db[i];
          db[i] = db[i] * cx_ref_.inv_kappa[i] + psi;
        }
      }
      const double* coef = &cyy_(0, J, k);
      double* out = &ey_(0, J, k);
      for (int i = ilo; i <= ihi; ++i) out[i] += coef[i] * (da[i] - db[i]);
    }
  }
}

void Kernel::update_ez() {
  const DerivTable1D& Dx = tables_.x.bwd;
  const DerivTable1D& Dy = tables_.y.bwd;
  const int L2 = 2 * L_;
  const int nx = nx_;
  const int ilo = std::max(Dx.out_lo, 0), ihi = std::min(Dx.out_hi, nx - 1);
  const int jlo = std::max(Dy.out_lo, 0), jhi = std::min(Dy.out_hi, ny_ - 1);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int K = 0; K < nz_ - 1; ++K) {
    std::vector<double> da(nx), db(nx);
    for (int j = jlo; j <= jhi; ++j) {
      const double* wy = Dy.row(j);
      const int j0 = j + Dy.in_shift;
      const double* hyrow = &hy_(0, j, K);
      for (int i = ilo; i <= ihi; ++i) {
        const double* w = Dx.row(i);
        const double* src = hyrow + (i + Dx.in_shift);
        double s = 0.0;
        for (int l = 0; l < L2; ++l) s += w[l] * src[l];
        da[i] = s;
      }
      std::fill(db.begin(), db.end(), 0.0);
      for (int l = 0; l < L2; ++l) {
        const double w = wy[l];
        const double* src = &hx_(0, j0 + l, K);
        for (int i = 0; i < nx; ++i) db[i] += w * src[i];
      }
      if (cpml_on_) {
        for (int i = ilo; i < std::min(cx_ref_.lo_end, ihi + 1); ++i) {
          double& psi = psi_ez_x_.lo[psi_ez_x_.lo_index(i, j, K)];
          psi = cx_ref_.b[i] * psi + cx_ref_.a[i] * da[i];
          da[i] = da[i] * cx_ref_.inv_kappa[i] + psi;
        }
        for (int i = std::max(cx_ref_.hi_begin, ilo); i <= ihi; ++i) {
          double& psi = psi_ez_x_.hi[psi_ez_x_.hi_index(i, j, K)];
          psi = cx_ref_.b[i] * psi + cx_ref_.a[i] * da[i];
          da[i] = da[i] * cx_ref_.inv_kappa[i] + psi;
        }
        if (j < cy_ref_.lo_end)
          cpml_adjust_row(db.data(), &psi_ez_y_.lo[psi_ez_y_.lo_index(0, j, K)], nx,
                          cy_ref_.b[j], cy_ref_.a[j], cy_ref_.inv_kappa[j]);
        else if (j >= cy_ref_.hi_begin)
          cpml_adjust_row(db.data(), &psi_ez_y_.hi[psi_ez_y_.hi_index(0, j, K)], nx,
                          cy_ref_.b[j], cy_ref_.a[j], cy_ref_.inv_kappa[j]);
      }
      const double* coef = &czz_(0, j, K);
      double* out = &ez_(0, j, K);
      for (int i = ilo; i <= ihi; ++i) out[i] += coef[i] * (da[i] - db[i]);
    }
  }
}

void Kernel::inject(double waveform_value) {
  if (!has_dipole_ || waveform_value == 0.0) return;
  Field3& f = *inject_field_;
  const Field3& c = *inject_coef_;
  for (const Injection& inj : injections_)
    f[inj.index] -= c[inj.index] * waveform_value * inj.density;
}

void Kernel::update_h() {
  if (air_) air_->refresh_e(ex_, ey_);
  update_hx();
  update_hy();
  update_hz();
}

void Kernel::update_e(double waveform_value) {
  if (air_) air_->refresh_h(hx_, hy_);
  update_ex();
  update_ey();
  update_ez();
  inject(waveform_value);
}

void Kernel::advance(long n) {
  update_h();
  const double t_half = (n + 0.5) * dt_;
  update_e(has_dipole_ ? dipole_.waveform.value(t_half) : 0.0);
}

double Kernel::max_abs_e(bool* finite) const {
  double m = 0.0;
  bool ok = true;
  for (const Field3* f : {&ex_, &ey_, &ez_}) {
    const double* v = f->data();
    const size_t n = f->size();
    for (size_t q = 0; q < n; ++q) {
      const double a = std::abs(v[q]);
      if (!(a < 1e300)) ok = false;
      if (a > m) m = a;
    }
  }
  if (finite) *finite = ok;
  return m;
}

// ---------------------------------------------------------------------------
// diagnostics
// ---------------------------------------------------------------------------

void Kernel::curl_e(Field3& cx, Field3& cy, Field3& cz) const {
  cx = Field3(hx_.nx(), hx_.ny(), hx_.nz());
  cy = Field3(hy_.nx(), hy_.ny(), hy_.nz());
  cz = Field3(hz_.nx(), hz_.ny(), hz_.nz());
  const DerivTable1D& Fx = tables_.x.fwd;
  const DerivTable1D& Fy = tables_.y.fwd;
  const DerivTable1D& Fz = tables_.z.fwd;
  const int L2 = 2 * L_;

  for (int K = std::max(Fz.out_lo, 0); K <= std::min(Fz.out_hi, nz_ - 2); ++K)
    for (int J = std::max(Fy.out_lo, 0); J <= std::min(Fy.out_hi, ny_ - 2); ++J)
      for (int i = 0; i < nx_; ++i) {
        double dy = 0.0, dz = 0.0;
        const double* wy = Fy.row(J);
        const double* wz = Fz.row(K);
        for (int l = 0; l < L2; ++l) dy += wy[l] * ez_(i, J + Fy.in_shift + l, K);
        for (int l = 0; l < L2; ++l) {
          const int kin = K + Fz.in_shift + l;
          const double v = kin >= 0
                               ? ey_(i, J, kin)
                               : air_->ghost_ey(-kin - 1)[static_cast<size_t>(J) * nx_ + i];
          dz += wz[l] * v;
        }
        cx(i, J, K) = dy - dz;
      }
  for (int K = std::max(Fz.out_lo, 0); K <= std::min(Fz.out_hi, nz_ - 2); ++K)
    for (int j = 0; j < ny_; ++j)
      for (int I = std::max(Fx.out_lo, 0); I <= std::min(Fx.out_hi, nx_ - 2); ++I) {
        double dz = 0.0, dx = 0.0;
        const double* wz = Fz.row(K);
        const double* wx = Fx.row(I);
        for (int l = 0; l < L2; ++l) {
          const int kin = K + Fz.in_shift + l;
          const double v =
              kin >= 0 ? ex_(I, j, kin)
                       : air_->ghost_ex(-kin - 1)[static_cast<size_t>(j) * (nx_ - 1) + I];
          dz += wz[l] * v;
        }
        for (int l = 0; l < L2; ++l) dx += wx[l] * ez_(I + Fx.in_shift + l, j, K);
        cy(I, j, K) = dz - dx;
      }
  for (int k = 0; k < nz_; ++k)
    for (int J = std::max(Fy.out_lo, 0); J <= std::min(Fy.out_hi, ny_ - 2); ++J)
      for (int I = std::max(Fx.out_lo, 0); I <= std::min(Fx.out_hi, nx_ - 2); ++I) {
        double dx = 0.0, dy = 0.0;
        const double* wx = Fx.row(I);
        const double* wy = Fy.row(J);
        for (int l = 0; l < L2; ++l) dx += wx[l] * ey_(I + Fx.in_shift + l, J, k);
        for (int l = 0; l < L2; ++l) dy += wy[l] * ex_(I, J + Fy.in_shift + l, k);
        cz(I, J, k) = dx - dy;
      }
}

void Kernel::curl_h(Field3& cx, Field3& cy, Field3& cz) const {
  cx = Field3(ex_.nx(), ex_.ny(), ex_.nz());
  cy = Field3(ey_.nx(), ey_.ny(), ey_.nz());
  cz = Field3(ez_.nx(), ez_.ny(), ez_.nz());
  const DerivTable1D& Bx = tables_.x.bwd;
  const DerivTable1D& By = tables_.y.bwd;
  const DerivTable1D& Bz = tables_.z.bwd;
  const int L2 = 2 * L_;

  for (int k = std::max(Bz.out_lo, 0); k <= std::min(Bz.out_hi, nz_ - 1); ++k)
    for (int j = std::max(By.out_lo, 0); j <= std::min(By.out_hi, ny_ - 1); ++j)
      for (int I = 0; I < nx_ - 1; ++I) {
        double dy = 0.0, dz = 0.0;
        const double* wy = By.row(j);
        const double* wz = Bz.row(k);
        for (int l = 0; l < L2; ++l) dy += wy[l] * hz_(I, j + By.in_shift + l, k);
        for (int l = 0; l < L2; ++l) {
          const int kin = k + Bz.in_shift + l;
          const double v = kin >= 0
                               ? hy_(I, j, kin)
                               : air_->ghost_hy(-kin - 1)[static_cast<size_t>(j) * (nx_ - 1) + I];
          dz += wz[l] * v;
        }
        cx(I, j, k) = dy - dz;
      }
  for (int k = std::max(Bz.out_lo, 0); k <= std::min(Bz.out_hi, nz_ - 1); ++k)
    for (int J = 0; J < ny_ - 1; ++J)
      for (int i = std::max(Bx.out_lo, 0); i <= std::min(Bx.out_hi, nx_ - 1); ++i) {
        double dz = 0.0, dx = 0.0;
        const double* wz = Bz.row(k);
        const double* wx = Bx.row(i);
        for (int l = 0; l < L2; ++l) {
          const int kin = k + Bz.in_shift + l;
          const double v =
              kin >= 0 ? hx_(i, J, kin)
                       : air_->ghost_hx(-kin - 1)[static_cast<size_t>(J) * nx_ + i];
          dz += wz[l] * v;
        }
        for (int l = 0; l < L2; ++l) dx += wx[l] * hz_(i + Bx.in_shift + l, J, k);
        cy(i, J, k) = dz - dx;
      }
  for (int K = 0; K < nz_ - 1; ++K)
    for (int j = std::max(By.out_lo, 0); j <= std::min(By.out_hi, ny_ - 1); ++j)
      for (int i = std::max(Bx.out_lo, 0); i <= std::min(Bx.out_hi, nx_ - 1); ++i) {
        double dx = 0.0, dy = 0.0;
        const double* wx = Bx.row(i);
        const double* wy = By.row(j);
        for (int l = 0; l < L2; ++l) dx += wx[l] * hy_(i + Bx.in_shift + l, j, K);
        for (int l = 0; l < L2; ++l) dy += wy[l] * hx_(i, j + By.in_shift + l, K);
        cz(i, j, K) = dx - dy;
      }
}

Kernel::DivergenceStats Kernel::divergence_h() const {
  const DerivTable1D& Fx = tables_.x.fwd;
  const DerivTable1D& Fy = tables_.y.fwd;
  const DerivTable1D& Fz = tables_.z.fwd;
  const int L2 = 2 * L_;
  const gridgen::Axis1D& gx = grid_.x();
  const gridgen::Axis1D& gy = grid_.y();
  const gridgen::Axis1D& gz = grid_.z();

  const int ilo = std::max(gx.pml_lo + L_, Fx.out_lo);
  const int ihi = std::min(gx.ncells() - gx.pml_hi - L_ - 1, Fx.out_hi);
  const int jlo = std::max(gy.pml_lo + L_, Fy.out_lo);
  const int jhi = std::min(gy.ncells() - gy.pml_hi - L_ - 1, Fy.out_hi);
  const int klo = std::max(gz.pml_lo + L_, Fz.out_lo);
  const int khi = std::min(gz.ncells() - gz.pml_hi - L_ - 1, Fz.out_hi);

  DivergenceStats st;
  double max_h = 0.0;
  for (const Field3* f : {&hx_, &hy_, &hz_})
    for (size_t q = 0; q < f->size(); ++q) max_h = std::max(max_h, std::abs((*f)[q]));
  st.scale = (Fx.max_abs_row_sum() + Fy.max_abs_row_sum() + Fz.max_abs_row_sum()) * max_h;

  for (int K = klo; K <= khi; ++K)
    for (int J = jlo; J <= jhi; ++J)
      for (int I = ilo; I <= ihi; ++I) {
        double div = 0.0;
        const double* wx = Fx.row(I);
        const double* wy = Fy.row(J);
        const double* wz = Fz.row(K);
        for (int l = 0; l < L2; ++l) div += wx[l] * hx_(I + Fx.in_shift + l, J, K);
        for (int l = 0; l < L2; ++l) div += wy[l] * hy_(I, J + Fy.in_shift + l, K);
        for (int l = 0; l < L2; ++l) div += wz[l] * hz_(I, J, K + Fz.in_shift + l);
        st.max_abs = std::max(st.max_abs, std::abs(div));
      }
  return st;
}

TimeLoopResult run_time_loop(Kernel& kernel, SpectralAccumulator& acc,
                             const std::vector<SampleEntry>& entries,
                             const TimeLoopOptions& opt, std::ostream* log) {
  TimeLoopResult res;
  const double dt = kernel.dt();
  const DipoleSpec* dip = kernel.dipole();
  const double source_end =
      (dip && dip->waveform.moment != 0.0) ? dip->waveform.end_time() : 0.0;

  double prev_peak = 0.0;
  const auto t_start = std::chrono::steady_clock::now();
  long n = 0;
  for (; n < opt.max_steps; ++n) {
    kernel.update_h();
    const double t_half = (n + 0.5) * dt;
    {
      const auto ph = acc.phases_at(t_half);
      for (int e = 0; e < static_cast<int>(entries.size()); ++e)
        if (!is_electric(entries[e].component))
          acc.accumulate(e, entries[e].sample(kernel.field(entries[e].component)), ph);
    }
    kernel.update_e(dip ? dip->waveform.value(t_half) : 0.0);
    {
      const auto ph = acc.phases_at((n + 1) * dt);
      for (int e = 0; e < static_cast<int>(entries.size()); ++e)
        if (is_electric(entries[e].component))
          acc.accumulate(e, entries[e].sample(kernel.field(entries[e].component)), ph);
    }

    if ((n + 1) % opt.cadence == 0) {
      bool finite = true;
      const double maxe = kernel.max_abs_e(&finite);
      if (!finite || (prev_peak > 0.0 && maxe > opt.instability_factor * prev_peak)) {
        res.aborted_unstable = true;
        res.final_max_e = maxe;
        ++n;
        break;
      }
      prev_peak = std::max(prev_peak, maxe);
      acc.checkpoint();
      const double metric = acc.checkpoints() >= 2 ? acc.relative_change() : -1.0;
      res.history.emplace_back(n + 1, metric);
      if (log && opt.verbose) {
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        char line[160];
        std::snprintf(line, sizeof line,
                      "step %8ld  wall %9.2fs  max|E'| %.6e  converge %.3e\n", n + 1, wall,
                      maxe, metric);
        *log << line;
      }
      if (opt.convergence_tol > 0.0 && acc.checkpoints() >= 2 &&
          (n + 1) * dt > source_end && metric >= 0.0 && metric < opt.convergence_tol) {
        res.converged = true;
        ++n;
        break;
      }
    }
  }
  res.steps = n;
  res.peak_max_e = prev_peak;
  if (!res.aborted_unstable) res.final_max_e = kernel.max_abs_e();
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  res.per_step_seconds = res.steps > 0 ? res.wall_seconds / res.steps : 0.0;
  return res;
}

}  // namespace emfd::kernel
