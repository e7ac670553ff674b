/// @file medium.hpp
/// @brief Resistivity model ingest/emit and the fictitious-permittivity
/// medium sampled at the staggered material positions.
///
/// Model file format: a text header with lines
///   dims <nx> <ny> <nz>
///   order z-fastest
///   fields rho_h rho_v        (or: fields rho, for isotropic models)
///   precision float32
///   endian little
///   mu <H/m>                  (optional, defaults to vacuum)
///   xnodes <coords...>        (optional node coordinate declarations,
///   ynodes ... / znodes ...    validated against the grid interior)
///   data <payload filename>   (informational)
/// plus a raw little-endian float32 payload, z-fastest within each field,
/// rho_h block first, then rho_v when present.

#pragma once

#include <string>
#include <vector>

#include "emfd/field3.hpp"
#include "emfd/gridgen.hpp"

namespace emfd::medium {

inline constexpr double kMu0 = 1.2566370614359173e-6;  // 4*pi*1e-7 H/m
inline constexpr double kAirResistivity = 1e10;        // Ohm m and above = air

/// Node-based resistivity model covering the grid interior (one value per
/// interior reference node; PML nodes extend the edge values).
struct ResistivityModel {
  int nx = 0, ny = 0, nz = 0;
  std::vector<float> rho_h, rho_v;  // Ohm m, x-fastest
  double mu = kMu0;
  std::vector<double> xnodes, ynodes, znodes;  // optional coordinates

  size_t idx(int i, int j, int k) const {
    return static_cast<size_t>(i) +
           static_cast<size_t>(nx) * (static_cast<size_t>(j) + static_cast<size_t>(ny) * k);
  }
  size_t cell_count() const { return static_cast<size_t>(nx) * ny * nz; }
  bool is_air(size_t n) const { return rho_h[n] >= kAirResistivity; }
};

ResistivityModel model_ingest(const std::string& header_path, const std::string& data_path);
void model_emit(const ResistivityModel& model, const std::string& header_path,
                const std::string& data_path);

/// Layer table entry: the layer occupies z in [z_top, next z_top).
struct Layer {
  double z_top = 0.0;
  double rho_h = 1.0;
  double lambda = 1.0;  // rho_v / rho_h
};

/// Model with horizontally constant layering sampled at the grid interior
/// nodes.  A node exactly at a layer top belongs to that layer.
ResistivityModel layered_model(const gridgen::StaggeredGrid3D& grid,
                               const std::vector<Layer>& layers, double mu = kMu0);

/// Overwrite rho in the axis-aligned box [x0,x1]x[y0,y1]x[z0,z1] (interior
/// node coordinates, inclusive).
void set_box(ResistivityModel& model, const gridgen::StaggeredGrid3D& grid,
             double x0, double x1, double y0, double y1, double z0, double z1,
             double rho_h, double lambda);

/// Fictitious permittivity eps = sigma/(2 omega0) sampled at the staggered
/// electric-field positions, with sigma harmonically averaged over the two
/// node values straddling each component's staggered direction.
struct FictitiousMedium {
  Field3 eps_xx, eps_yy, eps_zz;
  double mu = kMu0;
  double omega0 = 0.0;  // rad/s
  double c_max = 0.0;   // air excluded
  double c_min = 0.0;
};

FictitiousMedium to_fictitious(const ResistivityModel& model,
                               const gridgen::StaggeredGrid3D& grid, double omega0);

}  // namespace emfd::medium
