#include "emfd/medium.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace emfd::medium {

static_assert(std::endian::native == std::endian::little,
              "model payload io assumes a little-endian host");

namespace {

void check_values(const std::vector<float>& v, const char* name) {
  for (float x : v) {
    if (!std::isfinite(x) || x <= 0.0f)
      throw std::runtime_error(std::string("medium: nonpositive or non-finite ") + name);
  }
}

std::vector<double> parse_coords(std::istringstream& ss) {
  std::vector<double> out;
  double x;
  while (ss >> x) out.push_back(x);
  return out;
}

// payload order is z-fastest; internal storage is x-fastest
size_t payload_index(int i, int j, int k, int ny, int nz) {
  return static_cast<size_t>(k) +
         static_cast<size_t>(nz) * (static_cast<size_t>(j) + static_cast<size_t>(ny) * i);
}

}  // namespace

ResistivityModel model_ingest(const std::string& header_path, const std::string& data_path) {
  std::ifstream hdr(header_path);
  if (!hdr) throw std::runtime_error("medium: cannot open header " + header_path);

  ResistivityModel m;
  bool have_dims = false, anisotropic = false, have_fields = false;
  bool order_ok = false, precision_ok = false, endian_ok = false;
  std::string line;
  while (std::getline(hdr, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "dims") {
      if (!(ss >> m.nx >> m.ny >> m.nz) || m.nx < 1 || m.ny < 1 || m.nz < 1)
        throw std::runtime_error("medium: bad dims line");
      have_dims = true;
    } else if (key == "order") {
      std::string v;
      ss >> v;
      if (v != "z-fastest") throw std::runtime_error("medium: unsupported order " + v);
      order_ok = true;
    } else if (key == "fields") {
      std::string a, b;
      ss >> a >> b;
      if (a == "rho_h" && b == "rho_v") anisotropic = true;
      else if (a == "rho" && b.empty()) anisotropic = false;
      else throw std::runtime_error("medium: unsupported fields line");
      have_fields = true;
    } else if (key == "precision") {
      std::string v;
      ss >> v;
      if (v != "float32") throw std::runtime_error("medium: unsupported precision " + v);
      precision_ok = true;
    } else if (key == "endian") {
      std::string v;
      ss >> v;
      if (v != "little") throw std::runtime_error("medium: unsupported endianness " + v);
      endian_ok = true;
    } else if (key == "mu") {
      ss >> m.mu;
    } else if (key == "xnodes") {
      m.xnodes = parse_coords(ss);
    } else if (key == "ynodes") {
      m.ynodes = parse_coords(ss);
    } else if (key == "znodes") {
      m.znodes = parse_coords(ss);
    } else if (key == "data") {
      // informational
    } else {
      throw std::runtime_error("medium: unknown header key " + key);
    }
  }
  if (!have_dims || !have_fields || !order_ok || !precision_ok || !endian_ok)
    throw std::runtime_error("medium: header incomplete");

  std::ifstream dat(data_path, std::ios::binary);
  if (!dat) throw std::runtime_error("medium: cannot open payload " + data_path);
  dat.seekg(0, std::ios::end);
  const size_t bytes = static_cast<size_t>(dat.tellg());
  dat.seekg(0);
  const size_t n = m.cell_count();
  const size_t expected = n * sizeof(float) * (anisotropic ? 2 : 1);
  if (bytes != expected)
    throw std::runtime_error("medium: payload size does not match header dims");

  std::vector<float> raw(bytes / sizeof(float));
  dat.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(bytes));
  if (!dat) throw std::runtime_error("medium: short read on payload");

  m.rho_h.resize(n);
  m.rho_v.resize(n);
  for (int k = 0; k < m.nz; ++k)
    for (int j = 0; j < m.ny; ++j)
      for (int i = 0; i < m.nx; ++i) {
        const size_t p = payload_index(i, j, k, m.ny, m.nz);
        m.rho_h[m.idx(i, j, k)] = raw[p];
        m.rho_v[m.idx(i, j, k)] = anisotropic ? raw[n + p] : raw[p];
      }
  check_values(m.rho_h, "rho_h");
  check_values(m.rho_v, "rho_v");
  return m;
}

void model_emit(const ResistivityModel& model, const std::string& header_path,
                const std::string& data_path) {
  std::ofstream hdr(header_path);
  if (!hdr) throw std::runtime_error("medium: cannot write header " + header_path);
  char buf[64];
  hdr << "dims " << model.nx << ' ' << model.ny << ' ' << model.nz << '\n';
  hdr << "order z-fastest\n";
  hdr << "fields rho_h rho_v\n";
  hdr << "precision float32\n";
  hdr << "endian little\n";
  std::snprintf(buf, sizeof buf, "mu %.17g\n", model.mu);
  hdr << buf;
  auto write_coords = [&](const char* key, const std::vector<double>& v) {
    if (v.empty()) return;
    hdr << key;
    for (double x : v) {
      std::snprintf(buf, sizeof buf, " %.17g", x);
      hdr << buf;
    }
    hdr << '\n';
  };
  write_coords("xnodes", model.xnodes);
  write_coords("ynodes", model.ynodes);
  write_coords("znodes", model.znodes);
  const size_t slash = data_path.find_last_of('/');
  hdr << "data " << (slash == std::string::npos ? data_path : data_path.substr(slash + 1))
      << '\n';

  std::ofstream dat(data_path, std::ios::binary);
  if (!dat) throw std::runtime_error("medium: cannot write payload " + data_path);
  const size_t n = model.cell_count();
  std::vector<float> raw(2 * n);
  for (int k = 0; k < model.nz; ++k)
    for (int j = 0; j < model.ny; ++j)
      for (int i = 0; i < model.nx; ++i) {
        const size_t p = payload_index(i, j, k, model.ny, model.nz);
        raw[p] = model.rho_h[model.idx(i, j, k)];
        raw[n + p] = model.rho_v[model.idx(i, j, k)];
      }
  dat.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size() * sizeof(float)));
}

ResistivityModel layered_model(const gridgen::StaggeredGrid3D& grid,
                               const std::vector<Layer>& layers, double mu) {
  if (layers.empty()) throw std::invalid_argument("medium: empty layer table");
  for (size_t l = 1; l < layers.size(); ++l)
    if (!(layers[l].z_top > layers[l - 1].z_top))
      throw std::invalid_argument("medium: layer tops must ascend");

  ResistivityModel m;
  m.mu = mu;
  m.nx = grid.x().interior_node_count();
  m.ny = grid.y().interior_node_count();
  m.nz = grid.z().interior_node_count();
  m.rho_h.resize(m.cell_count());
  m.rho_v.resize(m.cell_count());
  const auto& zax = grid.z();
  for (int k = 0; k < m.nz; ++k) {
    const double z = zax.ref[zax.interior_node_begin() + k];
    size_t li = 0;
    for (size_t l = 0; l < layers.size(); ++l)
      if (z >= layers[l].z_top - 1e-9) li = l;
    const float rh = static_cast<float>(layers[li].rho_h);
    const float rv = static_cast<float>(layers[li].rho_h * layers[li].lambda);
    for (int j = 0; j < m.ny; ++j)
      for (int i = 0; i < m.nx; ++i) {
        m.rho_h[m.idx(i, j, k)] = rh;
        m.rho_v[m.idx(i, j, k)] = rv;
      }
  }
  const int b[3] = {grid.x().interior_node_begin(), grid.y().interior_node_begin(),
                    grid.z().interior_node_begin()};
  m.xnodes.assign(grid.x().ref.begin() + b[0], grid.x().ref.begin() + b[0] + m.nx);
  m.ynodes.assign(grid.y().ref.begin() + b[1], grid.y().ref.begin() + b[1] + m.ny);
  m.znodes.assign(grid.z().ref.begin() + b[2], grid.z().ref.begin() + b[2] + m.nz);
  return m;
}

void set_box(ResistivityModel& model, const gridgen::StaggeredGrid3D& grid,
             double x0, double x1, double y0, double y1, double z0, double z1,
             double rho_h, double lambda) {
  const auto inside = [](double v, double a, double b) { return v >= a && v <= b; };
  const auto& gx = grid.x();
  const auto& gy = grid.y();
  const auto& gz = grid.z();
  for (int k = 0; k < model.nz; ++k) {
    const double z = gz.ref[gz.interior_node_begin() + k];
    if (!inside(z, z0, z1)) continue;
    for (int j = 0; j < model.ny; ++j) {
      const double y = gy.ref[gy.interior_node_begin() + j];
      if (!inside(y, y0, y1)) continue;
      for (int i = 0; i < model.nx; ++i) {
        const double x = gx.ref[gx.interior_node_begin() + i];
        if (!inside(x, x0, x1)) continue;
        model.rho_h[model.idx(i, j, k)] = static_cast<float>(rho_h);
        model.rho_v[model.idx(i, j, k)] = static_cast<float>(rho_h * lambda);
      }
    }
  }
}

namespace {

void check_model_coords(const std::vector<double>& declared, const gridgen::Axis1D& axis,
                        const char* name) {
  if (declared.empty()) return;
  if (static_cast<int>(declared.size()) != axis.interior_node_count())
    throw std::runtime_error(std::string("medium: ") + name +
                             " coordinate count does not match grid interior");
  const double span =
      std::max(axis.interior_max() - axis.interior_min(), 1e-300);
  for (int i = 0; i < axis.interior_node_count(); ++i) {
    if (std::abs(declared[i] - axis.ref[axis.interior_node_begin() + i]) > 1e-9 * span)
      throw std::runtime_error(std::string("medium: ") + name +
                               " coordinates do not match grid interior");
  }
}

}  // namespace

FictitiousMedium to_fictitious(const ResistivityModel& model,
                               const gridgen::StaggeredGrid3D& grid, double omega0) {
  if (!(omega0 > 0.0)) throw std::invalid_argument("medium: omega0 must be positive");
  const gridgen::Axis1D& gx = grid.x();
  const gridgen::Axis1D& gy = grid.y();
  const gridgen::Axis1D& gz = grid.z();
  if (model.nx != gx.interior_node_count() || model.ny != gy.interior_node_count() ||
      model.nz != gz.interior_node_count())
    throw std::invalid_argument("medium: model dims do not match grid interior");
  check_model_coords(model.xnodes, gx, "x");
  check_model_coords(model.ynodes, gy, "y");
  check_model_coords(model.znodes, gz, "z");

  const int NX = gx.nref(), NY = gy.nref(), NZ = gz.nref();
  const int bx = gx.interior_node_begin(), by = gy.interior_node_begin(),
            bz = gz.interior_node_begin();

  // conductivity at a full-grid node, PML nodes clamped to the interior edge
  const auto clampi = [](int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); };
  const auto sigma_at = [&](const std::vector<float>& rho, int i, int j, int k) -> double {
    const size_t n = model.idx(clampi(i - bx, model.nx), clampi(j - by, model.ny),
                               clampi(k - bz, model.nz));
    const double r = rho[n];
    if (!(r > 0.0) || !std::isfinite(r))
      throw std::invalid_argument("medium: nonpositive resistivity");
    if (model.rho_h[n] >= kAirResistivity) return 0.0;  // air
    return 1.0 / r;
  };
  const auto harmonic = [](double a, double b) {
    return (a > 0.0 && b > 0.0) ? 2.0 * a * b / (a + b) : 0.0;
  };

  FictitiousMedium fm;
  fm.mu = model.mu;
  fm.omega0 = omega0;
  fm.eps_xx = Field3(NX - 1, NY, NZ);
  fm.eps_yy = Field3(NX, NY - 1, NZ);
  fm.eps_zz = Field3(NX, NY, NZ - 1);

  const double inv2w0 = 1.0 / (2.0 * omega0);
  for (int k = 0; k < NZ; ++k)
    for (int j = 0; j < NY; ++j)
      for (int i = 0; i < NX - 1; ++i)
        fm.eps_xx(i, j, k) =
            harmonic(sigma_at(model.rho_h, i, j, k), sigma_at(model.rho_h, i + 1, j, k)) * inv2w0;
  for (int k = 0; k < NZ; ++k)
    for (int j = 0; j < NY - 1; ++j)
      for (int i = 0; i < NX; ++i)
        fm.eps_yy(i, j, k) =
            harmonic(sigma_at(model.rho_h, i, j, k), sigma_at(model.rho_h, i, j + 1, k)) * inv2w0;
  for (int k = 0; k < NZ - 1; ++k)
    for (int j = 0; j < NY; ++j)
      for (int i = 0; i < NX; ++i)
        fm.eps_zz(i, j, k) =
            harmonic(sigma_at(model.rho_v, i, j, k), sigma_at(model.rho_v, i, j, k + 1)) * inv2w0;

  double c2_max = 0.0, c2_min = std::numeric_limits<double>::infinity();
  const auto scan = [&](const Field3& eps) {
    for (size_t n = 0; n < eps.size(); ++n) {
      const double e = eps[n];
      if (e > 0.0) {
        const double c2 = 1.0 / (fm.mu * e);
        c2_max = std::max(c2_max, c2);
        c2_min = std::min(c2_min, c2);
      }
    }
  };
  scan(fm.eps_xx);
  scan(fm.eps_yy);
  scan(fm.eps_zz);
  if (!(c2_max > 0.0)) throw std::invalid_argument("medium: model is all air");
  fm.c_max = std::sqrt(c2_max);
  fm.c_min = std::sqrt(c2_min);
  return fm;
}

}  // namespace emfd::medium
