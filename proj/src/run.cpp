#include "emfd/run.hpp"

#include "emfd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace emfd::run {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

gridgen::Axis1D build_axis_from_cfg(const config::RunConfig& cfg, int a) {
  // PML cells stay in the geometry even with absorption disabled: the
  // padding is what guarantees complete interior stencils
  const int pml = cfg.pml_layers;
  const bool open_top = (a == 2) && cfg.airwave;
  return gridgen::build_axis(cfg.origin[a], cfg.segments[a], open_top ? 0 : pml, pml);
}

}  // namespace

std::string receiver_table_name(double freq_hz) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "rx_f%g.csv", freq_hz);
  return buf;
}

RunOutcome execute(const config::RunConfig& cfg, std::ostream* log, bool verbose) {
#ifdef _OPENMP
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif
  RunOutcome out;
  try {
    out.grid = gridgen::assemble_grid(build_axis_from_cfg(cfg, 0), build_axis_from_cfg(cfg, 1),
                                      build_axis_from_cfg(cfg, 2), cfg.half_length,
                                      cfg.airwave);
  } catch (const std::exception& e) {
    throw config::ConfigError(std::string("grid construction failed: ") + e.what());
  }
  for (int a = 0; a < 3; ++a) {
    int idx = 0;
    for (const auto& reg : out.grid.axis[a].regions) {
      if (reg.kind == gridgen::RegionKind::Stretched) {
        char name[16];
        std::snprintf(name, sizeof name, "%c.%d", 'x' + a, idx);
        out.stretch_factors.emplace_back(name, reg.r);
      }
      ++idx;
    }
  }

  medium::ResistivityModel model;
  if (!cfg.model_file.empty()) {
    model = medium::model_ingest(cfg.model_file, cfg.model_data);
    model.mu = cfg.mu;
  } else {
    model = medium::layered_model(out.grid, cfg.layers, cfg.mu);
  }
  out.freqs_hz = cfg.freqs_hz;
  out.omega0 = 2.0 * std::numbers::pi *
               (cfg.omega0_hz > 0.0 ? cfg.omega0_hz : cfg.freqs_hz.front());

  medium::FictitiousMedium med;
  kernel::Tables tables;
  kernel::StabilityReport rep;
  try {
    med = medium::to_fictitious(model, out.grid, out.omega0);
    tables = kernel::build_tables(out.grid);
    rep = kernel::timestep_bound(tables, med.c_max, cfg.time_safety);
  } catch (const std::exception& e) {
    throw SetupError(std::string("setup failed: ") + e.what());
  }
  out.stability = rep;

  double max_cell = 0.0;
  for (int a = 0; a < 3; ++a)
    for (double d : out.grid.axis[a].dcell) max_cell = std::max(max_cell, d);
  out.source_center_freq = cfg.source_center_freq > 0.0
                               ? cfg.source_center_freq
                               : med.c_min / (10.0 * max_cell);

  kernel::KernelOptions kopt;
  kopt.cpml.enabled = cfg.pml_enabled;
  kopt.cpml.layers = cfg.pml_layers;
  kopt.cpml.r0 = cfg.pml_r0;
  kopt.cpml.grading_order = cfg.pml_order;
  kopt.cpml.kappa_max = cfg.pml_kappa_max;
  kopt.cpml.alpha_scale = cfg.pml_alpha_scale;
  kopt.dt = rep.dt;
  kopt.f_source = out.source_center_freq;

  kernel::DipoleSpec dipole;
  dipole.position = {cfg.source_position[0], cfg.source_position[1], cfg.source_position[2]};
  dipole.axis = cfg.source_axis;
  dipole.waveform = kernel::SourceWaveform::design(out.source_center_freq, cfg.source_moment);
  out.source_end_time = dipole.waveform.end_time();

  std::vector<kernel::SampleEntry> entries;
  kernel::SpectralAccumulator acc;
  std::unique_ptr<kernel::Kernel> eng;
  try {
    eng = std::make_unique<kernel::Kernel>(out.grid, med, tables, kopt);
    eng->set_dipole(dipole);
    entries = kernel::build_sample_entries(out.grid, cfg.receivers, cfg.components);
    acc = kernel::SpectralAccumulator(cfg.freqs_hz, out.omega0, rep.dt,
                                      static_cast<int>(entries.size()));
  } catch (const std::exception& e) {
    throw SetupError(std::string("setup failed: ") + e.what());
  }

  double tmax = cfg.time_max_s;
  if (!(tmax > 0.0)) {
    double diag = 0.0;
    for (int a = 0; a < 3; ++a) {
      const auto& ax = out.grid.axis[a];
      const double span = ax.interior_max() - ax.interior_min();
      diag += span * span;
    }
    tmax = cfg.time_max_multiplier * std::sqrt(diag) / med.c_min;
    tmax = std::max(tmax, 2.0 * out.source_end_time);
  }
  out.steps_cap = static_cast<long>(std::ceil(tmax / rep.dt));

  kernel::TimeLoopOptions lopt;
  lopt.max_steps = out.steps_cap;
  lopt.cadence = cfg.convergence_cadence;
  lopt.convergence_tol = cfg.convergence_tol;
  lopt.instability_factor = cfg.instability_factor;
  lopt.verbose = verbose;
  out.loop = kernel::run_time_loop(*eng, acc, entries, lopt, log);

  const auto spectrum = kernel::waveform_spectrum(dipole.waveform, acc);
  out.green = kernel::green_functions(acc, entries, spectrum);
  out.receivers = cfg.receivers;
  out.components = cfg.components;
  return out;
}

void write_outputs(const RunOutcome& out, const config::RunConfig& cfg,
                   const std::string& outdir) {
  namespace fs = std::filesystem;
  fs::create_directories(outdir);

  for (size_t m = 0; m < out.freqs_hz.size(); ++m) {
    std::ofstream tab(outdir + "/" + receiver_table_name(out.freqs_hz[m]));
    tab << "x,y,z,component,re,im,amplitude,phase_deg,flag\n";
    for (const auto& g : out.green) {
      if (g.freq_hz != out.freqs_hz[m]) continue;
      const auto& rx = out.receivers[g.receiver];
      const double amp = std::abs(g.value);
      const double ph = std::arg(g.value) * 180.0 / std::numbers::pi;
      tab << fmt(rx.x) << ',' << fmt(rx.y) << ',' << fmt(rx.z) << ','
          << kernel::component_name(g.component) << ',' << fmt(g.value.real()) << ','
          << fmt(g.value.imag()) << ',' << fmt(amp) << ',' << fmt(ph) << ','
          << (g.reliable ? "ok" : "low_source") << '\n';
    }
  }

  gridgen::write_axis_sidecar(out.grid.x(), outdir + "/axis_x.txt");
  gridgen::write_axis_sidecar(out.grid.y(), outdir + "/axis_y.txt");
  gridgen::write_axis_sidecar(out.grid.z(), outdir + "/axis_z.txt");

  std::ofstream man(outdir + "/manifest.txt");
  for (const auto& [k, v] : cfg.raw) man << "config." << k << " = " << v << '\n';
  for (int a = 0; a < 3; ++a) {
    man << "grid.nref." << static_cast<char>('x' + a) << " = "
        << out.grid.axis[a].nref() << '\n';
    man << "grid.interior." << static_cast<char>('x' + a) << " = "
        << out.grid.axis[a].interior_node_count() << '\n';
  }
  for (const auto& [name, r] : out.stretch_factors)
    man << "grid.stretch_r." << name << " = " << fmt(r) << '\n';
  man << "stability.dmax_x = " << fmt(out.stability.dmax[0]) << '\n';
  man << "stability.dmax_y = " << fmt(out.stability.dmax[1]) << '\n';
  man << "stability.dmax_z = " << fmt(out.stability.dmax[2]) << '\n';
  man << "stability.c_max = " << fmt(out.stability.c_max) << '\n';
  man << "stability.dt_bound = " << fmt(out.stability.dt_bound) << '\n';
  man << "stability.dt = " << fmt(out.stability.dt) << '\n';
  man << "stability.safety = " << fmt(out.stability.safety) << '\n';
  man << "omega0_rad_s = " << fmt(out.omega0) << '\n';
  man << "source.center_freq_hz = " << fmt(out.source_center_freq) << '\n';
  man << "source.end_time_s = " << fmt(out.source_end_time) << '\n';
  man << "time.steps = " << out.loop.steps << '\n';
  man << "time.steps_cap = " << out.steps_cap << '\n';
  man << "time.converged = " << (out.loop.converged ? "true" : "false") << '\n';
  man << "time.aborted_unstable = " << (out.loop.aborted_unstable ? "true" : "false") << '\n';
  man << "time.wall_seconds = " << fmt(out.loop.wall_seconds) << '\n';
  man << "time.per_step_seconds = " << fmt(out.loop.per_step_seconds) << '\n';
  man << "convergence.history =";
  for (const auto& [step, metric] : out.loop.history) man << ' ' << step << ':' << fmt(metric);
  man << '\n';

  if (!cfg.reference_dir.empty()) error_panel(outdir, cfg.reference_dir, outdir);
}

namespace {

struct TableRow {
  double x, y, z;
  std::string component;
  std::complex<double> value;
};

std::vector<TableRow> read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("error-panel: cannot open " + path);
  std::vector<TableRow> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    TableRow r;
    double re, im;
    if (!(ss >> r.x >> r.y >> r.z >> r.component >> re >> im))
      throw std::runtime_error("error-panel: malformed row in " + path);
    r.value = {re, im};
    rows.push_back(r);
  }
  return rows;
}

std::map<std::string, std::string> read_manifest(const std::string& path) {
  std::ifstream in(path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string k = line.substr(0, eq);
    std::string v = line.substr(eq + 1);
    while (!k.empty() && k.back() == ' ') k.pop_back();
    while (!v.empty() && v.front() == ' ') v.erase(v.begin());
    kv[k] = v;
  }
  return kv;
}

}  // namespace

void error_panel(const std::string& run_dir, const std::string& reference_dir,
                 const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  double sx = 0.0, sy = 0.0;
  const auto man = read_manifest(run_dir + "/manifest.txt");
  if (auto it = man.find("config.source.position"); it != man.end()) {
    std::string s = it->second;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream ss(s);
    double sz;
    ss >> sx >> sy >> sz;
  }

  bool any = false;
  for (const auto& entry : fs::directory_iterator(run_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("rx_f", 0) != 0 || name.find(".csv") == std::string::npos) continue;
    const std::string ref_path = reference_dir + "/" + name;
    if (!fs::exists(ref_path))
      throw std::runtime_error("error-panel: reference table missing: " + ref_path);
    const auto fd = read_table(entry.path().string());
    const auto ref = read_table(ref_path);
    if (fd.size() != ref.size())
      throw std::runtime_error("error-panel: receiver geometry mismatch in " + name);
    std::vector<std::complex<double>> fv, rv;
    std::vector<double> offs;
    for (size_t i = 0; i < fd.size(); ++i) {
      const auto& a = fd[i];
      const auto& b = ref[i];
      if (std::abs(a.x - b.x) > 1e-6 || std::abs(a.y - b.y) > 1e-6 ||
          std::abs(a.z - b.z) > 1e-6 || a.component != b.component)
        throw std::runtime_error("error-panel: receiver geometry mismatch in " + name);
      fv.push_back(a.value);
      rv.push_back(b.value);
      offs.push_back(std::hypot(a.x - sx, a.y - sy));
    }
    const auto errs = oracle::amplitude_phase_errors(fv, rv);
    std::ofstream outf(out_dir + "/error_" + name.substr(3));
    outf << "offset,ratio,dphase_deg\n";
    for (size_t i = 0; i < errs.size(); ++i) {
      if (!errs[i]) continue;
      outf << fmt(offs[i]) << ',' << fmt(errs[i]->ratio) << ',' << fmt(errs[i]->dphase_deg)
           << '\n';
    }
    any = true;
  }
  if (!any) throw std::runtime_error("error-panel: no receiver tables found in " + run_dir);
}

}  // namespace emfd::run
