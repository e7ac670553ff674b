#include "emfd/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace emfd::config {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<double> numbers(const std::string& v, const std::string& key) {
  std::string s = v;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream ss(s);
  std::vector<double> out;
  double x;
  while (ss >> x) out.push_back(x);
  if (!ss.eof()) throw ConfigError("config: bad number list for " + key);
  return out;
}

double number(const std::string& v, const std::string& key) {
  const auto n = numbers(v, key);
  if (n.size() != 1) throw ConfigError("config: expected one number for " + key);
  return n[0];
}

bool boolean(const std::string& v, const std::string& key) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw ConfigError("config: expected true/false for " + key);
}

std::vector<gridgen::AxisSegment> parse_segments(const std::string& v, const std::string& key) {
  std::vector<gridgen::AxisSegment> segs;
  std::istringstream parts(v);
  std::string part;
  while (std::getline(parts, part, ';')) {
    part = trim(part);
    if (part.empty()) continue;
    std::istringstream ss(part);
    std::string kind;
    ss >> kind;
    gridgen::AxisSegment seg;
    if (kind == "u" || kind == "uniform") {
      seg.kind = gridgen::RegionKind::Uniform;
      if (!(ss >> seg.span >> seg.cells))
        throw ConfigError("config: uniform segment needs <span> <cells> in " + key);
      seg.spacing = seg.span / seg.cells;
    } else if (kind == "s" || kind == "stretched") {
      seg.kind = gridgen::RegionKind::Stretched;
      if (!(ss >> seg.span >> seg.spacing >> seg.cells))
        throw ConfigError("config: stretched segment needs <span> <dx0> <cells> in " + key);
    } else {
      throw ConfigError("config: unknown segment kind '" + kind + "' in " + key);
    }
    segs.push_back(seg);
  }
  if (segs.empty()) throw ConfigError("config: no segments in " + key);
  return segs;
}

std::string join_path(const std::string& base, const std::string& p) {
  if (base.empty() || p.empty() || p.front() == '/') return p;
  return base + "/" + p;
}

int axis_index(const std::string& v, const std::string& key) {
  if (v == "x") return 0;
  if (v == "y") return 1;
  if (v == "z") return 2;
  throw ConfigError("config: expected x|y|z for " + key);
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& base_dir) {
  RunConfig cfg;
  bool have_axis[3] = {false, false, false};
  std::istringstream lines(text);
  std::string line;
  std::string rx_file;
  while (std::getline(lines, line)) {
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config: expected key = value: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty()) throw ConfigError("config: empty key or value: " + line);
    cfg.raw.emplace_back(key, val);

    if (key == "grid.origin") {
      const auto v = numbers(val, key);
      if (v.size() != 3) throw ConfigError("config: grid.origin needs 3 numbers");
      for (int a = 0; a < 3; ++a) cfg.origin[a] = v[a];
    } else if (key == "axis.x" || key == "axis.y" || key == "axis.z") {
      const int a = key[5] - 'x';
      cfg.segments[a] = parse_segments(val, key);
      have_axis[a] = true;
    } else if (key == "fd.half_length") {
      cfg.half_length = static_cast<int>(number(val, key));
    } else if (key == "pml.layers") {
      cfg.pml_layers = static_cast<int>(number(val, key));
    } else if (key == "pml.r0") {
      cfg.pml_r0 = number(val, key);
    } else if (key == "pml.order") {
      cfg.pml_order = static_cast<int>(number(val, key));
    } else if (key == "pml.kappa_max") {
      cfg.pml_kappa_max = number(val, key);
    } else if (key == "pml.alpha_scale") {
      cfg.pml_alpha_scale = number(val, key);
    } else if (key == "pml.enabled") {
      cfg.pml_enabled = boolean(val, key);
    } else if (key == "airwave") {
      cfg.airwave = boolean(val, key);
    } else if (key == "freqs") {
      cfg.freqs_hz = numbers(val, key);
    } else if (key == "omega0") {
      cfg.omega0_hz = (val == "auto") ? 0.0 : number(val, key);
    } else if (key == "model.file") {
      cfg.model_file = join_path(base_dir, val);
    } else if (key == "model.data") {
      cfg.model_data = join_path(base_dir, val);
    } else if (key == "model.layers") {
      std::istringstream parts(val);
      std::string part;
      while (std::getline(parts, part, ';')) {
        part = trim(part);
        if (part.empty()) continue;
        const auto v = numbers(part, key);
        if (v.size() != 3)
          throw ConfigError("config: layer needs <z_top> <rho_h> <lambda>");
        cfg.layers.push_back({v[0], v[1], v[2]});
      }
    } else if (key == "mu") {
      cfg.mu = number(val, key);
    } else if (key == "source.position") {
      const auto v = numbers(val, key);
      if (v.size() != 3) throw ConfigError("config: source.position needs 3 numbers");
      for (int a = 0; a < 3; ++a) cfg.source_position[a] = v[a];
    } else if (key == "source.axis") {
      cfg.source_axis = axis_index(val, key);
    } else if (key == "source.moment") {
      cfg.source_moment = number(val, key);
    } else if (key == "source.center_freq") {
      cfg.source_center_freq = (val == "auto") ? 0.0 : number(val, key);
    } else if (key == "rx") {
      const auto v = numbers(val, key);
      if (v.size() != 3) throw ConfigError("config: rx needs 3 numbers");
      cfg.receivers.push_back({v[0], v[1], v[2]});
    } else if (key == "rx.file") {
      rx_file = join_path(base_dir, val);
    } else if (key == "rx.components") {
      std::string s = val;
      std::replace(s.begin(), s.end(), ',', ' ');
      std::istringstream ss(s);
      std::string name;
      cfg.components.clear();
      while (ss >> name) cfg.components.push_back(kernel::component_from_name(name));
      if (cfg.components.empty()) throw ConfigError("config: rx.components empty");
    } else if (key == "time.safety") {
      cfg.time_safety = number(val, key);
    } else if (key == "time.max_multiplier") {
      cfg.time_max_multiplier = number(val, key);
    } else if (key == "time.max_s") {
      cfg.time_max_s = (val == "auto") ? 0.0 : number(val, key);
    } else if (key == "convergence.tol") {
      cfg.convergence_tol = number(val, key);
    } else if (key == "convergence.cadence") {
      cfg.convergence_cadence = static_cast<int>(number(val, key));
    } else if (key == "instability.factor") {
      cfg.instability_factor = number(val, key);
    } else if (key == "threads") {
      cfg.threads = static_cast<int>(number(val, key));
    } else if (key == "output.dir") {
      cfg.output_dir = join_path(base_dir, val);
    } else if (key == "reference.dir") {
      cfg.reference_dir = join_path(base_dir, val);
    } else {
      throw ConfigError("config: unknown key " + key);
    }
  }

  if (!have_axis[0] || !have_axis[1] || !have_axis[2])
    throw ConfigError("config: axis.x, axis.y and axis.z are all required");
  if (cfg.half_length < 1 || cfg.half_length > 4)
    throw ConfigError("config: fd.half_length must be 1..4 (order 2,4,6,8)");
  if (cfg.freqs_hz.empty()) throw ConfigError("config: freqs is required");
  for (size_t m = 0; m < cfg.freqs_hz.size(); ++m) {
    if (!(cfg.freqs_hz[m] > 0.0)) throw ConfigError("config: frequencies must be positive");
    if (m > 0 && !(cfg.freqs_hz[m] > cfg.freqs_hz[m - 1]))
      throw ConfigError("config: frequencies must ascend");
  }
  if (!cfg.model_file.empty() && !cfg.layers.empty())
    throw ConfigError("config: give model.file or model.layers, not both");
  if (cfg.model_file.empty() && cfg.layers.empty())
    throw ConfigError("config: a model is required (model.file or model.layers)");
  if (!cfg.model_file.empty() && cfg.model_data.empty()) {
    std::string d = cfg.model_file;
    const size_t dot = d.find_last_of('.');
    cfg.model_data = (dot == std::string::npos ? d : d.substr(0, dot)) + ".emmd";
  }
  if (!(cfg.time_safety > 0.0) || cfg.time_safety > 1.0)
    throw ConfigError("config: time.safety must be in (0, 1]");
  if (cfg.pml_layers < 0) throw ConfigError("config: pml.layers must be >= 0");
  if (cfg.convergence_cadence < 1) throw ConfigError("config: convergence.cadence >= 1");

  if (!rx_file.empty()) {
    std::ifstream in(rx_file);
    if (!in) throw ConfigError("config: cannot open rx.file " + rx_file);
    double x, y, z;
    while (in >> x >> y >> z) cfg.receivers.push_back({x, y, z});
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const size_t slash = path.find_last_of('/');
  return parse_config_text(ss.str(), slash == std::string::npos ? "" : path.substr(0, slash));
}

}  // namespace emfd::config
