/// @file config.hpp
/// @brief Flat key=value run configuration.
///
/// Keys (one per line, '#' starts a comment):
///   grid.origin        = <x> <y> <z>       first interior node per axis
///   axis.x|y|z         = u <span> <cells> [; s <span> <dx0> <cells> ...]
///   fd.half_length     = 1..4              (spatial order 2L)
///   pml.layers/r0/order/kappa_max/alpha_scale/enabled
///   airwave            = true|false
///   freqs              = <Hz...>           ascending
///   omega0             = auto | <Hz>
///   model.file         = <header path>     (payload: model.data or
///   model.data         = <payload path>     header path with .emmd)
///   model.layers       = <z_top> <rho_h> <lambda> [; ...]
///   mu                 = <H/m>
///   source.position    = <x> <y> <z>
///   source.axis        = x|y|z
///   source.moment      = <A m>
///   source.center_freq = auto | <Hz>
///   rx                 = <x> <y> <z>        (repeatable)
///   rx.file            = <path>             (x y z per line)
///   rx.components      = Ex [Ey Ez Hx Hy Hz]
///   time.safety / time.max_multiplier / time.max_s
///   convergence.tol / convergence.cadence
///   instability.factor
///   threads / output.dir / reference.dir

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "emfd/gridgen.hpp"
#include "emfd/medium.hpp"
#include "emfd/spectral.hpp"

namespace emfd::config {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

struct RunConfig {
  double origin[3] = {0.0, 0.0, 0.0};
  std::vector<gridgen::AxisSegment> segments[3];
  int half_length = 2;

  int pml_layers = 12;
  double pml_r0 = 1e-3;
  int pml_order = 2;
  double pml_kappa_max = 1.0;
  double pml_alpha_scale = 1.0;
  bool pml_enabled = true;
  bool airwave = false;

  std::vector<double> freqs_hz;
  double omega0_hz = 0.0;  // 0 = auto: lowest requested frequency

  std::string model_file, model_data;
  std::vector<medium::Layer> layers;
  double mu = medium::kMu0;

  double source_position[3] = {0.0, 0.0, 0.0};
  int source_axis = 0;
  double source_moment = 1.0;
  double source_center_freq = 0.0;  // 0 = auto

  std::vector<kernel::Receiver> receivers;
  std::vector<kernel::Component> components{kernel::Component::Ex};

  double time_safety = 0.9;
  double time_max_multiplier = 4.0;
  double time_max_s = 0.0;  // 0 = auto
  double convergence_tol = 1e-5;
  int convergence_cadence = 100;
  double instability_factor = 1e6;
  int threads = 0;
  std::string output_dir = "out";
  std::string reference_dir;

  // parsed key/value pairs in file order, echoed into the run manifest
  std::vector<std::pair<std::string, std::string>> raw;
};

RunConfig parse_config_text(const std::string& text, const std::string& base_dir = "");
RunConfig parse_config_file(const std::string& path);

}  // namespace emfd::config
