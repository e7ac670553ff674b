/// @file run.hpp
/// @brief Orchestration: config -> grid -> medium -> stability -> time loop
/// -> per-frequency receiver tables, manifest, sidecars, error panels.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "emfd/config.hpp"
#include "emfd/kernel.hpp"

namespace emfd::run {

struct SetupError : std::runtime_error {
  explicit SetupError(const std::string& m) : std::runtime_error(m) {}
};
struct InstabilityError : std::runtime_error {
  explicit InstabilityError(const std::string& m) : std::runtime_error(m) {}
};

struct RunOutcome {
  gridgen::StaggeredGrid3D grid;
  kernel::StabilityReport stability;
  kernel::TimeLoopResult loop;
  std::vector<kernel::GreenRecord> green;
  std::vector<kernel::Receiver> receivers;
  std::vector<kernel::Component> components;
  std::vector<double> freqs_hz;
  double omega0 = 0.0;
  double source_center_freq = 0.0;
  double source_end_time = 0.0;
  long steps_cap = 0;
  std::vector<std::pair<std::string, double>> stretch_factors;  // "z.1" -> r
};

/// Build everything from the config and run the time loop.  Throws
/// config::ConfigError / SetupError; an unstable abort is reported in
/// outcome.loop (no throw) so callers can still inspect the run.
RunOutcome execute(const config::RunConfig& cfg, std::ostream* log = nullptr,
                   bool verbose = false);

/// Receiver tables (one per frequency), manifest, axis sidecars; error
/// panels when cfg.reference_dir is set.
void write_outputs(const RunOutcome& out, const config::RunConfig& cfg,
                   const std::string& outdir);

/// Ratio/phase panels of a run against a reference run directory holding
/// receiver tables with identical geometry.  Writes error_f<freq>.csv per
/// frequency into out_dir.
void error_panel(const std::string& run_dir, const std::string& reference_dir,
                 const std::string& out_dir);

std::string receiver_table_name(double freq_hz);

}  // namespace emfd::run
