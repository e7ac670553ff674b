// emfd command line front end: batch forward runs and error panels.

#include <CLI11.hpp>

#include <iostream>

#include "emfd/config.hpp"
#include "emfd/run.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSetup = 3;
constexpr int kExitUnstable = 4;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"emfd - 3D frequency-domain CSEM forward modelling by "
               "fictitious wave-domain FDTD on nonuniform staggered grids"};
  app.require_subcommand(1);

  std::string config_path, out_dir, ref_path, run_dir;
  int threads = -1;
  bool verbose = false;

  CLI::App* cmd_run = app.add_subcommand("run", "execute a forward model run");
  cmd_run->add_option("-c,--config", config_path, "run configuration file")->required();
  cmd_run->add_option("-o,--out", out_dir, "output directory (overrides output.dir)");
  cmd_run->add_option("--threads", threads, "worker thread count override");
  cmd_run->add_flag("-v,--verbose", verbose, "checkpoint progress lines on stderr");

  CLI::App* cmd_panel =
      app.add_subcommand("error-panel", "ratio/phase panels of a run against a reference");
  cmd_panel->add_option("run_dir", run_dir, "directory holding the run's receiver tables")
      ->required();
  cmd_panel->add_option("reference", ref_path, "directory holding reference tables")
      ->required();
  cmd_panel->add_option("-o,--out", out_dir, "panel output directory (default: run_dir)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      emfd::config::RunConfig cfg;
      try {
        cfg = emfd::config::parse_config_file(config_path);
      } catch (const emfd::config::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kExitConfig;
      }
      if (threads >= 0) cfg.threads = threads;
      if (!out_dir.empty()) cfg.output_dir = out_dir;

      emfd::run::RunOutcome out;
      try {
        out = emfd::run::execute(cfg, &std::cerr, verbose);
      } catch (const emfd::config::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kExitConfig;
      } catch (const emfd::run::SetupError& e) {
        std::cerr << e.what() << '\n';
        return kExitSetup;
      }
      emfd::run::write_outputs(out, cfg, cfg.output_dir);
      if (out.loop.aborted_unstable) {
        std::cerr << "run aborted: field blow-up detected at step " << out.loop.steps
                  << " (max |E'| = " << out.loop.final_max_e << ")\n";
        return kExitUnstable;
      }
      std::cerr << "run finished: " << out.loop.steps << " steps, "
                << (out.loop.converged ? "converged" : "step cap reached") << ", outputs in "
                << cfg.output_dir << '\n';
      return 0;
    }
    if (cmd_panel->parsed()) {
      emfd::run::error_panel(run_dir, ref_path, out_dir.empty() ? run_dir : out_dir);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}
