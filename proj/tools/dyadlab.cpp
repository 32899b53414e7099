#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "dyadlab/report.hpp"
#include "dyadlab/run_io.hpp"

namespace {

/// Best-effort: does the file itself pin an output directory? Used to keep
/// the DYADLAB_OUT fallback below an explicit config value. Parse errors
/// are reported by load_config, not here.
bool file_sets_output_dir(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return false;
  if (j.contains("config") && j["config"].is_object())
    return j["config"].contains("output_dir");
  return j.contains("output_dir");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dyadlab: paired-agent game tournaments, scripted opponents, "
               "and an embodied arena"};
  app.set_version_flag("--version", dyadlab::kDyadlabVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string run_dir;
  std::string out_dir;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool trajectories = false;
  bool plots = false;

  CLI::App* run = app.add_subcommand("run", "Execute a configured run");
  run->add_option("config", config_path, "JSON config (or manifest) file")
      ->required();
  CLI::Option* seed_opt =
      run->add_option("--seed", seed, "Override the base seed");
  run->add_option("--jobs", jobs, "Worker threads per cell")
      ->check(CLI::PositiveNumber);
  CLI::Option* out_opt =
      run->add_option("--out", out_dir, "Output directory");
  run->add_flag("--trajectories", trajectories,
                "Also write per-step pose CSVs (continuous mode)");
  run->add_flag("--plots", plots, "Also render SVG charts");

  CLI::App* report = app.add_subcommand(
      "report", "Rebuild summary (and plots) from a finished run");
  report->add_option("run_dir", run_dir, "Directory a run wrote into")
      ->required();
  report->add_flag("--plots", plots, "Render SVG charts regardless of the "
                                     "run's own setting");

  CLI::App* validate =
      app.add_subcommand("validate", "Check a config file and exit");
  validate->add_option("config", config_path, "JSON config (or manifest) file")
      ->required();

  CLI11_PARSE(app, argc, argv);

  if (validate->parsed()) {
    dyadlab::ConfigLoad loaded = dyadlab::load_config(config_path);
    if (!loaded.errors.empty()) {
      for (const auto& msg : loaded.errors) std::cerr << msg << '\n';
      return 1;
    }
    std::cout << "ok\n";
    return 0;
  }

  if (report->parsed())
    return dyadlab::report_command(run_dir, plots, std::cerr);

  dyadlab::ConfigLoad loaded = dyadlab::load_config(config_path);
  if (!loaded.errors.empty()) {
    for (const auto& msg : loaded.errors) std::cerr << msg << '\n';
    return 1;
  }
  dyadlab::RunConfig config = loaded.config;
  if (seed_opt->count() > 0) config.grid.base_seed = seed;
  if (out_opt->count() > 0) {
    config.output_dir = out_dir;
  } else if (!file_sets_output_dir(config_path)) {
    if (const char* env = std::getenv("DYADLAB_OUT")) config.output_dir = env;
  }
  if (trajectories) config.emit_trajectories = true;
  if (plots) config.emit_plots = true;
  return dyadlab::run_command(config, jobs, std::cerr);
}
