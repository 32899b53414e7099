#pragma once

#include <string>
#include <vector>

#include "dyadlab/embodied.hpp"
#include "dyadlab/engine_discrete.hpp"
#include "dyadlab/metrics.hpp"
#include "json.hpp"

namespace dyadlab {

inline constexpr const char* kDyadlabVersion = "0.1.0";

enum class RunMode { Discrete, Continuous };

std::string to_string(RunMode m);
RunMode run_mode_from_string(const std::string& s);

/// A complete run description. The default is the full tournament: every
/// learning model against each fixed opponent and the learning baseline,
/// across all five games.
struct RunConfig {
  RunMode mode = RunMode::Discrete;
  ExperimentGrid grid;
  ArenaConfig arena;            // used in continuous mode only
  SurprisalEstimator estimator = SurprisalEstimator::Cumulative;
  std::string output_dir = "out";
  bool emit_trajectories = false;
  bool emit_plots = false;
};

/// The tournament grid: original/rational/predictive/others_model against
/// greedy/nice/tft/original over the five payoff orderings, 50 dyads of
/// 1000 rounds each.
RunConfig default_run_config();

struct ConfigLoad {
  RunConfig config;
  std::vector<std::string> errors;  // empty iff the config is usable
};

/// Parses and validates a config JSON value, collecting every problem
/// rather than stopping at the first. Unknown keys are errors. Absent keys
/// fall back to the defaults of default_run_config().
ConfigLoad parse_config(const nlohmann::json& j);

/// parse_config on the contents of `path`; unreadable or unparsable files
/// yield a single explanatory error. A manifest file works as a config: its
/// embedded config echo is loaded.
ConfigLoad load_config(const std::string& path);

/// Canonical JSON form; load of a serialized config reproduces it exactly.
nlohmann::json serialize_config(const RunConfig& config);

}  // namespace dyadlab
