#include "dyadlab/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace dyadlab {

namespace {

/// Tracks which keys of one JSON object were consumed, so leftovers can be
/// reported as unknown fields instead of being silently ignored.
struct ObjectReader {
  const nlohmann::json& object;
  std::string path;  // "" for the root, "grid." for nested objects
  std::vector<std::string>& errors;
  std::set<std::string> seen = {};

  const nlohmann::json* get(const std::string& key) {
    seen.insert(key);
    auto it = object.find(key);
    return it == object.end() ? nullptr : &*it;
  }

  void finish() {
    for (const auto& item : object.items())
      if (!seen.count(item.key()))
        errors.push_back(path + item.key() + ": unknown field");
  }

  void read_double(const char* key, double& out) {
    if (const auto* v = get(key)) {
      if (v->is_number())
        out = v->get<double>();
      else
        errors.push_back(path + key + ": expected a number");
    }
  }

  void read_int(const char* key, int& out) {
    if (const auto* v = get(key)) {
      if (v->is_number_integer())
        out = v->get<int>();
      else
        errors.push_back(path + key + ": expected an integer");
    }
  }

  void read_u64(const char* key, std::uint64_t& out) {
    if (const auto* v = get(key)) {
      if (v->is_number_unsigned() ||
          (v->is_number_integer() && v->get<std::int64_t>() >= 0))
        out = v->get<std::uint64_t>();
      else
        errors.push_back(path + key + ": expected a nonnegative integer");
    }
  }

  void read_bool(const char* key, bool& out) {
    if (const auto* v = get(key)) {
      if (v->is_boolean())
        out = v->get<bool>();
      else
        errors.push_back(path + key + ": expected a boolean");
    }
  }

  void read_string(const char* key, std::string& out) {
    if (const auto* v = get(key)) {
      if (v->is_string())
        out = v->get<std::string>();
      else
        errors.push_back(path + key + ": expected a string");
    }
  }

  /// Applies `parse` (any of the from_string lookups) to a string field,
  /// reporting the lookup's own message on failure.
  template <typename T, typename Parse>
  void read_named(const char* key, T& out, Parse parse) {
    if (const auto* v = get(key)) {
      if (!v->is_string()) {
        errors.push_back(path + key + ": expected a string");
        return;
      }
      try {
        out = parse(v->get<std::string>());
      } catch (const std::invalid_argument& ex) {
        errors.push_back(path + key + ": " + ex.what());
      }
    }
  }
};

void parse_phenotype_list(ObjectReader& r, const char* key,
                          std::vector<Phenotype>& out) {
  const auto* v = r.get(key);
  if (!v) return;
  if (!v->is_array()) {
    r.errors.push_back(r.path + key + ": expected an array of names");
    return;
  }
  std::vector<Phenotype> parsed;
  bool ok = true;
  for (size_t i = 0; i < v->size(); ++i) {
    const auto& item = (*v)[i];
    std::string slot = r.path + key + "[" + std::to_string(i) + "]";
    if (!item.is_string()) {
      r.errors.push_back(slot + ": expected a name");
      ok = false;
      continue;
    }
    try {
      parsed.push_back(phenotype_from_string(item.get<std::string>()));
    } catch (const std::invalid_argument& ex) {
      r.errors.push_back(slot + ": " + ex.what());
      ok = false;
    }
  }
  if (ok) out = std::move(parsed);
}

void parse_game_list(ObjectReader& r, const char* key,
                     std::vector<Game>& out) {
  const auto* v = r.get(key);
  if (!v) return;
  if (!v->is_array()) {
    r.errors.push_back(r.path + key + ": expected an array of names");
    return;
  }
  std::vector<Game> parsed;
  bool ok = true;
  for (size_t i = 0; i < v->size(); ++i) {
    const auto& item = (*v)[i];
    std::string slot = r.path + key + "[" + std::to_string(i) + "]";
    if (!item.is_string()) {
      r.errors.push_back(slot + ": expected a name");
      ok = false;
      continue;
    }
    try {
      parsed.push_back(builtin_game(item.get<std::string>()));
    } catch (const std::invalid_argument& ex) {
      r.errors.push_back(slot + ": " + ex.what());
      ok = false;
    }
  }
  if (ok) out = std::move(parsed);
}

void parse_zone(const nlohmann::json& j, const std::string& path, Zone& out,
                std::vector<std::string>& errors) {
  if (!j.is_object()) {
    errors.push_back(path + ": expected an object");
    return;
  }
  ObjectReader r{j, path + ".", errors};
  r.read_double("cx", out.cx);
  r.read_double("cy", out.cy);
  r.read_double("visual_radius", out.visual_radius);
  r.read_double("detect_radius", out.detect_radius);
  r.finish();
}

void parse_pose(const nlohmann::json& j, const std::string& path, Pose& out,
                std::vector<std::string>& errors) {
  if (!j.is_object()) {
    errors.push_back(path + ": expected an object");
    return;
  }
  ObjectReader r{j, path + ".", errors};
  r.read_double("x", out.x);
  r.read_double("y", out.y);
  r.read_double("theta", out.theta);
  r.finish();
}

void parse_arena(const nlohmann::json& j, ArenaConfig& out,
                 std::vector<std::string>& errors) {
  if (!j.is_object()) {
    errors.push_back("arena: expected an object");
    return;
  }
  ObjectReader r{j, "arena.", errors};
  if (const auto* v = r.get("coop_zone"))
    parse_zone(*v, "arena.coop_zone", out.coop_zone, errors);
  if (const auto* v = r.get("defect_zone"))
    parse_zone(*v, "arena.defect_zone", out.defect_zone, errors);
  if (const auto* v = r.get("start_pose_a"))
    parse_pose(*v, "arena.start_pose_a", out.start_pose_a, errors);
  if (const auto* v = r.get("start_pose_b"))
    parse_pose(*v, "arena.start_pose_b", out.start_pose_b, errors);
  r.read_double("dt", out.dt);
  r.read_int("max_steps_per_round", out.max_steps_per_round);
  r.read_double("sensor_range", out.sensor_range);
  r.read_double("base_speed", out.base_speed);
  r.read_double("axle", out.axle);
  r.read_double("w_exc", out.w_exc);
  r.read_double("w_inh", out.w_inh);
  r.read_double("monitor_threshold", out.monitor_threshold);
  r.read_int("monitor_debounce_steps", out.monitor_debounce_steps);
  r.finish();
}

nlohmann::json zone_json(const Zone& z) {
  return {{"cx", z.cx},
          {"cy", z.cy},
          {"visual_radius", z.visual_radius},
          {"detect_radius", z.detect_radius}};
}

nlohmann::json pose_json(const Pose& p) {
  return {{"x", p.x}, {"y", p.y}, {"theta", p.theta}};
}

}  // namespace

std::string to_string(RunMode m) {
  return m == RunMode::Discrete ? "discrete" : "continuous";
}

RunMode run_mode_from_string(const std::string& s) {
  if (s == "discrete") return RunMode::Discrete;
  if (s == "continuous") return RunMode::Continuous;
  throw std::invalid_argument("unknown mode: " + s +
                              " (expected discrete or continuous)");
}

RunConfig default_run_config() {
  RunConfig config;
  config.grid.models = {Phenotype::Original, Phenotype::Rational,
                        Phenotype::Predictive, Phenotype::OthersModel};
  config.grid.opponents = {Phenotype::Greedy, Phenotype::Nice,
                           Phenotype::TitForTat, Phenotype::Original};
  config.grid.games = builtin_games();
  return config;
}

ConfigLoad parse_config(const nlohmann::json& j) {
  ConfigLoad load;
  load.config = default_run_config();
  RunConfig& config = load.config;
  std::vector<std::string>& errors = load.errors;

  if (!j.is_object()) {
    errors.push_back("config root: expected a JSON object");
    return load;
  }

  ObjectReader root{j, "", errors};
  root.read_named("mode", config.mode, run_mode_from_string);

  bool arena_given = false;
  if (const auto* v = root.get("grid")) {
    if (!v->is_object()) {
      errors.push_back("grid: expected an object");
    } else {
      ObjectReader grid{*v, "grid.", errors};
      parse_phenotype_list(grid, "models", config.grid.models);
      parse_phenotype_list(grid, "opponents", config.grid.opponents);
      parse_game_list(grid, "games", config.grid.games);
      grid.read_int("dyads_per_cell", config.grid.dyads_per_cell);
      grid.read_int("rounds", config.grid.rounds);
      grid.read_u64("base_seed", config.grid.base_seed);
      grid.finish();
    }
  }
  if (const auto* v = root.get("learner")) {
    if (!v->is_object()) {
      errors.push_back("learner: expected an object");
    } else {
      ObjectReader learner{*v, "learner.", errors};
      learner.read_double("delta", config.grid.learner_params.delta);
      learner.read_double("alpha", config.grid.learner_params.alpha);
      learner.read_double("gamma", config.grid.learner_params.gamma);
      learner.read_double("temperature",
                          config.grid.learner_params.temperature);
      learner.finish();
    }
  }
  root.read_named("predictor_state", config.grid.predictor_state,
                  predictor_state_from_string);
  root.read_named("critic", config.grid.critic, critic_mode_from_string);
  root.read_named("estimator", config.estimator, estimator_from_string);
  if (const auto* v = root.get("arena")) {
    arena_given = true;
    parse_arena(*v, config.arena, errors);
  }
  root.read_string("output_dir", config.output_dir);
  root.read_bool("emit_trajectories", config.emit_trajectories);
  root.read_bool("emit_plots", config.emit_plots);
  root.finish();

  // Semantic checks belong after the structural pass so a field error does
  // not hide them.
  for (const auto& msg : validate_grid(config.grid))
    errors.push_back("grid: " + msg);
  for (const auto& msg : validate_arena(config.arena))
    errors.push_back("arena: " + msg);
  if (config.mode == RunMode::Continuous && !arena_given)
    errors.push_back("arena: required in continuous mode");
  if (config.mode == RunMode::Discrete && config.emit_trajectories)
    errors.push_back("emit_trajectories: requires continuous mode");
  if (config.output_dir.empty())
    errors.push_back("output_dir: must not be empty");
  return load;
}

ConfigLoad load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ConfigLoad load;
    load.config = default_run_config();
    load.errors.push_back("cannot open config file: " + path);
    return load;
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& ex) {
    ConfigLoad load;
    load.config = default_run_config();
    load.errors.push_back(path + ": " + ex.what());
    return load;
  }
  // A manifest carries the config it was produced from; accept it directly
  // so a run can be reproduced from its own output.
  if (j.is_object() && j.contains("config")) return parse_config(j["config"]);
  return parse_config(j);
}

nlohmann::json serialize_config(const RunConfig& config) {
  nlohmann::json models = nlohmann::json::array();
  for (auto p : config.grid.models) models.push_back(to_string(p));
  nlohmann::json opponents = nlohmann::json::array();
  for (auto p : config.grid.opponents) opponents.push_back(to_string(p));
  nlohmann::json games = nlohmann::json::array();
  for (const auto& g : config.grid.games) games.push_back(g.name());

  return {
      {"mode", to_string(config.mode)},
      {"grid",
       {{"models", models},
        {"opponents", opponents},
        {"games", games},
        {"dyads_per_cell", config.grid.dyads_per_cell},
        {"rounds", config.grid.rounds},
        {"base_seed", config.grid.base_seed}}},
      {"learner",
       {{"delta", config.grid.learner_params.delta},
        {"alpha", config.grid.learner_params.alpha},
        {"gamma", config.grid.learner_params.gamma},
        {"temperature", config.grid.learner_params.temperature}}},
      {"predictor_state", to_string(config.grid.predictor_state)},
      {"critic", to_string(config.grid.critic)},
      {"estimator", to_string(config.estimator)},
      {"arena",
       {{"coop_zone", zone_json(config.arena.coop_zone)},
        {"defect_zone", zone_json(config.arena.defect_zone)},
        {"start_pose_a", pose_json(config.arena.start_pose_a)},
        {"start_pose_b", pose_json(config.arena.start_pose_b)},
        {"dt", config.arena.dt},
        {"max_steps_per_round", config.arena.max_steps_per_round},
        {"sensor_range", config.arena.sensor_range},
        {"base_speed", config.arena.base_speed},
        {"axle", config.arena.axle},
        {"w_exc", config.arena.w_exc},
        {"w_inh", config.arena.w_inh},
        {"monitor_threshold", config.arena.monitor_threshold},
        {"monitor_debounce_steps", config.arena.monitor_debounce_steps}}},
      {"output_dir", config.output_dir},
      {"emit_trajectories", config.emit_trajectories},
      {"emit_plots", config.emit_plots},
  };
}

}  // namespace dyadlab
