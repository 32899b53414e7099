#include "dyadlab/run_io.hpp"

#include <charconv>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <system_error>

#include "dyadlab/report.hpp"

namespace dyadlab {

namespace fs = std::filesystem;

namespace {

double parse_double(const std::string& s, const std::string& where) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::runtime_error(where + ": bad number '" + s + "'");
  return value;
}

int parse_int(const std::string& s, const std::string& where) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::runtime_error(where + ": bad integer '" + s + "'");
  return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string opt_action(const std::optional<Action>& a) {
  return a ? action_code(*a) : "";
}

std::string opt_flag(const std::optional<bool>& b) {
  if (!b) return "";
  return *b ? "1" : "0";
}

void write_common_fields(std::string& row, int dyad, const RoundRecord& rec) {
  row += std::to_string(dyad);
  row += ',';
  row += std::to_string(rec.round);
  row += ',';
  row += action_code(rec.action_a);
  row += ',';
  row += action_code(rec.action_b);
  row += ',';
  row += to_string(rec.outcome_a);
  row += ',';
  row += to_string(rec.outcome_b);
  row += ',';
  row += format_number(rec.reward_a);
  row += ',';
  row += format_number(rec.reward_b);
  row += ',';
  row += opt_action(rec.prediction_a);
  row += ',';
  row += opt_action(rec.prediction_b);
  row += ',';
  row += opt_flag(rec.pred_correct_a);
  row += ',';
  row += opt_flag(rec.pred_correct_b);
}

RoundRecord read_common_fields(const std::vector<std::string>& fields,
                               const std::string& where, int& dyad_out) {
  dyad_out = parse_int(fields[0], where);
  RoundRecord rec;
  rec.round = parse_int(fields[1], where);
  try {
    rec.action_a = action_from_code(fields[2]);
    rec.action_b = action_from_code(fields[3]);
    rec.outcome_a = outcome_from_string(fields[4]);
    rec.outcome_b = outcome_from_string(fields[5]);
    if (!fields[8].empty()) rec.prediction_a = action_from_code(fields[8]);
    if (!fields[9].empty()) rec.prediction_b = action_from_code(fields[9]);
  } catch (const std::invalid_argument& ex) {
    throw std::runtime_error(where + ": " + ex.what());
  }
  rec.reward_a = parse_double(fields[6], where);
  rec.reward_b = parse_double(fields[7], where);
  if (!fields[10].empty()) rec.pred_correct_a = (fields[10] == "1");
  if (!fields[11].empty()) rec.pred_correct_b = (fields[11] == "1");
  return rec;
}

/// Both trigger spellings checked so a truncated flag field fails loudly.
bool parse_flag(const std::string& s, const std::string& where) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw std::runtime_error(where + ": bad flag '" + s + "'");
}

std::string trajectory_csv_name(const CellKey& key, int dyad_index) {
  return key.model + "__" + key.opponent + "__" + key.game + "__dyad" +
         std::to_string(dyad_index) + ".csv";
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

/// Every path a run with this config may produce, relative to output_dir.
/// Used to scrub partial output after a failure.
std::vector<fs::path> output_candidates(const RunConfig& config) {
  std::vector<fs::path> paths;
  paths.emplace_back("manifest.json");
  paths.emplace_back("summary.json");
  for (const auto& model : config.grid.models)
    for (const auto& opponent : config.grid.opponents)
      for (const auto& game : config.grid.games) {
        CellKey key{to_string(model), to_string(opponent), game.name()};
        paths.emplace_back(fs::path("cells") / cell_csv_name(key));
        if (config.emit_trajectories)
          for (int d = 0; d < config.grid.dyads_per_cell; ++d)
            paths.emplace_back(fs::path("trajectories") /
                               trajectory_csv_name(key, d));
        for (const char* metric : {"efficacy", "surprisal", "prediction"})
          paths.emplace_back(fs::path("plots") /
                             (std::string(metric) + "__" +
                              to_string(opponent) + ".svg"));
      }
  return paths;
}

void remove_outputs(const RunConfig& config) {
  std::error_code ec;
  fs::path dir(config.output_dir);
  for (const auto& rel : output_candidates(config)) fs::remove(dir / rel, ec);
  for (const char* sub : {"cells", "trajectories", "plots"})
    fs::remove(dir / sub, ec);  // succeeds only when empty
  fs::remove(dir, ec);
}

std::string trajectory_csv(const ContinuousDyadConfig& config) {
  std::string body = "round,step,seat,x,y,theta,committed\n";
  run_dyad_continuous(config, [&](const TrajectorySample& s) {
    body += std::to_string(s.round);
    body += ',';
    body += std::to_string(s.step);
    body += ',';
    body += std::to_string(s.seat);
    body += ',';
    body += format_number(s.x);
    body += ',';
    body += format_number(s.y);
    body += ',';
    body += format_number(s.theta);
    body += ',';
    body += action_code(s.committed);
    body += '\n';
  });
  return body;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{})
    throw std::logic_error("format_number: value does not fit");
  return std::string(buf, ptr);
}

std::string now_utc_iso8601() {
  std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

std::string action_code(Action a) {
  return a == Action::Cooperate ? "C" : "D";
}

Action action_from_code(const std::string& s) {
  if (s == "C") return Action::Cooperate;
  if (s == "D") return Action::Defect;
  throw std::invalid_argument("unknown action code: " + s);
}

std::string cell_csv_name(const CellKey& key) {
  return key.model + "__" + key.opponent + "__" + key.game + ".csv";
}

std::string discrete_csv_header() {
  return "dyad,round,action_a,action_b,outcome_a,outcome_b,reward_a,"
         "reward_b,prediction_a,prediction_b,pred_correct_a,pred_correct_b";
}

std::string continuous_csv_header() {
  return discrete_csv_header() + ",steps,switches_a,switches_b,timeout";
}

void write_cell_csv(std::ostream& out, const CellResult& cell) {
  out << discrete_csv_header() << '\n';
  std::string row;
  for (size_t d = 0; d < cell.dyads.size(); ++d)
    for (const RoundRecord& rec : cell.dyads[d]) {
      row.clear();
      write_common_fields(row, static_cast<int>(d), rec);
      row += '\n';
      out << row;
    }
}

void write_cell_csv(std::ostream& out, const ContinuousCellResult& cell) {
  out << continuous_csv_header() << '\n';
  std::string row;
  for (size_t d = 0; d < cell.dyads.size(); ++d)
    for (const ContinuousRoundRecord& rec : cell.dyads[d]) {
      row.clear();
      write_common_fields(row, static_cast<int>(d), rec.round);
      row += ',';
      row += std::to_string(rec.steps);
      row += ',';
      row += std::to_string(rec.switches_a);
      row += ',';
      row += std::to_string(rec.switches_b);
      row += ',';
      row += rec.timeout ? "1" : "0";
      row += '\n';
      out << row;
    }
}

CellData read_cell_csv(const std::string& path, const CellKey& key) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  CellData data;
  data.key = key;
  size_t columns;
  if (line == discrete_csv_header()) {
    data.continuous = false;
    columns = 12;
  } else if (line == continuous_csv_header()) {
    data.continuous = true;
    columns = 16;
  } else {
    throw std::runtime_error(path + ": unrecognized header");
  }

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::string where = path + ":" + std::to_string(line_no);
    auto fields = split_csv_line(line);
    if (fields.size() != columns)
      throw std::runtime_error(where + ": expected " +
                               std::to_string(columns) + " fields, got " +
                               std::to_string(fields.size()));
    int dyad = 0;
    RoundRecord rec = read_common_fields(fields, where, dyad);
    if (dyad < 0) throw std::runtime_error(where + ": negative dyad");
    // Rows arrive dyad-major in round order; anything else is corruption.
    if (dyad == static_cast<int>(data.dyads.size())) {
      data.dyads.emplace_back();
      if (data.continuous) data.embodied.emplace_back();
    } else if (dyad != static_cast<int>(data.dyads.size()) - 1) {
      throw std::runtime_error(where + ": dyad index out of order");
    }
    if (rec.round != static_cast<int>(data.dyads.back().size()))
      throw std::runtime_error(where + ": round index out of order");
    data.dyads.back().push_back(rec);
    if (data.continuous) {
      ContinuousRoundRecord crec;
      crec.round = rec;
      crec.steps = parse_int(fields[12], where);
      crec.switches_a = parse_int(fields[13], where);
      crec.switches_b = parse_int(fields[14], where);
      crec.timeout = parse_flag(fields[15], where);
      data.embodied.back().push_back(crec);
    }
  }
  return data;
}

nlohmann::json build_manifest(const RunConfig& config,
                              const std::string& timestamp) {
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& model : config.grid.models)
    for (const auto& opponent : config.grid.opponents)
      for (const auto& game : config.grid.games) {
        nlohmann::json dyads = nlohmann::json::array();
        for (int d = 0; d < config.grid.dyads_per_cell; ++d)
          dyads.push_back(derive_dyad_seed(config.grid.base_seed,
                                           to_string(model),
                                           to_string(opponent), game.name(),
                                           d));
        seeds.push_back({{"model", to_string(model)},
                         {"opponent", to_string(opponent)},
                         {"game", game.name()},
                         {"dyads", dyads}});
      }
  return {{"version", kDyadlabVersion},
          {"timestamp", timestamp},
          {"config", serialize_config(config)},
          {"seeds", seeds}};
}

int run_command(const RunConfig& config, int jobs, std::ostream& diag) {
  {
    nlohmann::json echo = serialize_config(config);
    ConfigLoad check = parse_config(echo);
    if (!check.errors.empty()) {
      for (const auto& msg : check.errors) diag << "config: " << msg << '\n';
      return 1;
    }
  }

  fs::path dir(config.output_dir);
  try {
    fs::create_directories(dir / "cells");
    if (config.emit_trajectories) fs::create_directories(dir / "trajectories");

    write_text_file(dir / "manifest.json",
                    build_manifest(config, now_utc_iso8601()).dump(2) + "\n");

    std::vector<CellSummary> summaries;
    if (config.mode == RunMode::Discrete) {
      for_each_cell(config.grid, jobs, [&](CellResult&& cell) {
        fs::path path = dir / "cells" / cell_csv_name(cell.key);
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + path.string());
        write_cell_csv(out, cell);
        out.flush();
        if (!out) throw std::runtime_error("write failed: " + path.string());
        summaries.push_back(
            summarize_cell(cell.key, cell.dyads, 0, config.estimator));
      });
    } else {
      for_each_cell_continuous(
          config.grid, config.arena, jobs, [&](ContinuousCellResult&& cell) {
            fs::path path = dir / "cells" / cell_csv_name(cell.key);
            std::ofstream out(path, std::ios::binary);
            if (!out) throw std::runtime_error("cannot open " + path.string());
            write_cell_csv(out, cell);
            out.flush();
            if (!out)
              throw std::runtime_error("write failed: " + path.string());
            int timeouts = 0;
            std::vector<std::vector<RoundRecord>> dyads;
            dyads.reserve(cell.dyads.size());
            for (const auto& dyad : cell.dyads) {
              for (const auto& rec : dyad) timeouts += rec.timeout ? 1 : 0;
              dyads.push_back(round_records(dyad));
            }
            summaries.push_back(
                summarize_cell(cell.key, dyads, timeouts, config.estimator));
          });
      if (config.emit_trajectories) {
        // A separate serial pass: the dyads are pure functions of their
        // seeds, so replaying them yields exactly the recorded rounds.
        for (const auto& model : config.grid.models)
          for (const auto& opponent : config.grid.opponents)
            for (const auto& game : config.grid.games) {
              CellKey key{to_string(model), to_string(opponent), game.name()};
              for (int d = 0; d < config.grid.dyads_per_cell; ++d) {
                ContinuousDyadConfig one{
                    {game, model, opponent, config.grid.rounds,
                     derive_dyad_seed(config.grid.base_seed, key.model,
                                      key.opponent, key.game, d),
                     config.grid.learner_params, config.grid.predictor_state,
                     config.grid.critic},
                    config.arena};
                write_text_file(
                    dir / "trajectories" / trajectory_csv_name(key, d),
                    trajectory_csv(one));
              }
            }
      }
    }

    write_reports(config.output_dir, config, summaries, config.emit_plots);
    return 0;
  } catch (const std::exception& ex) {
    diag << "run failed: " << ex.what() << '\n';
    remove_outputs(config);
    return 1;
  }
}

}  // namespace dyadlab
