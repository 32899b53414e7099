#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "dyadlab/report.hpp"
#include "dyadlab/run_io.hpp"

using namespace dyadlab;
namespace fs = std::filesystem;

namespace {

/// Unique per-test scratch directory, removed on scope exit.
struct ScratchDir {
  fs::path path;
  ScratchDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("dyadlab_io_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string str(const std::string& rel = "") const {
    return rel.empty() ? path.string() : (path / rel).string();
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(bool(in), "cannot open " << path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(bool(out));
  out << content;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

std::string joined(const std::vector<std::string>& parts) {
  std::string all;
  for (const auto& p : parts) all += p + "\n";
  return all;
}

int line_count(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

/// A cheap single-cell grid: rational vs tft keeps predictions in play.
ExperimentGrid smoke_grid(int dyads, int rounds,
                          const std::string& game = "prisoners_dilemma") {
  ExperimentGrid grid;
  grid.models = {Phenotype::Rational};
  grid.opponents = {Phenotype::TitForTat};
  grid.games = {builtin_game(game)};
  grid.dyads_per_cell = dyads;
  grid.rounds = rounds;
  grid.base_seed = 2024;
  return grid;
}

RunConfig smoke_config(const ScratchDir& scratch, const std::string& subdir) {
  RunConfig config = default_run_config();
  config.grid = smoke_grid(2, 100);
  config.output_dir = scratch.str(subdir);
  return config;
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(DYADLAB_BIN) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("default config serializes and loads back unchanged") {
  RunConfig def = default_run_config();
  CHECK(def.grid.models.size() == 4);
  CHECK(def.grid.opponents.size() == 4);
  CHECK(def.grid.games.size() == 5);
  CHECK(def.grid.dyads_per_cell == 50);
  CHECK(def.grid.rounds == 1000);

  nlohmann::json j = serialize_config(def);
  ConfigLoad back = parse_config(j);
  REQUIRE_MESSAGE(back.errors.empty(), joined(back.errors));
  CHECK(serialize_config(back.config) == j);
}

TEST_CASE("empty config fills the documented defaults") {
  ConfigLoad loaded = parse_config(nlohmann::json::object());
  REQUIRE_MESSAGE(loaded.errors.empty(), joined(loaded.errors));
  const RunConfig& c = loaded.config;
  CHECK(c.mode == RunMode::Discrete);
  CHECK(c.grid.learner_params.delta == 0.15);
  CHECK(c.grid.learner_params.alpha == 0.1);
  CHECK(c.grid.learner_params.gamma == 0.9);
  CHECK(c.grid.learner_params.temperature == 4.0);
  CHECK(c.grid.rounds == 1000);
  CHECK(c.grid.dyads_per_cell == 50);
  CHECK(c.grid.predictor_state == PredictorStateMode::OppAction);
  CHECK(c.grid.critic == CriticMode::Immediate);
  CHECK(c.estimator == SurprisalEstimator::Cumulative);
  CHECK(c.output_dir == "out");
  CHECK_FALSE(c.emit_trajectories);
  CHECK_FALSE(c.emit_plots);
}

TEST_CASE("config errors name the field and the valid options") {
  ConfigLoad bad = parse_config(
      {{"grid", {{"models", {"rationale"}}, {"rounds", 0}}}, {"bogus", 1}});
  REQUIRE_FALSE(bad.errors.empty());
  std::string all = joined(bad.errors);
  CHECK(contains(all, "grid.models[0]"));
  CHECK(contains(all, "rationale"));
  CHECK(contains(all, "rational"));  // the options list
  CHECK(contains(all, "rounds"));
  CHECK(contains(all, "bogus"));

  ConfigLoad wrong_type = parse_config({{"grid", 5}});
  REQUIRE_FALSE(wrong_type.errors.empty());
  CHECK(contains(joined(wrong_type.errors), "grid"));
}

TEST_CASE("continuous mode demands an arena and gates trajectories") {
  ConfigLoad no_arena = parse_config({{"mode", "continuous"}});
  REQUIRE_FALSE(no_arena.errors.empty());
  CHECK(contains(joined(no_arena.errors), "arena"));

  ConfigLoad with_arena = parse_config(
      {{"mode", "continuous"}, {"arena", nlohmann::json::object()}});
  CHECK_MESSAGE(with_arena.errors.empty(), joined(with_arena.errors));
  CHECK(with_arena.config.mode == RunMode::Continuous);

  ConfigLoad discrete_traj = parse_config({{"emit_trajectories", true}});
  REQUIRE_FALSE(discrete_traj.errors.empty());
  CHECK(contains(joined(discrete_traj.errors), "emit_trajectories"));
}

TEST_CASE("load_config reports unreadable and malformed files") {
  ScratchDir scratch;
  ConfigLoad missing = load_config(scratch.str("nope.json"));
  REQUIRE(missing.errors.size() == 1);
  CHECK(contains(missing.errors[0], "nope.json"));

  spit(scratch.str("broken.json"), "{\"grid\": ");
  ConfigLoad broken = load_config(scratch.str("broken.json"));
  REQUIRE(broken.errors.size() == 1);
}

TEST_CASE("a manifest file works as a config") {
  ScratchDir scratch;
  RunConfig config = smoke_config(scratch, "run");
  nlohmann::json manifest = build_manifest(config, "2024-01-01T00:00:00Z");
  spit(scratch.str("manifest.json"), manifest.dump(2));

  ConfigLoad loaded = load_config(scratch.str("manifest.json"));
  REQUIRE_MESSAGE(loaded.errors.empty(), joined(loaded.errors));
  CHECK(serialize_config(loaded.config) == serialize_config(config));

  // The seed table mirrors the engine's derivation.
  REQUIRE(manifest["seeds"].size() == 1);
  CHECK(manifest["seeds"][0]["dyads"][1].get<std::uint64_t>() ==
        derive_dyad_seed(2024, "rational", "tft", "prisoners_dilemma", 1));
}

TEST_CASE("format_number emits shortest round-trip decimals") {
  CHECK(format_number(0.15) == "0.15");
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(-1.5) == "-1.5");
  for (double v : {0.1, 1.0 / 3.0, 2.7, 1e-9, 123456.789, -0.30000000000000004})
    CHECK(std::stod(format_number(v)) == v);
}

TEST_CASE("action codes round trip") {
  CHECK(action_code(Action::Cooperate) == "C");
  CHECK(action_code(Action::Defect) == "D");
  CHECK(action_from_code("C") == Action::Cooperate);
  CHECK(action_from_code("D") == Action::Defect);
  CHECK_THROWS_AS(action_from_code("X"), std::invalid_argument);
}

TEST_CASE("cell csv round trips discrete records") {
  ScratchDir scratch;
  ExperimentResult result = run_experiment(smoke_grid(2, 50));
  REQUIRE(result.cells.size() == 1);
  const CellResult& cell = result.cells[0];

  std::string path = scratch.str(cell_csv_name(cell.key));
  {
    std::ofstream out(path, std::ios::binary);
    write_cell_csv(out, cell);
  }
  CHECK(contains(slurp(path), discrete_csv_header()));

  CellData data = read_cell_csv(path, cell.key);
  CHECK_FALSE(data.continuous);
  REQUIRE(data.dyads.size() == cell.dyads.size());
  for (size_t d = 0; d < cell.dyads.size(); ++d) {
    REQUIRE(data.dyads[d].size() == cell.dyads[d].size());
    for (size_t r = 0; r < cell.dyads[d].size(); ++r) {
      const RoundRecord& want = cell.dyads[d][r];
      const RoundRecord& got = data.dyads[d][r];
      CHECK(got.round == want.round);
      CHECK(got.action_a == want.action_a);
      CHECK(got.action_b == want.action_b);
      CHECK(got.outcome_a == want.outcome_a);
      CHECK(got.outcome_b == want.outcome_b);
      CHECK(got.reward_a == want.reward_a);  // exact: shortest round-trip
      CHECK(got.reward_b == want.reward_b);
      CHECK(got.prediction_a == want.prediction_a);
      CHECK(got.prediction_b == want.prediction_b);
      CHECK(got.pred_correct_a == want.pred_correct_a);
      CHECK(got.pred_correct_b == want.pred_correct_b);
    }
  }
}

TEST_CASE("cell csv round trips continuous records") {
  ScratchDir scratch;
  ExperimentGrid grid = smoke_grid(1, 3, "stag_hunt");
  ContinuousExperimentResult result =
      run_continuous_experiment(grid, ArenaConfig{});
  REQUIRE(result.cells.size() == 1);
  const ContinuousCellResult& cell = result.cells[0];

  std::string path = scratch.str(cell_csv_name(cell.key));
  {
    std::ofstream out(path, std::ios::binary);
    write_cell_csv(out, cell);
  }
  CHECK(contains(slurp(path), continuous_csv_header()));

  CellData data = read_cell_csv(path, cell.key);
  CHECK(data.continuous);
  REQUIRE(data.embodied.size() == 1);
  REQUIRE(data.embodied[0].size() == cell.dyads[0].size());
  for (size_t r = 0; r < cell.dyads[0].size(); ++r) {
    const ContinuousRoundRecord& want = cell.dyads[0][r];
    const ContinuousRoundRecord& got = data.embodied[0][r];
    CHECK(got.steps == want.steps);
    CHECK(got.switches_a == want.switches_a);
    CHECK(got.switches_b == want.switches_b);
    CHECK(got.timeout == want.timeout);
    CHECK(got.round.reward_a == want.round.reward_a);
  }
}

TEST_CASE("corrupt cell csv is rejected with the offending line") {
  ScratchDir scratch;
  CellKey key{"rational", "tft", "prisoners_dilemma"};
  auto expect_throw = [&](const std::string& content,
                          const std::string& needle) {
    std::string path = scratch.str("bad.csv");
    spit(path, content);
    try {
      read_cell_csv(path, key);
      FAIL_CHECK("no exception for " << needle);
    } catch (const std::runtime_error& ex) {
      CHECK_MESSAGE(contains(ex.what(), needle),
                    ex.what() << " lacks " << needle);
    }
  };

  expect_throw("garbage\n", "unrecognized header");
  std::string head = discrete_csv_header() + "\n";
  expect_throw(head + "0,0,C\n", "expected 12 fields");
  expect_throw(head + "1,0,C,C,R,R,2,2,,,,\n", "dyad index out of order");
  expect_throw(head + "0,1,C,C,R,R,2,2,,,,\n", "round index out of order");
  expect_throw(head + "0,0,X,C,R,R,2,2,,,,\n", "unknown action");
  expect_throw(head + "0,0,C,C,R,R,two,2,,,,\n", "bad number");
  expect_throw("", "empty file");
}

TEST_CASE("run_command writes the smoke-grid artifacts") {
  ScratchDir scratch;
  RunConfig config = smoke_config(scratch, "run");
  std::ostringstream diag;
  REQUIRE_MESSAGE(run_command(config, 1, diag) == 0, diag.str());

  std::string csv =
      slurp(scratch.str("run/cells/rational__tft__prisoners_dilemma.csv"));
  CHECK(line_count(csv) == 201);  // header + 2 dyads x 100 rounds

  nlohmann::json manifest =
      nlohmann::json::parse(slurp(scratch.str("run/manifest.json")));
  CHECK(manifest["version"] == kDyadlabVersion);
  CHECK(manifest["config"]["grid"]["rounds"] == 100);

  nlohmann::json summary =
      nlohmann::json::parse(slurp(scratch.str("run/summary.json")));
  REQUIRE(summary["cells"].size() == 1);
  CHECK(summary["cells"][0]["game"] == "prisoners_dilemma");
  CHECK(summary["cells"][0].contains("efficacy"));
  CHECK(summary["cells"][0].contains("accumulated_prediction_error"));
  CHECK(summary["late_window"] == 100);
}

TEST_CASE("identical manifests reproduce identical bytes across jobs") {
  ScratchDir scratch;
  RunConfig config = smoke_config(scratch, "a");
  std::ostringstream diag;
  REQUIRE(run_command(config, 1, diag) == 0);

  ConfigLoad from_manifest = load_config(scratch.str("a/manifest.json"));
  REQUIRE_MESSAGE(from_manifest.errors.empty(),
                  joined(from_manifest.errors));
  RunConfig again = from_manifest.config;
  again.output_dir = scratch.str("b");
  REQUIRE(run_command(again, 2, diag) == 0);

  std::string rel = "cells/rational__tft__prisoners_dilemma.csv";
  CHECK(slurp(scratch.str("a/" + rel)) == slurp(scratch.str("b/" + rel)));

  // The summaries agree on everything but the echoed output directory.
  nlohmann::json sum_a =
      nlohmann::json::parse(slurp(scratch.str("a/summary.json")));
  nlohmann::json sum_b =
      nlohmann::json::parse(slurp(scratch.str("b/summary.json")));
  sum_a["config"].erase("output_dir");
  sum_b["config"].erase("output_dir");
  CHECK(sum_a == sum_b);
}

TEST_CASE("reports regenerate byte-identically") {
  ScratchDir scratch;
  RunConfig config = smoke_config(scratch, "run");
  config.emit_plots = true;
  std::ostringstream diag;
  REQUIRE(run_command(config, 1, diag) == 0);

  std::vector<std::string> files = {"summary.json"};
  // Plot names are a pure function of the config once predictions exist.
  CellSummary probe;
  probe.key = {"rational", "tft", "prisoners_dilemma"};
  probe.has_predictions = true;
  for (const auto& name : plot_file_names(config, {probe}))
    files.push_back(name);
  std::vector<std::string> before;
  for (const auto& rel : files) before.push_back(slurp(scratch.str("run/" + rel)));

  REQUIRE(report_command(scratch.str("run"), false, diag) == 0);
  for (size_t i = 0; i < files.size(); ++i)
    CHECK_MESSAGE(slurp(scratch.str("run/" + files[i])) == before[i],
                  files[i] << " changed across regeneration");

  // Structural sanity of the charts.
  std::string svg = slurp(scratch.str("run/plots/efficacy__tft.svg"));
  CHECK(contains(svg, "<svg"));
  CHECK(contains(svg, "<rect"));
  CHECK(contains(svg, "prisoners_dilemma"));
}

TEST_CASE("report_command lists every broken cell") {
  ScratchDir scratch;
  std::ostringstream empty_diag;
  CHECK(report_command(scratch.str(), false, empty_diag) == 1);
  CHECK(contains(empty_diag.str(), "manifest"));

  RunConfig config = smoke_config(scratch, "run");
  config.grid.games = {builtin_game("prisoners_dilemma"),
                       builtin_game("harmony")};
  std::ostringstream diag;
  REQUIRE(run_command(config, 1, diag) == 0);

  spit(scratch.str("run/cells/rational__tft__prisoners_dilemma.csv"),
       "garbage\n");
  fs::remove(scratch.str("run/cells/rational__tft__harmony.csv"));

  std::ostringstream broken_diag;
  CHECK(report_command(scratch.str("run"), false, broken_diag) == 1);
  CHECK(contains(broken_diag.str(), "prisoners_dilemma"));
  CHECK(contains(broken_diag.str(), "harmony"));
}

TEST_CASE("failed runs leave no partial artifacts") {
  ScratchDir scratch;
  RunConfig config = smoke_config(scratch, "blocked");
  // summary.json as a non-empty directory forces the final write to fail
  // after the manifest and cells were already on disk.
  fs::create_directories(scratch.str("blocked/summary.json"));
  spit(scratch.str("blocked/summary.json/keep.txt"), "planted\n");

  std::ostringstream diag;
  CHECK(run_command(config, 1, diag) == 1);
  CHECK_FALSE(diag.str().empty());
  CHECK_FALSE(fs::exists(scratch.str("blocked/manifest.json")));
  CHECK_FALSE(fs::exists(scratch.str("blocked/cells")));
  CHECK(fs::exists(scratch.str("blocked/summary.json/keep.txt")));
}

TEST_CASE("trajectory pass replays the recorded rounds") {
  ScratchDir scratch;
  RunConfig config = default_run_config();
  config.mode = RunMode::Continuous;
  config.grid = smoke_grid(1, 2, "stag_hunt");
  config.output_dir = scratch.str("run");
  config.emit_trajectories = true;
  std::ostringstream diag;
  REQUIRE_MESSAGE(run_command(config, 1, diag) == 0, diag.str());

  CellKey key{"rational", "tft", "stag_hunt"};
  CellData cell =
      read_cell_csv(scratch.str("run/cells/" + cell_csv_name(key)), key);
  REQUIRE(cell.embodied.size() == 1);

  int expected = 1;  // header
  for (const auto& rec : cell.embodied[0]) expected += 2 * (rec.steps + 1);
  std::string traj =
      slurp(scratch.str("run/trajectories/rational__tft__stag_hunt__dyad0.csv"));
  CHECK(line_count(traj) == expected);
  CHECK(contains(traj, "round,step,seat,x,y,theta,committed"));
  CHECK(contains(traj, "0,0,0,0.1,0.5,0,"));
}

TEST_CASE("cli surface wires the subcommands together") {
  ScratchDir scratch;
  nlohmann::json grid = {{"models", {"rational"}},
                         {"opponents", {"tft"}},
                         {"games", {"prisoners_dilemma"}},
                         {"dyads_per_cell", 1},
                         {"rounds", 20},
                         {"base_seed", 5}};
  spit(scratch.str("config.json"), nlohmann::json{{"grid", grid}}.dump());
  spit(scratch.str("typo.json"),
       nlohmann::json{{"grid", {{"models", {"rationale"}}}}}.dump());

  CHECK(run_cli("validate " + scratch.str("config.json")) == 0);
  CHECK(run_cli("validate " + scratch.str("typo.json")) == 1);
  CHECK(run_cli("validate " + scratch.str("absent.json")) == 1);

  CHECK(run_cli("run " + scratch.str("config.json") + " --out " +
                scratch.str("cli_run") + " --jobs 2 --plots") == 0);
  CHECK(fs::exists(
      scratch.str("cli_run/cells/rational__tft__prisoners_dilemma.csv")));
  CHECK(fs::exists(scratch.str("cli_run/plots/efficacy__tft.svg")));

  // --seed reroutes the dyads; the manifest records the override.
  CHECK(run_cli("run " + scratch.str("config.json") + " --out " +
                scratch.str("cli_seeded") + " --seed 99") == 0);
  nlohmann::json manifest = nlohmann::json::parse(
      slurp(scratch.str("cli_seeded/manifest.json")));
  CHECK(manifest["config"]["grid"]["base_seed"] == 99);

  CHECK(run_cli("report " + scratch.str("cli_run")) == 0);
  CHECK(run_cli("report " + scratch.str("absent_dir")) == 1);
}

TEST_CASE("the output directory falls back to DYADLAB_OUT") {
  ScratchDir scratch;
  nlohmann::json grid = {{"models", {"nice"}},
                         {"opponents", {"nice"}},
                         {"games", {"harmony"}},
                         {"dyads_per_cell", 1},
                         {"rounds", 5},
                         {"base_seed", 1}};
  spit(scratch.str("noout.json"), nlohmann::json{{"grid", grid}}.dump());

  std::string cmd = "DYADLAB_OUT=" + scratch.str("env_out") + " " +
                    std::string(DYADLAB_BIN) + " run " +
                    scratch.str("noout.json") + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  CHECK(WEXITSTATUS(status) == 0);
  CHECK(fs::exists(scratch.str("env_out/manifest.json")));

  // An explicit config value outranks the environment.
  nlohmann::json with_out = {{"grid", grid},
                             {"output_dir", scratch.str("cfg_out")}};
  spit(scratch.str("hasout.json"), with_out.dump());
  cmd = "DYADLAB_OUT=" + scratch.str("env_ignored") + " " +
        std::string(DYADLAB_BIN) + " run " + scratch.str("hasout.json") +
        " >/dev/null 2>&1";
  status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  CHECK(WEXITSTATUS(status) == 0);
  CHECK(fs::exists(scratch.str("cfg_out/manifest.json")));
  CHECK_FALSE(fs::exists(scratch.str("env_ignored")));
}
