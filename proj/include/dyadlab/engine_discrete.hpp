#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dyadlab/agents.hpp"
#include "dyadlab/games.hpp"

namespace dyadlab {

struct DyadConfig {
  Game game;
  Phenotype phenotype_a = Phenotype::Nice;
  Phenotype phenotype_b = Phenotype::Nice;
  int rounds = 1000;
  std::uint64_t seed = 0;
  TdParams learner_params;
  PredictorStateMode predictor_state = PredictorStateMode::OppAction;
  CriticMode critic = CriticMode::Immediate;
};

struct RoundRecord {
  int round = 0;
  Action action_a = Action::Cooperate;
  Action action_b = Action::Cooperate;
  OutcomeLabel outcome_a = OutcomeLabel::Start;
  OutcomeLabel outcome_b = OutcomeLabel::Start;
  double reward_a = 0.0;
  double reward_b = 0.0;
  std::optional<Action> prediction_a, prediction_b;
  std::optional<bool> pred_correct_a, pred_correct_b;
};

/// One simultaneous-move round: both decisions are computed from the
/// pre-round observations before any reward or learning is applied.
RoundRecord play_round(const Game& game, Agent& agent_a, Agent& agent_b,
                       const Observation& obs_a, const Observation& obs_b,
                       Rng& rng_a, Rng& rng_b);

/// The observation seat X carries into round `record.round + 1`.
Observation next_observation(const RoundRecord& record, bool seat_a);

/// Plays a full dyad with fresh agents. Pure function of the config.
std::vector<RoundRecord> run_dyad(const DyadConfig& config);

struct ExperimentGrid {
  std::vector<Phenotype> models;
  std::vector<Phenotype> opponents;
  std::vector<Game> games;
  int dyads_per_cell = 50;
  int rounds = 1000;
  std::uint64_t base_seed = 0;
  TdParams learner_params;
  PredictorStateMode predictor_state = PredictorStateMode::OppAction;
  CriticMode critic = CriticMode::Immediate;
};

std::vector<std::string> validate_grid(const ExperimentGrid& grid);

/// Stable per-dyad seed from the cell coordinates, so any execution order
/// (or parallel schedule) reproduces identical dyads.
std::uint64_t derive_dyad_seed(std::uint64_t base_seed,
                               const std::string& model,
                               const std::string& opponent,
                               const std::string& game, int dyad_index);

struct CellKey {
  std::string model, opponent, game;
  bool operator==(const CellKey&) const = default;
};

struct CellResult {
  CellKey key;
  std::vector<std::uint64_t> seeds;              // one per dyad
  std::vector<std::vector<RoundRecord>> dyads;   // dyad-major
};

struct ExperimentResult {
  std::vector<CellResult> cells;  // model-major, then opponent, then game
  const CellResult* find(const CellKey& key) const;
};

/// Runs the grid cell by cell in deterministic order, handing each finished
/// cell to `sink` on the calling thread. Dyads within a cell run on up to
/// `jobs` worker threads. The full tournament is the default construction:
/// 4 models x 4 opponents x 5 games x 50 dyads x 1000 rounds.
void for_each_cell(const ExperimentGrid& grid, int jobs,
                   const std::function<void(CellResult&&)>& sink);

/// Convenience wrapper collecting every cell in memory. Prefer
/// for_each_cell for tournament-scale grids.
ExperimentResult run_experiment(const ExperimentGrid& grid, int jobs = 1);

}  // namespace dyadlab
