#include "dyadlab/engine_discrete.hpp"

#include <atomic>
#include <stdexcept>
#include <thread>

namespace dyadlab {

RoundRecord play_round(const Game& game, Agent& agent_a, Agent& agent_b,
                       const Observation& obs_a, const Observation& obs_b,
                       Rng& rng_a, Rng& rng_b) {
  Decision da = agent_a.decide(obs_a, rng_a);
  Decision db = agent_b.decide(obs_b, rng_b);

  RoundRecord rec;
  rec.round = obs_a.round_index;
  rec.action_a = da.action;
  rec.action_b = db.action;
  rec.reward_a = game.payoff(da.action, db.action).self;
  rec.reward_b = game.payoff(db.action, da.action).self;
  rec.outcome_a = classify_outcome(game, da.action, db.action);
  rec.outcome_b = classify_outcome(game, db.action, da.action);
  rec.prediction_a = da.prediction;
  rec.prediction_b = db.prediction;
  if (da.prediction) rec.pred_correct_a = (*da.prediction == db.action);
  if (db.prediction) rec.pred_correct_b = (*db.prediction == da.action);

  agent_a.observe({obs_a, da, db.action, rec.reward_a, rec.reward_b,
                   rec.outcome_a, rec.outcome_b});
  agent_b.observe({obs_b, db, da.action, rec.reward_b, rec.reward_a,
                   rec.outcome_b, rec.outcome_a});
  return rec;
}

Observation next_observation(const RoundRecord& record, bool seat_a) {
  Observation obs;
  obs.round_index = record.round + 1;
  obs.my_prev_outcome = seat_a ? record.outcome_a : record.outcome_b;
  obs.opp_prev_outcome = seat_a ? record.outcome_b : record.outcome_a;
  obs.opp_prev_action = seat_a ? record.action_b : record.action_a;
  obs.my_prev_reward = seat_a ? record.reward_a : record.reward_b;
  obs.opp_prev_reward = seat_a ? record.reward_b : record.reward_a;
  return obs;
}

std::vector<RoundRecord> run_dyad(const DyadConfig& config) {
  if (config.rounds < 1)
    throw std::invalid_argument("run_dyad: rounds must be >= 1");
  Agent agent_a(config.phenotype_a, config.game, config.learner_params,
                config.predictor_state, config.critic);
  Agent agent_b(config.phenotype_b, config.game, config.learner_params,
                config.predictor_state, config.critic);
  Rng rng_a(splitmix64(config.seed + 1));
  Rng rng_b(splitmix64(config.seed + 2));

  std::vector<RoundRecord> records;
  records.reserve(static_cast<size_t>(config.rounds));
  Observation obs_a, obs_b;
  for (int t = 0; t < config.rounds; ++t) {
    records.push_back(
        play_round(config.game, agent_a, agent_b, obs_a, obs_b, rng_a, rng_b));
    obs_a = next_observation(records.back(), true);
    obs_b = next_observation(records.back(), false);
  }
  return records;
}

std::vector<std::string> validate_grid(const ExperimentGrid& grid) {
  std::vector<std::string> errors;
  if (grid.models.empty()) errors.push_back("grid.models is empty");
  if (grid.opponents.empty()) errors.push_back("grid.opponents is empty");
  if (grid.games.empty()) errors.push_back("grid.games is empty");
  if (grid.dyads_per_cell < 1)
    errors.push_back("grid.dyads_per_cell must be >= 1");
  if (grid.rounds < 1) errors.push_back("grid.rounds must be >= 1");
  for (auto msg : validate_params(grid.learner_params))
    errors.push_back("learner_params: " + msg);
  return errors;
}

std::uint64_t derive_dyad_seed(std::uint64_t base_seed,
                               const std::string& model,
                               const std::string& opponent,
                               const std::string& game, int dyad_index) {
  std::string key = model;
  key += '\x1f';
  key += opponent;
  key += '\x1f';
  key += game;
  std::uint64_t cell = splitmix64(base_seed ^ fnv1a64(key));
  return splitmix64(cell + static_cast<std::uint64_t>(dyad_index));
}

const CellResult* ExperimentResult::find(const CellKey& key) const {
  for (const auto& cell : cells)
    if (cell.key == key) return &cell;
  return nullptr;
}

void for_each_cell(const ExperimentGrid& grid, int jobs,
                   const std::function<void(CellResult&&)>& sink) {
  auto errors = validate_grid(grid);
  if (!errors.empty())
    throw std::invalid_argument("for_each_cell: " + errors.front());
  if (jobs < 1) jobs = 1;

  for (const auto& model : grid.models) {
    for (const auto& opponent : grid.opponents) {
      for (const auto& game : grid.games) {
        CellResult cell;
        cell.key = {to_string(model), to_string(opponent), game.name()};
        cell.seeds.resize(static_cast<size_t>(grid.dyads_per_cell));
        cell.dyads.resize(static_cast<size_t>(grid.dyads_per_cell));
        for (int d = 0; d < grid.dyads_per_cell; ++d)
          cell.seeds[static_cast<size_t>(d)] = derive_dyad_seed(
              grid.base_seed, cell.key.model, cell.key.opponent,
              cell.key.game, d);

        auto run_one = [&](int d) {
          DyadConfig cfg{game,
                         model,
                         opponent,
                         grid.rounds,
                         cell.seeds[static_cast<size_t>(d)],
                         grid.learner_params,
                         grid.predictor_state,
                         grid.critic};
          cell.dyads[static_cast<size_t>(d)] = run_dyad(cfg);
        };

        int workers = std::min(jobs, grid.dyads_per_cell);
        if (workers <= 1) {
          for (int d = 0; d < grid.dyads_per_cell; ++d) run_one(d);
        } else {
          std::atomic<int> next{0};
          std::vector<std::thread> pool;
          pool.reserve(static_cast<size_t>(workers));
          for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
              for (int d = next.fetch_add(1); d < grid.dyads_per_cell;
                   d = next.fetch_add(1))
                run_one(d);
            });
          for (auto& t : pool) t.join();
        }
        sink(std::move(cell));
      }
    }
  }
}

ExperimentResult run_experiment(const ExperimentGrid& grid, int jobs) {
  ExperimentResult result;
  for_each_cell(grid, jobs,
                [&](CellResult&& cell) { result.cells.push_back(std::move(cell)); });
  return result;
}

}  // namespace dyadlab
