#include "dyadlab/embodied.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace dyadlab {

namespace {

double distance(double ax, double ay, double bx, double by) {
  return std::hypot(bx - ax, by - ay);
}

double zone_distance(const Pose& pose, const Zone& zone) {
  return distance(pose.x, pose.y, zone.cx, zone.cy);
}

bool inside_detect(const Pose& pose, const Zone& zone) {
  return zone_distance(pose, zone) <= zone.detect_radius;
}

bool round_over(const ArenaConfig& arena, const BodyState& a,
                const BodyState& b) {
  return inside_detect(a.pose, arena.coop_zone) ||
         inside_detect(a.pose, arena.defect_zone) ||
         inside_detect(b.pose, arena.coop_zone) ||
         inside_detect(b.pose, arena.defect_zone);
}

const Zone& zone_for(const ArenaConfig& arena, Action action) {
  return action == Action::Cooperate ? arena.coop_zone : arena.defect_zone;
}

}  // namespace

double normalize_angle(double a) {
  a = std::fmod(a, 2.0 * std::numbers::pi);
  if (a > std::numbers::pi)
    a -= 2.0 * std::numbers::pi;
  else if (a <= -std::numbers::pi)
    a += 2.0 * std::numbers::pi;
  return a;
}

std::vector<std::string> validate_arena(const ArenaConfig& arena) {
  std::vector<std::string> errors;
  if (!(arena.dt > 0.0)) errors.push_back("dt must be > 0");
  if (arena.max_steps_per_round < 1)
    errors.push_back("max_steps_per_round must be >= 1");
  if (!(arena.sensor_range > 0.0))
    errors.push_back("sensor_range must be > 0");
  if (!(arena.axle > 0.0)) errors.push_back("axle must be > 0");
  if (arena.base_speed < 0.0) errors.push_back("base_speed must be >= 0");
  if (arena.w_exc < 0.0) errors.push_back("w_exc must be >= 0");
  if (arena.w_inh < 0.0) errors.push_back("w_inh must be >= 0");
  if (!(arena.monitor_threshold > 0.0) ||
      arena.monitor_threshold > std::numbers::pi)
    errors.push_back("monitor_threshold must be in (0, pi]");
  if (arena.monitor_debounce_steps < 1)
    errors.push_back("monitor_debounce_steps must be >= 1");
  auto check_zone = [&](const Zone& zone, const std::string& name) {
    if (!(zone.detect_radius > 0.0))
      errors.push_back(name + ".detect_radius must be > 0");
    if (zone.visual_radius < 0.0)
      errors.push_back(name + ".visual_radius must be >= 0");
  };
  check_zone(arena.coop_zone, "coop_zone");
  check_zone(arena.defect_zone, "defect_zone");
  auto check_equidistant = [&](const Pose& start, const std::string& name) {
    double to_coop = zone_distance(start, arena.coop_zone);
    double to_defect = zone_distance(start, arena.defect_zone);
    if (std::abs(to_coop - to_defect) > 1e-9)
      errors.push_back("zones are not equidistant from " + name);
  };
  check_equidistant(arena.start_pose_a, "start_pose_a");
  check_equidistant(arena.start_pose_b, "start_pose_b");
  return errors;
}

SensorPair sense_target(const Pose& self, double tx, double ty, double range) {
  double d = distance(self.x, self.y, tx, ty);
  if (d > range) return {};
  double beta = normalize_angle(std::atan2(ty - self.y, tx - self.x) -
                                self.theta);
  double intensity = (1.0 - d / range) * std::max(0.0, std::cos(beta));
  auto side = [&](double sign) {
    double s = intensity * (1.0 + sign * std::sin(beta)) / 2.0;
    return std::min(1.0, std::max(0.0, s));
  };
  return {side(+1.0), side(-1.0)};
}

SensorReadings sense(const ArenaConfig& arena, const BodyState& self,
                     const BodyState& other) {
  SensorReadings readings;
  readings.coop = sense_target(self.pose, arena.coop_zone.cx,
                               arena.coop_zone.cy, arena.sensor_range);
  readings.defect = sense_target(self.pose, arena.defect_zone.cx,
                                 arena.defect_zone.cy, arena.sensor_range);
  readings.agent = sense_target(self.pose, other.pose.x, other.pose.y,
                                arena.sensor_range);
  return readings;
}

DrivePair reactive_drive(const SensorReadings& readings,
                         const InhibitionState& inhibition,
                         const ArenaConfig& wiring) {
  DrivePair drive{wiring.base_speed, wiring.base_speed};
  auto add_flow = [&](const SensorPair& pair) {
    drive.ml += wiring.w_exc * pair.right - wiring.w_inh * pair.left;
    drive.mr += wiring.w_exc * pair.left - wiring.w_inh * pair.right;
  };
  if (inhibition.inhibited != InhibitedFlow::FlowC) add_flow(readings.coop);
  if (inhibition.inhibited != InhibitedFlow::FlowD) add_flow(readings.defect);
  return drive;
}

InhibitionState apply_inhibition(Action selected) {
  return {selected == Action::Cooperate ? InhibitedFlow::FlowD
                                        : InhibitedFlow::FlowC};
}

bool error_monitor(Action prediction, const BodyState& other_body,
                   const ArenaConfig& arena, double threshold) {
  if (inside_detect(other_body.pose, zone_for(arena, other(prediction))))
    return true;
  const Zone& predicted = zone_for(arena, prediction);
  double bearing = std::atan2(predicted.cy - other_body.pose.y,
                              predicted.cx - other_body.pose.x);
  return std::abs(normalize_angle(bearing - other_body.pose.theta)) >
         threshold;
}

bool ErrorMonitor::update(Action prediction, const BodyState& other_body,
                          const ArenaConfig& arena) {
  if (inside_detect(other_body.pose, zone_for(arena, other(prediction)))) {
    streak = 0;
    return true;
  }
  if (error_monitor(prediction, other_body, arena, arena.monitor_threshold)) {
    if (++streak >= arena.monitor_debounce_steps) {
      streak = 0;
      return true;
    }
    return false;
  }
  streak = 0;
  return false;
}

BodyState integrate(const BodyState& body, double ml, double mr, double dt,
                    double axle) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be > 0");
  double v = (ml + mr) / 2.0;
  double omega = (mr - ml) / axle;
  BodyState out = body;
  out.pose.x += v * std::cos(body.pose.theta) * dt;
  out.pose.y += v * std::sin(body.pose.theta) * dt;
  out.pose.theta = normalize_angle(body.pose.theta + omega * dt);
  out.wheel_left = ml;
  out.wheel_right = mr;
  return out;
}

ContinuousRoundRecord run_round_continuous(const Game& game, Agent& agent_a,
                                           Agent& agent_b,
                                           const Observation& obs_a,
                                           const Observation& obs_b,
                                           const ArenaConfig& arena,
                                           Rng& rng_a, Rng& rng_b,
                                           const TrajectorySink& sink) {
  Decision da = agent_a.decide(obs_a, rng_a);
  Decision db = agent_b.decide(obs_b, rng_b);
  InhibitionState inh_a = apply_inhibition(da.action);
  InhibitionState inh_b = apply_inhibition(db.action);
  BodyState body_a{arena.start_pose_a, 0.0, 0.0};
  BodyState body_b{arena.start_pose_b, 0.0, 0.0};
  ErrorMonitor monitor_a, monitor_b;

  ContinuousRoundRecord rec;
  rec.round.round = obs_a.round_index;

  auto emit = [&](int step) {
    if (!sink) return;
    sink({rec.round.round, step, 0, body_a.pose.x, body_a.pose.y,
          body_a.pose.theta, da.action});
    sink({rec.round.round, step, 1, body_b.pose.x, body_b.pose.y,
          body_b.pose.theta, db.action});
  };
  emit(0);

  bool reached = false;
  for (int step = 0; step < arena.max_steps_per_round; ++step) {
    SensorReadings sense_a = sense(arena, body_a, body_b);
    SensorReadings sense_b = sense(arena, body_b, body_a);
    if (da.prediction && monitor_a.update(*da.prediction, body_b, arena)) {
      da = agent_a.redecide(obs_a, other(*da.prediction), rng_a);
      inh_a = apply_inhibition(da.action);
      ++rec.switches_a;
    }
    if (db.prediction && monitor_b.update(*db.prediction, body_a, arena)) {
      db = agent_b.redecide(obs_b, other(*db.prediction), rng_b);
      inh_b = apply_inhibition(db.action);
      ++rec.switches_b;
    }
    DrivePair drive_a = reactive_drive(sense_a, inh_a, arena);
    DrivePair drive_b = reactive_drive(sense_b, inh_b, arena);
    body_a = integrate(body_a, drive_a.ml, drive_a.mr, arena.dt, arena.axle);
    body_b = integrate(body_b, drive_b.ml, drive_b.mr, arena.dt, arena.axle);
    emit(step + 1);
    rec.steps = step + 1;
    if (round_over(arena, body_a, body_b)) {
      reached = true;
      break;
    }
  }
  rec.timeout = !reached;

  rec.round.action_a = da.action;
  rec.round.action_b = db.action;
  rec.round.outcome_a = classify_outcome(game, da.action, db.action);
  rec.round.outcome_b = classify_outcome(game, db.action, da.action);
  if (!rec.timeout) {
    rec.round.reward_a = game.payoff(da.action, db.action).self;
    rec.round.reward_b = game.payoff(db.action, da.action).self;
  }
  rec.round.prediction_a = da.prediction;
  rec.round.prediction_b = db.prediction;
  if (da.prediction) rec.round.pred_correct_a = (*da.prediction == db.action);
  if (db.prediction) rec.round.pred_correct_b = (*db.prediction == da.action);

  agent_a.observe({obs_a, da, db.action, rec.round.reward_a,
                   rec.round.reward_b, rec.round.outcome_a,
                   rec.round.outcome_b});
  agent_b.observe({obs_b, db, da.action, rec.round.reward_b,
                   rec.round.reward_a, rec.round.outcome_b,
                   rec.round.outcome_a});
  return rec;
}

std::vector<ContinuousRoundRecord> run_dyad_continuous(
    const ContinuousDyadConfig& config, const TrajectorySink& sink) {
  if (config.dyad.rounds < 1)
    throw std::invalid_argument("run_dyad_continuous: rounds must be >= 1");
  auto arena_errors = validate_arena(config.arena);
  if (!arena_errors.empty())
    throw std::invalid_argument("run_dyad_continuous: " +
                                arena_errors.front());

  Agent agent_a(config.dyad.phenotype_a, config.dyad.game,
                config.dyad.learner_params, config.dyad.predictor_state,
                config.dyad.critic);
  Agent agent_b(config.dyad.phenotype_b, config.dyad.game,
                config.dyad.learner_params, config.dyad.predictor_state,
                config.dyad.critic);
  Rng rng_a(splitmix64(config.dyad.seed + 1));
  Rng rng_b(splitmix64(config.dyad.seed + 2));

  std::vector<ContinuousRoundRecord> records;
  records.reserve(static_cast<size_t>(config.dyad.rounds));
  Observation obs_a, obs_b;
  for (int t = 0; t < config.dyad.rounds; ++t) {
    records.push_back(run_round_continuous(config.dyad.game, agent_a, agent_b,
                                           obs_a, obs_b, config.arena, rng_a,
                                           rng_b, sink));
    obs_a = next_observation(records.back().round, true);
    obs_b = next_observation(records.back().round, false);
  }
  return records;
}

std::vector<RoundRecord> round_records(
    const std::vector<ContinuousRoundRecord>& rounds) {
  std::vector<RoundRecord> records;
  records.reserve(rounds.size());
  for (const auto& rec : rounds) records.push_back(rec.round);
  return records;
}

const ContinuousCellResult* ContinuousExperimentResult::find(
    const CellKey& key) const {
  for (const auto& cell : cells)
    if (cell.key == key) return &cell;
  return nullptr;
}

void for_each_cell_continuous(
    const ExperimentGrid& grid, const ArenaConfig& arena, int jobs,
    const std::function<void(ContinuousCellResult&&)>& sink) {
  auto errors = validate_grid(grid);
  for (auto msg : validate_arena(arena)) errors.push_back("arena: " + msg);
  if (!errors.empty())
    throw std::invalid_argument("for_each_cell_continuous: " + errors.front());
  if (jobs < 1) jobs = 1;

  for (const auto& model : grid.models) {
    for (const auto& opponent : grid.opponents) {
      for (const auto& game : grid.games) {
        ContinuousCellResult cell;
        cell.key = {to_string(model), to_string(opponent), game.name()};
        cell.seeds.resize(static_cast<size_t>(grid.dyads_per_cell));
        cell.dyads.resize(static_cast<size_t>(grid.dyads_per_cell));
        for (int d = 0; d < grid.dyads_per_cell; ++d)
          cell.seeds[static_cast<size_t>(d)] = derive_dyad_seed(
              grid.base_seed, cell.key.model, cell.key.opponent,
              cell.key.game, d);

        auto run_one = [&](int d) {
          ContinuousDyadConfig cfg{{game,
                                    model,
                                    opponent,
                                    grid.rounds,
                                    cell.seeds[static_cast<size_t>(d)],
                                    grid.learner_params,
                                    grid.predictor_state,
                                    grid.critic},
                                   arena};
          cell.dyads[static_cast<size_t>(d)] = run_dyad_continuous(cfg);
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

ContinuousExperimentResult run_continuous_experiment(
    const ExperimentGrid& grid, const ArenaConfig& arena, int jobs) {
  ContinuousExperimentResult result;
  for_each_cell_continuous(grid, arena, jobs, [&](ContinuousCellResult&& cell) {
    result.cells.push_back(std::move(cell));
  });
  return result;
}

}  // namespace dyadlab
