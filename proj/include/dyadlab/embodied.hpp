#pragma once

#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "dyadlab/agents.hpp"
#include "dyadlab/engine_discrete.hpp"
#include "dyadlab/games.hpp"

namespace dyadlab {

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // heading, radians in (-pi, pi]
};

/// A reward spot. The visual radius is the drawn disc; the detect radius is
/// the larger circle whose crossing ends the round.
struct Zone {
  double cx = 0.0;
  double cy = 0.0;
  double visual_radius = 0.0;
  double detect_radius = 0.0;
};

/// Continuous-arena geometry plus the controller and monitor constants.
/// Defaults put both zones at the same distance from either start pose, with
/// the agents facing each other across a unit square.
struct ArenaConfig {
  Zone coop_zone{0.5, 0.8, 0.08, 0.10};
  Zone defect_zone{0.5, 0.2, 0.04, 0.06};
  Pose start_pose_a{0.1, 0.5, 0.0};
  Pose start_pose_b{0.9, 0.5, std::numbers::pi};
  double dt = 0.01;              // integration step, seconds
  int max_steps_per_round = 4000;
  double sensor_range = 1.5;     // readings are zero beyond this distance
  double base_speed = 0.3;       // wheel speed with no sensor input
  double axle = 0.05;            // wheel separation
  double w_exc = 1.0;            // cross-excitation weight
  double w_inh = 0.5;            // direct-inhibition weight
  double monitor_threshold = std::numbers::pi / 3;  // radians
  int monitor_debounce_steps = 10;
};

/// All reasons the arena is unusable, empty when valid. Checks the zone and
/// step parameters and that each start pose sees both zones at the same
/// distance, so neither choice is privileged by geometry.
std::vector<std::string> validate_arena(const ArenaConfig& arena);

struct BodyState {
  Pose pose;
  double wheel_left = 0.0;   // ml
  double wheel_right = 0.0;  // mr
};

struct SensorPair {
  double left = 0.0;
  double right = 0.0;
};

/// One pair per target kind: the cooperate spot, the defect spot, and the
/// other agent's body.
struct SensorReadings {
  SensorPair coop;
  SensorPair defect;
  SensorPair agent;
};

enum class InhibitedFlow { None, FlowC, FlowD };

/// Which reward flow the committed action has switched off.
struct InhibitionState {
  InhibitedFlow inhibited = InhibitedFlow::None;
};

/// Wraps an angle into (-pi, pi].
double normalize_angle(double a);

/// Reading for one target: intensity (1 - d/range) * max(0, cos beta) split
/// across the pair by bearing sign, each side clamped to [0, 1]. Zero beyond
/// range and for targets behind the agent.
SensorPair sense_target(const Pose& self, double tx, double ty, double range);

SensorReadings sense(const ArenaConfig& arena, const BodyState& self,
                     const BodyState& other);

struct DrivePair {
  double ml = 0.0;
  double mr = 0.0;
};

/// Braitenberg wiring: each active reward flow adds its cross-excitation and
/// direct inhibition to the base speed; the inhibited flow contributes
/// nothing. The agent sensor pair feeds the monitor, not the motors.
DrivePair reactive_drive(const SensorReadings& readings,
                         const InhibitionState& inhibition,
                         const ArenaConfig& wiring);

/// Cooperate commits to the coop spot by inhibiting the defect flow, and
/// vice versa.
InhibitionState apply_inhibition(Action selected);

/// Instantaneous violation test: the opponent sits inside the non-predicted
/// zone's detect circle, or its heading points more than `threshold` radians
/// away from the predicted zone's bearing.
bool error_monitor(Action prediction, const BodyState& other_body,
                   const ArenaConfig& arena, double threshold);

/// Debounced monitor: the detect-circle case fires at once; the heading case
/// must persist for monitor_debounce_steps consecutive steps. update()
/// returns true when the violation is confirmed and clears the streak.
struct ErrorMonitor {
  int streak = 0;
  bool update(Action prediction, const BodyState& other_body,
              const ArenaConfig& arena);
};

/// Explicit Euler step of differential-drive kinematics: v = (ml+mr)/2,
/// omega = (mr-ml)/axle, displacement along the old heading.
BodyState integrate(const BodyState& body, double ml, double mr, double dt,
                    double axle);

/// One pose sample for trajectory dumps; seat is 0 for agent A, 1 for B.
struct TrajectorySample {
  int round = 0;
  int step = 0;
  int seat = 0;
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  Action committed = Action::Cooperate;
};

using TrajectorySink = std::function<void(const TrajectorySample&)>;

struct ContinuousRoundRecord {
  RoundRecord round;        // committed actions, rewards, predictions
  int steps = 0;            // integration steps until the round ended
  int switches_a = 0;       // monitor-triggered re-decisions
  int switches_b = 0;
  bool timeout = false;     // max_steps elapsed; rewards are zeroed
};

/// Projects a continuous dyad onto its per-round records so the discrete
/// metrics apply unchanged.
std::vector<RoundRecord> round_records(
    const std::vector<ContinuousRoundRecord>& rounds);

/// One embodied round: both agents decide, commit, and drive from the start
/// poses until either one crosses a detect circle or max_steps pass. Agents
/// with a prediction run the error monitor each step and re-decide when it
/// confirms a violation. Learning fires at round end from the committed
/// actions, with rewards withheld on timeout.
ContinuousRoundRecord run_round_continuous(const Game& game, Agent& agent_a,
                                           Agent& agent_b,
                                           const Observation& obs_a,
                                           const Observation& obs_b,
                                           const ArenaConfig& arena,
                                           Rng& rng_a, Rng& rng_b,
                                           const TrajectorySink& sink = {});

struct ContinuousDyadConfig {
  DyadConfig dyad;
  ArenaConfig arena;
};

/// Continuous counterpart of run_dyad: same seed derivation and observation
/// threading, each round played in the arena instead of by matrix lookup.
std::vector<ContinuousRoundRecord> run_dyad_continuous(
    const ContinuousDyadConfig& config, const TrajectorySink& sink = {});

struct ContinuousCellResult {
  CellKey key;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<ContinuousRoundRecord>> dyads;
};

/// Continuous counterpart of for_each_cell: identical cell order, seed
/// derivation, and worker scheduling, so a discrete and a continuous run of
/// the same grid pair up dyad for dyad.
void for_each_cell_continuous(
    const ExperimentGrid& grid, const ArenaConfig& arena, int jobs,
    const std::function<void(ContinuousCellResult&&)>& sink);

struct ContinuousExperimentResult {
  std::vector<ContinuousCellResult> cells;
  const ContinuousCellResult* find(const CellKey& key) const;
};

ContinuousExperimentResult run_continuous_experiment(
    const ExperimentGrid& grid, const ArenaConfig& arena, int jobs = 1);

}  // namespace dyadlab
