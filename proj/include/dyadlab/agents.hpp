#pragma once

#include <memory>
#include <optional>
#include <string>

#include "json.hpp"

#include "dyadlab/games.hpp"
#include "dyadlab/rl_core.hpp"
#include "dyadlab/rng.hpp"

namespace dyadlab {

enum class Phenotype {
  Nice,
  Greedy,
  TitForTat,
  Original,
  Rational,
  Predictive,
  OthersModel,
};

std::string to_string(Phenotype p);
Phenotype phenotype_from_string(const std::string& s);
std::vector<std::string> phenotype_names();

/// Learns from round feedback (has at least one TD table).
bool is_learning(Phenotype p);
/// Emits a prediction of the opponent's action each round.
bool is_predictive(Phenotype p);

/// State fed to the Rational/Predictive implicit-reward predictor.
/// OppAction keys on the opponent's previous action alone (3 states incl.
/// Start); OppOutcome keys on the opponent's previous outcome label (5
/// states). OppOutcome leaks the agent's own previous action through the
/// joint outcome, which makes a copycat opponent trivially predictable;
/// OppAction is the default for that reason.
enum class PredictorStateMode { OppAction, OppOutcome };

std::string to_string(PredictorStateMode m);
PredictorStateMode predictor_state_from_string(const std::string& s);

/// Critic term feeding the TD error of every table a phenotype learns.
/// Immediate values a state by the discounted reward just collected there,
/// V(s_t) = gamma * r_t, so the error always tracks the current payoff
/// landscape and trying a better action is always reinforced. Learned
/// bootstraps from a persistent value table (V(s_prev) += alpha * e), which
/// can bootstrap an incumbent policy's value so high that late exploration
/// is punished and the policy locks before finding the best response;
/// Immediate is the default for that reason.
enum class CriticMode { Immediate, Learned };

std::string to_string(CriticMode m);
CriticMode critic_mode_from_string(const std::string& s);

/// Everything an agent may read before deciding. Round 0 carries Start
/// outcomes and no opponent action.
struct Observation {
  int round_index = 0;
  OutcomeLabel my_prev_outcome = OutcomeLabel::Start;
  OutcomeLabel opp_prev_outcome = OutcomeLabel::Start;
  std::optional<Action> opp_prev_action;
  double my_prev_reward = 0.0;
  double opp_prev_reward = 0.0;
};

struct Decision {
  Action action = Action::Cooperate;
  std::optional<Action> prediction;  // present iff the phenotype predicts
};

/// Post-round feedback handed to observe(). `pre` is the observation the
/// decision was made from, so replaying decide(pre) reproduces the round.
struct RoundFeedback {
  Observation pre;
  Decision decision;
  Action opp_action = Action::Cooperate;
  double my_reward = 0.0;
  double opp_reward = 0.0;
  OutcomeLabel my_outcome = OutcomeLabel::Start;
  OutcomeLabel opp_outcome = OutcomeLabel::Start;
};

/// Fixed-policy decision rules, exposed for direct testing.
Decision nice_decide();
Decision greedy_decide(const Game& game);
Decision tft_decide(const Observation& obs);

/// Own-payoff argmax against a fixed opponent action; ties split 50/50.
Action best_response(const Game& game, Action predicted_opp, Rng& rng);

/// Composite actor state for the Predictive and Other's-Model phenotypes:
/// own previous outcome label crossed with the prediction just made.
int composite_state(OutcomeLabel my_prev_outcome, Action prediction);
inline constexpr int kCompositeStates = kOutcomeCount * 2;

/// One of the seven phenotypes bound to a game. decide() and redecide()
/// never mutate the agent; observe() is the only mutator, which makes any
/// round replayable from its pre-observation.
class Agent {
 public:
  Agent(Phenotype phenotype, const Game& game, TdParams params = {},
        PredictorStateMode predictor_mode = PredictorStateMode::OppAction,
        CriticMode critic_mode = CriticMode::Immediate);

  Phenotype phenotype() const { return phenotype_; }
  const Game& game() const { return *game_; }
  PredictorStateMode predictor_mode() const { return predictor_mode_; }
  CriticMode critic_mode() const { return critic_mode_; }

  Decision decide(const Observation& obs, Rng& rng) const;

  /// Mid-round correction: the prediction is replaced by the opponent's
  /// observed target and the action recomputed from it. Predictive
  /// phenotypes only.
  Decision redecide(const Observation& obs, Action observed_opp_target,
                    Rng& rng) const;

  void observe(const RoundFeedback& fb);

  /// Predictor table (Rational/Predictive: implicit-reward learner;
  /// OthersModel: the opponent model). Null for other phenotypes.
  const TabularLearner* predictor() const { return predictor_.get(); }
  /// Actor table (Original: outcome states; Predictive/OthersModel:
  /// composite states). Null for other phenotypes.
  const TabularLearner* actor() const { return actor_.get(); }

  nlohmann::json dump() const;

 private:
  int predictor_state(const Observation& obs) const;
  int predictor_state_after(const RoundFeedback& fb) const;
  Action actor_action(const Observation& obs, Action prediction,
                      Rng& rng) const;
  void learn(TabularLearner& learner, double& prev_reward, int s_prev,
             Action taken, double reward, int s_cur);

  Phenotype phenotype_;
  const Game* game_;
  PredictorStateMode predictor_mode_;
  CriticMode critic_mode_;
  std::unique_ptr<TabularLearner> predictor_;
  std::unique_ptr<TabularLearner> actor_;
  // Previous reward per table, the immediate critic's V(s_prev) source.
  double predictor_prev_reward_ = 0.0;
  double actor_prev_reward_ = 0.0;
};

}  // namespace dyadlab
