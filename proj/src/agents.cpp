#include "dyadlab/agents.hpp"

#include <stdexcept>

namespace dyadlab {

namespace {

const char* kPhenotypeNames[] = {"nice",     "greedy",     "tft",
                                 "original", "rational",   "predictive",
                                 "others_model"};

std::vector<std::string> outcome_state_names() {
  return {"Start", "R", "S", "T", "P"};
}

std::vector<std::string> composite_state_names() {
  std::vector<std::string> names;
  for (const auto& o : outcome_state_names()) {
    names.push_back(o + "|predC");
    names.push_back(o + "|predD");
  }
  return names;
}

std::vector<std::string> predictor_state_names(PredictorStateMode mode) {
  if (mode == PredictorStateMode::OppAction)
    return {"Start", "AfterC", "AfterD"};
  return outcome_state_names();
}

}  // namespace

std::string to_string(Phenotype p) {
  return kPhenotypeNames[static_cast<int>(p)];
}

Phenotype phenotype_from_string(const std::string& s) {
  for (int i = 0; i < 7; ++i)
    if (s == kPhenotypeNames[i]) return static_cast<Phenotype>(i);
  throw std::invalid_argument("unknown phenotype \"" + s +
                              "\" (expected one of: nice, greedy, tft, "
                              "original, rational, predictive, others_model)");
}

std::vector<std::string> phenotype_names() {
  return {kPhenotypeNames, kPhenotypeNames + 7};
}

bool is_learning(Phenotype p) {
  switch (p) {
    case Phenotype::Original:
    case Phenotype::Rational:
    case Phenotype::Predictive:
    case Phenotype::OthersModel:
      return true;
    default:
      return false;
  }
}

bool is_predictive(Phenotype p) {
  switch (p) {
    case Phenotype::Rational:
    case Phenotype::Predictive:
    case Phenotype::OthersModel:
      return true;
    default:
      return false;
  }
}

std::string to_string(PredictorStateMode m) {
  return m == PredictorStateMode::OppAction ? "opp_action" : "opp_outcome";
}

PredictorStateMode predictor_state_from_string(const std::string& s) {
  if (s == "opp_action") return PredictorStateMode::OppAction;
  if (s == "opp_outcome") return PredictorStateMode::OppOutcome;
  throw std::invalid_argument("unknown predictor_state \"" + s +
                              "\" (expected opp_action or opp_outcome)");
}

std::string to_string(CriticMode m) {
  return m == CriticMode::Immediate ? "immediate" : "learned";
}

CriticMode critic_mode_from_string(const std::string& s) {
  if (s == "immediate") return CriticMode::Immediate;
  if (s == "learned") return CriticMode::Learned;
  throw std::invalid_argument("unknown critic \"" + s +
                              "\" (expected immediate or learned)");
}

Decision nice_decide() { return {Action::Cooperate, std::nullopt}; }

Decision greedy_decide(const Game& game) {
  Rstp v = scalar_rstp(game);
  Action a = v.r > v.t ? Action::Cooperate : Action::Defect;
  return {a, std::nullopt};
}

Decision tft_decide(const Observation& obs) {
  if (obs.round_index == 0) return {Action::Cooperate, std::nullopt};
  if (!obs.opp_prev_action)
    throw std::logic_error("tft_decide: opp_prev_action absent after round 0");
  return {*obs.opp_prev_action, std::nullopt};
}

Action best_response(const Game& game, Action predicted_opp, Rng& rng) {
  int pc = game.payoff(Action::Cooperate, predicted_opp).self;
  int pd = game.payoff(Action::Defect, predicted_opp).self;
  if (pc > pd) return Action::Cooperate;
  if (pd > pc) return Action::Defect;
  return rng.uniform() < 0.5 ? Action::Cooperate : Action::Defect;
}

int composite_state(OutcomeLabel my_prev_outcome, Action prediction) {
  return outcome_index(my_prev_outcome) * 2 + action_index(prediction);
}

Agent::Agent(Phenotype phenotype, const Game& game, TdParams params,
             PredictorStateMode predictor_mode, CriticMode critic_mode)
    : phenotype_(phenotype),
      game_(&game),
      predictor_mode_(predictor_mode),
      critic_mode_(critic_mode) {
  switch (phenotype_) {
    case Phenotype::Original:
      actor_ = std::make_unique<TabularLearner>(kOutcomeCount, params,
                                                outcome_state_names());
      break;
    case Phenotype::Rational:
      predictor_ = std::make_unique<TabularLearner>(
          predictor_mode_ == PredictorStateMode::OppAction ? 3 : kOutcomeCount,
          params, predictor_state_names(predictor_mode_));
      break;
    case Phenotype::Predictive:
      predictor_ = std::make_unique<TabularLearner>(
          predictor_mode_ == PredictorStateMode::OppAction ? 3 : kOutcomeCount,
          params, predictor_state_names(predictor_mode_));
      actor_ = std::make_unique<TabularLearner>(kCompositeStates, params,
                                                composite_state_names());
      break;
    case Phenotype::OthersModel:
      // The opponent model mirrors the opponent's own TD state space, so it
      // always keys on the opponent's outcome label.
      predictor_ = std::make_unique<TabularLearner>(kOutcomeCount, params,
                                                    outcome_state_names());
      actor_ = std::make_unique<TabularLearner>(kCompositeStates, params,
                                                composite_state_names());
      break;
    default:
      break;
  }
}

int Agent::predictor_state(const Observation& obs) const {
  if (phenotype_ == Phenotype::OthersModel)
    return outcome_index(obs.opp_prev_outcome);
  if (predictor_mode_ == PredictorStateMode::OppAction)
    return obs.opp_prev_action ? 1 + action_index(*obs.opp_prev_action) : 0;
  return outcome_index(obs.opp_prev_outcome);
}

int Agent::predictor_state_after(const RoundFeedback& fb) const {
  if (phenotype_ == Phenotype::OthersModel)
    return outcome_index(fb.opp_outcome);
  if (predictor_mode_ == PredictorStateMode::OppAction)
    return 1 + action_index(fb.opp_action);
  return outcome_index(fb.opp_outcome);
}

Action Agent::actor_action(const Observation& obs, Action prediction,
                           Rng& rng) const {
  return actor_->select_action(composite_state(obs.my_prev_outcome, prediction),
                               rng);
}

Decision Agent::decide(const Observation& obs, Rng& rng) const {
  switch (phenotype_) {
    case Phenotype::Nice:
      return nice_decide();
    case Phenotype::Greedy:
      return greedy_decide(*game_);
    case Phenotype::TitForTat:
      return tft_decide(obs);
    case Phenotype::Original: {
      int s = outcome_index(obs.my_prev_outcome);
      return {actor_->select_action(s, rng), std::nullopt};
    }
    case Phenotype::Rational: {
      // The prediction draw comes first so the predictor's RNG trajectory
      // is shared across predictive phenotypes.
      Action pred = predictor_->select_action(predictor_state(obs), rng);
      return {best_response(*game_, pred, rng), pred};
    }
    case Phenotype::Predictive:
    case Phenotype::OthersModel: {
      Action pred = predictor_->select_action(predictor_state(obs), rng);
      return {actor_action(obs, pred, rng), pred};
    }
  }
  throw std::logic_error("decide: unreachable");
}

Decision Agent::redecide(const Observation& obs, Action observed_opp_target,
                         Rng& rng) const {
  switch (phenotype_) {
    case Phenotype::Rational:
      return {best_response(*game_, observed_opp_target, rng),
              observed_opp_target};
    case Phenotype::Predictive:
    case Phenotype::OthersModel:
      return {actor_action(obs, observed_opp_target, rng),
              observed_opp_target};
    default:
      throw std::logic_error("redecide: phenotype " + to_string(phenotype_) +
                             " has no prediction to correct");
  }
}

void Agent::learn(TabularLearner& learner, double& prev_reward, int s_prev,
                  Action taken, double reward, int s_cur) {
  if (critic_mode_ == CriticMode::Learned) {
    double e = learner.td_error(s_prev, reward, s_cur);
    learner.apply_update(s_prev, taken, e);
  } else {
    double e = immediate_td_error(learner.params(), reward, prev_reward);
    learner.apply_pref_update(s_prev, taken, e);
    prev_reward = reward;
  }
}

void Agent::observe(const RoundFeedback& fb) {
  switch (phenotype_) {
    case Phenotype::Nice:
    case Phenotype::Greedy:
    case Phenotype::TitForTat:
      return;
    case Phenotype::Original: {
      int s_prev = outcome_index(fb.pre.my_prev_outcome);
      int s_cur = outcome_index(fb.my_outcome);
      learn(*actor_, actor_prev_reward_, s_prev, fb.decision.action,
            fb.my_reward, s_cur);
      return;
    }
    case Phenotype::Rational:
    case Phenotype::Predictive: {
      if (!fb.decision.prediction)
        throw std::logic_error("observe: prediction missing from feedback");
      double r = implicit_reward(*fb.decision.prediction, fb.opp_action);
      learn(*predictor_, predictor_prev_reward_, predictor_state(fb.pre),
            *fb.decision.prediction, r, predictor_state_after(fb));
      if (phenotype_ == Phenotype::Predictive) {
        int a_prev = composite_state(fb.pre.my_prev_outcome,
                                     *fb.decision.prediction);
        int a_cur = composite_state(fb.my_outcome, *fb.decision.prediction);
        learn(*actor_, actor_prev_reward_, a_prev, fb.decision.action,
              fb.my_reward, a_cur);
      }
      return;
    }
    case Phenotype::OthersModel: {
      if (!fb.decision.prediction)
        throw std::logic_error("observe: prediction missing from feedback");
      // Model update replays the opponent's own experience: its state
      // transition, its taken action, its explicit reward.
      learn(*predictor_, predictor_prev_reward_,
            outcome_index(fb.pre.opp_prev_outcome), fb.opp_action,
            fb.opp_reward, outcome_index(fb.opp_outcome));
      int a_prev = composite_state(fb.pre.my_prev_outcome,
                                   *fb.decision.prediction);
      int a_cur = composite_state(fb.my_outcome, *fb.decision.prediction);
      learn(*actor_, actor_prev_reward_, a_prev, fb.decision.action,
            fb.my_reward, a_cur);
      return;
    }
  }
}

nlohmann::json Agent::dump() const {
  nlohmann::json j;
  j["phenotype"] = to_string(phenotype_);
  j["game"] = game_->name();
  if (is_learning(phenotype_)) j["critic"] = to_string(critic_mode_);
  if (predictor_) {
    j["predictor"] = predictor_->dump();
    if (phenotype_ != Phenotype::OthersModel)
      j["predictor_state"] = to_string(predictor_mode_);
  }
  if (actor_) j["actor"] = actor_->dump();
  return j;
}

}  // namespace dyadlab
