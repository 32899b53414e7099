#include "dyadlab/rl_core.hpp"

#include <cmath>
#include <stdexcept>

namespace dyadlab {

std::vector<std::string> validate_params(const TdParams& p) {
  std::vector<std::string> errors;
  if (!(p.gamma >= 0.0 && p.gamma < 1.0))
    errors.push_back("gamma must be in [0, 1), got " + std::to_string(p.gamma));
  if (!(p.delta > 0.0))
    errors.push_back("delta must be > 0, got " + std::to_string(p.delta));
  if (!(p.alpha > 0.0))
    errors.push_back("alpha must be > 0, got " + std::to_string(p.alpha));
  if (!(p.temperature > 0.0))
    errors.push_back("temperature must be > 0, got " +
                     std::to_string(p.temperature));
  return errors;
}

TabularLearner::TabularLearner(int state_count, TdParams params,
                               std::vector<std::string> state_names)
    : params_(params), state_names_(std::move(state_names)) {
  if (state_count <= 0)
    throw std::invalid_argument("TabularLearner: state_count must be > 0");
  auto errors = validate_params(params_);
  if (!errors.empty()) throw std::invalid_argument(errors.front());
  if (!state_names_.empty() &&
      static_cast<int>(state_names_.size()) != state_count)
    throw std::invalid_argument(
        "TabularLearner: state_names size does not match state_count");
  values_.assign(static_cast<size_t>(state_count), 0.0);
  prefs_.assign(static_cast<size_t>(state_count), {0.0, 0.0});
}

void TabularLearner::check_state(int state) const {
  if (state < 0 || state >= state_count())
    throw std::out_of_range("TabularLearner: state " + std::to_string(state) +
                            " outside [0, " + std::to_string(state_count()) +
                            ")");
}

std::array<double, 2> TabularLearner::action_probs(int state) const {
  check_state(state);
  const auto& p = prefs_[static_cast<size_t>(state)];
  // Two-action softmax in its stable logistic form.
  double pc = 1.0 / (1.0 + std::exp((p[1] - p[0]) / params_.temperature));
  return {pc, 1.0 - pc};
}

Action TabularLearner::select_action(int state, Rng& rng) const {
  double pc = action_probs(state)[0];
  return rng.uniform() < pc ? Action::Cooperate : Action::Defect;
}

double TabularLearner::td_error(int s_prev, double reward, int s_cur) const {
  check_state(s_prev);
  check_state(s_cur);
  return reward + params_.gamma * values_[static_cast<size_t>(s_cur)] -
         values_[static_cast<size_t>(s_prev)];
}

void TabularLearner::apply_update(int s_prev, Action taken, double e) {
  check_state(s_prev);
  prefs_[static_cast<size_t>(s_prev)][action_index(taken)] +=
      params_.delta * e;
  values_[static_cast<size_t>(s_prev)] += params_.alpha * e;
}

void TabularLearner::apply_pref_update(int s_prev, Action taken, double e) {
  check_state(s_prev);
  prefs_[static_cast<size_t>(s_prev)][action_index(taken)] +=
      params_.delta * e;
}

double TabularLearner::value(int state) const {
  check_state(state);
  return values_[static_cast<size_t>(state)];
}

double TabularLearner::pref(int state, Action a) const {
  check_state(state);
  return prefs_[static_cast<size_t>(state)][action_index(a)];
}

double immediate_td_error(const TdParams& params, double reward,
                          double prev_reward) {
  double g = params.gamma;
  return reward + g * (g * reward) - g * prev_reward;
}

nlohmann::json TabularLearner::dump() const {
  nlohmann::json j;
  j["params"] = {{"gamma", params_.gamma},
                 {"delta", params_.delta},
                 {"alpha", params_.alpha},
                 {"temperature", params_.temperature}};
  nlohmann::json states = nlohmann::json::array();
  for (int s = 0; s < state_count(); ++s) {
    nlohmann::json row;
    if (!state_names_.empty()) row["name"] = state_names_[static_cast<size_t>(s)];
    row["value"] = values_[static_cast<size_t>(s)];
    row["pref_c"] = prefs_[static_cast<size_t>(s)][0];
    row["pref_d"] = prefs_[static_cast<size_t>(s)][1];
    states.push_back(std::move(row));
  }
  j["states"] = std::move(states);
  return j;
}

}  // namespace dyadlab
