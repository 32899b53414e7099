#pragma once

#include <array>
#include <string>
#include <vector>

#include "json.hpp"

#include "dyadlab/games.hpp"
#include "dyadlab/rng.hpp"

namespace dyadlab {

struct TdParams {
  double gamma = 0.9;   // discount factor
  double delta = 0.15;  // actor learning rate
  double alpha = 0.1;   // critic learning rate (learned-critic mode only)
  // Softmax action-selection temperature. The default is calibrated so that
  // learners converge to the best response against a constant opponent in
  // ~99% of dyads: a larger temperature keeps early preferences closer to
  // uniform, which lets the (fixed-size) update steps average out before a
  // run of unlucky draws can entrench the wrong action.
  double temperature = 4.0;
};

/// Validates ranges; returns a message per violation, empty if fine.
std::vector<std::string> validate_params(const TdParams& p);

/// Tabular actor-critic TD(0) learner over a small discrete state space.
/// States are dense indices [0, state_count); callers own the meaning of
/// each index. The actor is a preference table sampled through a softmax,
/// the critic a value table updated by the same one-step TD error.
class TabularLearner {
 public:
  TabularLearner(int state_count, TdParams params,
                 std::vector<std::string> state_names = {});

  int state_count() const { return static_cast<int>(values_.size()); }
  const TdParams& params() const { return params_; }

  Action select_action(int state, Rng& rng) const;

  /// {P(Cooperate), P(Defect)} under the softmax policy at `state`.
  std::array<double, 2> action_probs(int state) const;

  /// e = r + gamma * V(s_cur) - V(s_prev). Pure; no table change.
  double td_error(int s_prev, double reward, int s_cur) const;

  /// prefs(s_prev, taken) += delta * e and V(s_prev) += alpha * e.
  void apply_update(int s_prev, Action taken, double e);

  /// Actor-only update: prefs(s_prev, taken) += delta * e. The value table
  /// is untouched; used when the critic term is computed outside the
  /// learner (see immediate_td_error).
  void apply_pref_update(int s_prev, Action taken, double e);

  double value(int state) const;
  double pref(int state, Action a) const;

  nlohmann::json dump() const;

 private:
  void check_state(int state) const;

  std::vector<double> values_;
  std::vector<std::array<double, 2>> prefs_;
  TdParams params_;
  std::vector<std::string> state_names_;
};

/// +1 for a correct prediction of the opponent's action, -1 otherwise.
inline double implicit_reward(Action predicted, Action actual) {
  return predicted == actual ? 1.0 : -1.0;
}

/// TD error under an immediate critic, where a state's value is the
/// discounted reward just collected on arrival, V(s_t) = gamma * r_t:
///   e = r + gamma * (gamma * r) - gamma * prev_r.
/// No value table is involved, so the error always tracks the current
/// payoff landscape instead of a bootstrapped estimate.
double immediate_td_error(const TdParams& params, double reward,
                          double prev_reward);

}  // namespace dyadlab
