#include "dyadlab/rl_core.hpp"

#include <cmath>

#include "doctest.h"

using namespace dyadlab;

TEST_CASE("param validation") {
  CHECK(validate_params(TdParams{}).empty());
  TdParams bad;
  bad.gamma = 1.0;
  bad.delta = 0.0;
  bad.alpha = -0.1;
  bad.temperature = 0.0;
  CHECK(validate_params(bad).size() == 4);
  CHECK_THROWS_AS(TabularLearner(5, bad), std::invalid_argument);
  CHECK_THROWS_AS(TabularLearner(0, TdParams{}), std::invalid_argument);
}

TEST_CASE("fresh learner is uniform and zero valued") {
  TabularLearner l(5, TdParams{});
  for (int s = 0; s < 5; ++s) {
    auto p = l.action_probs(s);
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.5));
    CHECK(l.value(s) == 0.0);
  }
}

TEST_CASE("td error at zero tables equals the reward") {
  TabularLearner l(5, TdParams{});
  CHECK(l.td_error(0, 3.0, 1) == doctest::Approx(3.0));
  CHECK(l.td_error(2, 0.0, 2) == doctest::Approx(0.0));
}

TEST_CASE("single update moves actor by delta*e and critic by alpha*e") {
  TabularLearner l(5, TdParams{});
  double e = l.td_error(0, 3.0, 1);
  l.apply_update(0, Action::Cooperate, e);
  CHECK(l.pref(0, Action::Cooperate) == doctest::Approx(0.45));
  CHECK(l.pref(0, Action::Defect) == 0.0);
  CHECK(l.value(0) == doctest::Approx(0.3));
  CHECK(l.value(1) == 0.0);
}

TEST_CASE("two identical self-transition rounds match hand arithmetic") {
  // s_prev = s_cur = 0, r = 2, defaults alpha=0.1 gamma=0.9:
  //   after round 1: V = alpha*r = 0.2
  //   e2 = r + gamma*V - V = 2 + 0.18 - 0.2 = 1.98
  //   after round 2: V = 0.2 + alpha*1.98 = 0.398
  TabularLearner l(2, TdParams{});
  for (int i = 0; i < 2; ++i) {
    double e = l.td_error(0, 2.0, 0);
    l.apply_update(0, Action::Defect, e);
  }
  CHECK(l.value(0) == doctest::Approx(0.398).epsilon(1e-12));
  CHECK(l.pref(0, Action::Defect) ==
        doctest::Approx(0.15 * 2.0 + 0.15 * 1.98).epsilon(1e-12));
}

TEST_CASE("softmax probabilities follow the preference gap") {
  TdParams params;
  params.temperature = 1.0;
  TabularLearner l(1, params);
  l.apply_update(0, Action::Cooperate, 10.0);  // pref C = 1.5, V = 1.0
  CHECK(l.pref(0, Action::Cooperate) == doctest::Approx(1.5));
  auto p = l.action_probs(0);
  CHECK(p[0] == doctest::Approx(1.0 / (1.0 + std::exp(-1.5))).epsilon(1e-12));
  CHECK(p[0] + p[1] == doctest::Approx(1.0));

  // Shift invariance: only the gap matters, at any temperature.
  TabularLearner shifted(1, TdParams{});
  shifted.apply_pref_update(0, Action::Cooperate, 30.0);
  shifted.apply_pref_update(0, Action::Defect, 20.0);
  TabularLearner base(1, TdParams{});
  base.apply_pref_update(0, Action::Cooperate, 10.0);
  CHECK(shifted.action_probs(0)[0] ==
        doctest::Approx(base.action_probs(0)[0]).epsilon(1e-12));

  // A wide gap at temperature 1 is a near-certain choice.
  TabularLearner wide(1, params);
  wide.apply_pref_update(0, Action::Cooperate, 10.0 / params.delta);
  wide.apply_pref_update(0, Action::Defect, -10.0 / params.delta);
  CHECK(wide.action_probs(0)[0] ==
        doctest::Approx(1.0 / (1.0 + std::exp(-20.0))).epsilon(1e-12));
}

TEST_CASE("select_action matches its stated distribution") {
  TabularLearner l(1, TdParams{});
  l.apply_update(0, Action::Cooperate, 10.0);
  double pc = l.action_probs(0)[0];
  Rng rng(42);
  int coop = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i)
    if (l.select_action(0, rng) == Action::Cooperate) ++coop;
  CHECK(static_cast<double>(coop) / n == doctest::Approx(pc).epsilon(0.02));
}

TEST_CASE("state bounds are enforced") {
  TabularLearner l(3, TdParams{});
  Rng rng(1);
  CHECK_THROWS_AS(l.select_action(3, rng), std::out_of_range);
  CHECK_THROWS_AS(l.value(-1), std::out_of_range);
  CHECK_THROWS_AS(l.td_error(0, 1.0, 7), std::out_of_range);
  CHECK_THROWS_AS(l.apply_update(5, Action::Cooperate, 1.0), std::out_of_range);
}

TEST_CASE("implicit reward is the prediction sign") {
  CHECK(implicit_reward(Action::Cooperate, Action::Cooperate) == 1.0);
  CHECK(implicit_reward(Action::Defect, Action::Defect) == 1.0);
  CHECK(implicit_reward(Action::Cooperate, Action::Defect) == -1.0);
  CHECK(implicit_reward(Action::Defect, Action::Cooperate) == -1.0);
}

TEST_CASE("pref-only update leaves the value table alone") {
  TabularLearner l(3, TdParams{});
  l.apply_pref_update(1, Action::Defect, 2.0);
  CHECK(l.pref(1, Action::Defect) == doctest::Approx(0.3));
  CHECK(l.pref(1, Action::Cooperate) == 0.0);
  for (int s = 0; s < 3; ++s) CHECK(l.value(s) == 0.0);
  CHECK_THROWS_AS(l.apply_pref_update(3, Action::Defect, 1.0),
                  std::out_of_range);
}

TEST_CASE("immediate critic error matches hand arithmetic") {
  TdParams p;  // gamma = 0.9
  // e = r + gamma*(gamma*r) - gamma*prev_r = 1.81*r - 0.9*prev_r
  CHECK(immediate_td_error(p, 3.0, 0.0) == doctest::Approx(5.43));
  CHECK(immediate_td_error(p, 2.0, 2.0) == doctest::Approx(1.82));
  CHECK(immediate_td_error(p, 0.0, 0.0) == 0.0);
  CHECK(immediate_td_error(p, 1.0, -1.0) ==
        doctest::Approx(1.81 + 0.9));  // wrong-then-right prediction swing
  TdParams flat;
  flat.gamma = 0.0;
  CHECK(immediate_td_error(flat, 7.0, 3.0) == doctest::Approx(7.0));
}

TEST_CASE("rng determinism and uniform range") {
  Rng a(123), b(123), c(124);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 100; ++i) {
    double ua = a.uniform(), ub = b.uniform(), uc = c.uniform();
    all_equal = all_equal && (ua == ub);
    any_diff = any_diff || (ua != uc);
    CHECK(ua >= 0.0);
    CHECK(ua < 1.0);
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("learner dump carries tables") {
  TabularLearner l(2, TdParams{}, {"s0", "s1"});
  l.apply_update(1, Action::Defect, 2.0);
  auto j = l.dump();
  CHECK(j["params"]["delta"] == doctest::Approx(0.15));
  CHECK(j["states"].size() == 2);
  CHECK(j["states"][1]["name"] == "s1");
  CHECK(j["states"][1]["pref_d"] == doctest::Approx(0.3));
}
