#include "dyadlab/games.hpp"

#include <algorithm>

namespace dyadlab {

std::string to_string(OutcomeLabel o) {
  switch (o) {
    case OutcomeLabel::Start: return "Start";
    case OutcomeLabel::R: return "R";
    case OutcomeLabel::S: return "S";
    case OutcomeLabel::T: return "T";
    case OutcomeLabel::P: return "P";
  }
  throw std::logic_error("bad OutcomeLabel");
}

OutcomeLabel outcome_from_string(const std::string& s) {
  if (s == "Start") return OutcomeLabel::Start;
  if (s == "R") return OutcomeLabel::R;
  if (s == "S") return OutcomeLabel::S;
  if (s == "T") return OutcomeLabel::T;
  if (s == "P") return OutcomeLabel::P;
  throw std::invalid_argument("unknown outcome label: " + s);
}

std::string to_string(OrderingClass c) {
  switch (c) {
    case OrderingClass::PD: return "pd";
    case OrderingClass::SH: return "sh";
    case OrderingClass::HD: return "hd";
    case OrderingClass::HG: return "hg";
    case OrderingClass::BoE: return "boe";
  }
  throw std::logic_error("bad OrderingClass");
}

OrderingClass ordering_from_string(const std::string& s) {
  if (s == "pd") return OrderingClass::PD;
  if (s == "sh") return OrderingClass::SH;
  if (s == "hd") return OrderingClass::HD;
  if (s == "hg") return OrderingClass::HG;
  if (s == "boe") return OrderingClass::BoE;
  throw std::invalid_argument("unknown ordering class: " + s);
}

Game::Game(std::string name, std::array<std::array<PayoffPair, 2>, 2> matrix,
           OrderingClass ordering)
    : name_(std::move(name)), matrix_(matrix), ordering_(ordering) {}

std::string Game::action_label(Action a) const {
  if (ordering_ == OrderingClass::BoE) {
    return a == Action::Cooperate ? "A" : "B";
  }
  return a == Action::Cooperate ? "C" : "D";
}

bool Game::symmetric() const {
  for (Action a : {Action::Cooperate, Action::Defect}) {
    for (Action b : {Action::Cooperate, Action::Defect}) {
      if (payoff(a, b).self != payoff(b, a).opponent) return false;
    }
  }
  return true;
}

nlohmann::json Game::to_json() const {
  const auto pair = [&](Action a, Action b) {
    PayoffPair p = payoff(a, b);
    return nlohmann::json::array({p.self, p.opponent});
  };
  return nlohmann::json{
      {"name", name_},
      {"payoff",
       {{"cc", pair(Action::Cooperate, Action::Cooperate)},
        {"cd", pair(Action::Cooperate, Action::Defect)},
        {"dc", pair(Action::Defect, Action::Cooperate)},
        {"dd", pair(Action::Defect, Action::Defect)}}},
      {"ordering_class", to_string(ordering_)}};
}

Game Game::from_json(const nlohmann::json& j) {
  const auto cell = [&](const char* key) {
    const auto& v = j.at("payoff").at(key);
    if (!v.is_array() || v.size() != 2) {
      throw std::invalid_argument(std::string("payoff.") + key +
                                  " must be a [self, opponent] integer pair");
    }
    return PayoffPair{v[0].get<int>(), v[1].get<int>()};
  };
  std::array<std::array<PayoffPair, 2>, 2> m{};
  m[0][0] = cell("cc");
  m[0][1] = cell("cd");
  m[1][0] = cell("dc");
  m[1][1] = cell("dd");
  return Game(j.at("name").get<std::string>(), m,
              ordering_from_string(j.at("ordering_class").get<std::string>()));
}

namespace {

Game make(const char* name, PayoffPair cc, PayoffPair cd, PayoffPair dc,
          PayoffPair dd, OrderingClass ordering) {
  return Game(name, {{{cc, cd}, {dc, dd}}}, ordering);
}

}  // namespace

std::vector<Game> builtin_games() {
  return {
      make("prisoners_dilemma", {2, 2}, {0, 3}, {3, 0}, {1, 1}, OrderingClass::PD),
      make("stag_hunt", {3, 3}, {0, 2}, {2, 0}, {1, 1}, OrderingClass::SH),
      make("hawk_dove", {2, 2}, {1, 3}, {3, 1}, {0, 0}, OrderingClass::HD),
      make("harmony", {3, 3}, {1, 2}, {2, 1}, {0, 0}, OrderingClass::HG),
      // Battle of the Exes: Cooperate = A (low reward), Defect = B (high).
      make("battle_of_the_exes", {0, 0}, {1, 4}, {4, 1}, {0, 0}, OrderingClass::BoE),
  };
}

const Game& builtin_game(const std::string& name) {
  static const std::vector<Game> games = builtin_games();
  for (const Game& g : games) {
    if (g.name() == name) return g;
  }
  throw std::invalid_argument("unknown game: " + name);
}

OutcomeLabel classify_outcome(const Game& /*game*/, Action a_self, Action a_other) {
  // The same joint-action map covers all five games. For the Battle of the
  // Exes this labels by reward role: B-vs-A earns the high payoff (T),
  // A-vs-B the low one (S), and the two zero-reward ties become R and P.
  if (a_self == Action::Cooperate) {
    return a_other == Action::Cooperate ? OutcomeLabel::R : OutcomeLabel::S;
  }
  return a_other == Action::Cooperate ? OutcomeLabel::T : OutcomeLabel::P;
}

Rstp scalar_rstp(const Game& game) {
  return Rstp{
      game.payoff(Action::Cooperate, Action::Cooperate).self,
      game.payoff(Action::Cooperate, Action::Defect).self,
      game.payoff(Action::Defect, Action::Cooperate).self,
      game.payoff(Action::Defect, Action::Defect).self,
  };
}

bool validate_ordering(const Game& game) {
  const auto [r, s, t, p] = scalar_rstp(game);
  switch (game.ordering_class()) {
    case OrderingClass::PD: return t > r && r > p && p > s;
    case OrderingClass::SH: return r > t && t > p && p > s;
    case OrderingClass::HD: return t > r && r > s && s > p;
    case OrderingClass::HG: return r > t && t > s && s > p;
    case OrderingClass::BoE: return t > s && r == 0 && p == 0;
  }
  throw std::logic_error("bad OrderingClass");
}

}  // namespace dyadlab
