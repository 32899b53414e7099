#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace dyadlab {

enum class Action : std::uint8_t { Cooperate = 0, Defect = 1 };

constexpr Action other(Action a) {
  return a == Action::Cooperate ? Action::Defect : Action::Cooperate;
}

constexpr int action_index(Action a) { return a == Action::Cooperate ? 0 : 1; }

/// Per-agent outcome of a round. Start is the pseudo-state before round 0.
enum class OutcomeLabel : std::uint8_t { Start = 0, R = 1, S = 2, T = 3, P = 4 };

constexpr int outcome_index(OutcomeLabel o) { return static_cast<int>(o); }

inline constexpr int kOutcomeCount = 5;

std::string to_string(OutcomeLabel o);
OutcomeLabel outcome_from_string(const std::string& s);

/// How the four canonical scalars must relate for a game to be well formed.
enum class OrderingClass : std::uint8_t {
  PD,   // T > R > P > S
  SH,   // R > T > P > S
  HD,   // T > R > S > P
  HG,   // R > T > S > P
  BoE,  // T > S and R = P = 0
};

std::string to_string(OrderingClass c);
OrderingClass ordering_from_string(const std::string& s);

struct PayoffPair {
  int self = 0;
  int opponent = 0;
  bool operator==(const PayoffPair&) const = default;
};

struct Rstp {
  int r = 0, s = 0, t = 0, p = 0;
  bool operator==(const Rstp&) const = default;
};

/// A symmetric 2x2 normal-form game. Payoffs are stored row-major from the
/// row player's perspective; `payoff` re-expresses them from either seat.
class Game {
 public:
  Game(std::string name, std::array<std::array<PayoffPair, 2>, 2> matrix,
       OrderingClass ordering);

  const std::string& name() const { return name_; }
  OrderingClass ordering_class() const { return ordering_; }

  /// Payoffs from the perspective of the agent playing `a_self`.
  PayoffPair payoff(Action a_self, Action a_other) const {
    return matrix_[action_index(a_self)][action_index(a_other)];
  }

  /// "A"/"B" in the Battle of the Exes, "C"/"D" elsewhere.
  std::string action_label(Action a) const;

  bool symmetric() const;

  nlohmann::json to_json() const;
  static Game from_json(const nlohmann::json& j);

 private:
  std::string name_;
  std::array<std::array<PayoffPair, 2>, 2> matrix_;
  OrderingClass ordering_;
};

/// The five benchmark games with their canonical payoff tables.
std::vector<Game> builtin_games();

/// Looks up a builtin game by its stable name ("prisoners_dilemma", ...).
const Game& builtin_game(const std::string& name);

OutcomeLabel classify_outcome(const Game& game, Action a_self, Action a_other);

/// Extracts (R, S, T, P) as seen from either seat of a symmetric game.
Rstp scalar_rstp(const Game& game);

bool validate_ordering(const Game& game);

}  // namespace dyadlab
