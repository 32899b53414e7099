#pragma once

#include <string>
#include <vector>

#include "dyadlab/engine_discrete.hpp"

namespace dyadlab {

/// Joint-action category of a round: CC=0, CD=1, DC=2, DD=3 (model first).
int joint_outcome_index(const RoundRecord& rec);

/// How the per-round outcome probability is estimated from a dyad's own
/// history. Cumulative counts every previous round as one pool; Markov1
/// conditions on the immediately preceding joint outcome, which lets
/// period-two equilibria (turn-taking) register as stable.
enum class SurprisalEstimator { Cumulative, Markov1 };

std::string to_string(SurprisalEstimator e);
SurprisalEstimator estimator_from_string(const std::string& s);

struct SurprisalParams {
  SurprisalEstimator estimator = SurprisalEstimator::Cumulative;
};

/// Mean seat-A reward over every round of every dyad in the cell.
double efficacy(const std::vector<std::vector<RoundRecord>>& dyads);

/// Self-information −log2(p), defined for p in (0, 1].
double surprisal(double p);

/// Per-round surprisal of one dyad's joint-outcome stream under add-one
/// smoothing. Round 0 always scores the uniform prior, 2 bits.
std::vector<double> surprisal_series(const std::vector<RoundRecord>& dyad,
                                     SurprisalParams params = {});

/// Pointwise mean of per-dyad surprisal series. Dyads must share a length.
std::vector<double> mean_surprisal(
    const std::vector<std::vector<RoundRecord>>& dyads,
    SurprisalParams params = {});

struct PredictionAccuracy {
  std::vector<double> per_round_mean;  // mean seat-A correctness per round
  double accumulated_error = 0.0;      // 1 - overall mean correctness
};

/// Requires every record to carry a seat-A prediction flag; a cell from a
/// non-predictive phenotype is an error, not a zero.
PredictionAccuracy prediction_accuracy(
    const std::vector<std::vector<RoundRecord>>& dyads);

}  // namespace dyadlab
