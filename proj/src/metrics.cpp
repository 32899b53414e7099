#include "dyadlab/metrics.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace dyadlab {

int joint_outcome_index(const RoundRecord& rec) {
  return action_index(rec.action_a) * 2 + action_index(rec.action_b);
}

std::string to_string(SurprisalEstimator e) {
  return e == SurprisalEstimator::Cumulative ? "cumulative" : "markov1";
}

SurprisalEstimator estimator_from_string(const std::string& s) {
  if (s == "cumulative") return SurprisalEstimator::Cumulative;
  if (s == "markov1") return SurprisalEstimator::Markov1;
  throw std::invalid_argument("unknown surprisal_estimator \"" + s +
                              "\" (expected cumulative or markov1)");
}

double efficacy(const std::vector<std::vector<RoundRecord>>& dyads) {
  double sum = 0.0;
  size_t n = 0;
  for (const auto& dyad : dyads)
    for (const auto& rec : dyad) {
      sum += rec.reward_a;
      ++n;
    }
  if (n == 0) throw std::invalid_argument("efficacy: no records");
  return sum / static_cast<double>(n);
}

double surprisal(double p) {
  if (!(p > 0.0 && p <= 1.0))
    throw std::domain_error("surprisal: p must be in (0, 1], got " +
                            std::to_string(p));
  return -std::log2(p);
}

std::vector<double> surprisal_series(const std::vector<RoundRecord>& dyad,
                                     SurprisalParams params) {
  std::vector<double> series;
  series.reserve(dyad.size());
  if (params.estimator == SurprisalEstimator::Cumulative) {
    std::array<int, 4> counts{};
    for (size_t t = 0; t < dyad.size(); ++t) {
      int o = joint_outcome_index(dyad[t]);
      double p = (counts[static_cast<size_t>(o)] + 1.0) /
                 (static_cast<double>(t) + 4.0);
      series.push_back(surprisal(p));
      ++counts[static_cast<size_t>(o)];
    }
  } else {
    std::array<std::array<int, 4>, 4> trans{};
    std::array<int, 4> ctx{};
    for (size_t t = 0; t < dyad.size(); ++t) {
      int o = joint_outcome_index(dyad[t]);
      if (t == 0) {
        series.push_back(surprisal(0.25));
      } else {
        int c = joint_outcome_index(dyad[t - 1]);
        double p = (trans[static_cast<size_t>(c)][static_cast<size_t>(o)] + 1.0) /
                   (ctx[static_cast<size_t>(c)] + 4.0);
        series.push_back(surprisal(p));
        ++trans[static_cast<size_t>(c)][static_cast<size_t>(o)];
        ++ctx[static_cast<size_t>(c)];
      }
    }
  }
  return series;
}

std::vector<double> mean_surprisal(
    const std::vector<std::vector<RoundRecord>>& dyads,
    SurprisalParams params) {
  if (dyads.empty()) throw std::invalid_argument("mean_surprisal: no dyads");
  size_t rounds = dyads.front().size();
  for (const auto& dyad : dyads)
    if (dyad.size() != rounds)
      throw std::invalid_argument("mean_surprisal: ragged dyad lengths");
  std::vector<double> mean(rounds, 0.0);
  for (const auto& dyad : dyads) {
    auto series = surprisal_series(dyad, params);
    for (size_t t = 0; t < rounds; ++t) mean[t] += series[t];
  }
  for (auto& v : mean) v /= static_cast<double>(dyads.size());
  return mean;
}

PredictionAccuracy prediction_accuracy(
    const std::vector<std::vector<RoundRecord>>& dyads) {
  if (dyads.empty())
    throw std::invalid_argument("prediction_accuracy: no dyads");
  size_t rounds = dyads.front().size();
  for (const auto& dyad : dyads)
    if (dyad.size() != rounds)
      throw std::invalid_argument("prediction_accuracy: ragged dyad lengths");

  PredictionAccuracy out;
  out.per_round_mean.assign(rounds, 0.0);
  double correct_total = 0.0;
  for (const auto& dyad : dyads)
    for (size_t t = 0; t < rounds; ++t) {
      if (!dyad[t].pred_correct_a)
        throw std::invalid_argument(
            "prediction_accuracy: seat-A phenotype emits no predictions");
      double c = *dyad[t].pred_correct_a ? 1.0 : 0.0;
      out.per_round_mean[t] += c;
      correct_total += c;
    }
  for (auto& v : out.per_round_mean) v /= static_cast<double>(dyads.size());
  out.accumulated_error =
      1.0 - correct_total / (static_cast<double>(dyads.size()) *
                             static_cast<double>(rounds));
  return out;
}

}  // namespace dyadlab
