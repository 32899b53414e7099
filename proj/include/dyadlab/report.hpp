#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dyadlab/config.hpp"

namespace dyadlab {

/// Metric digest of one cell plus the per-round series the plots draw.
struct CellSummary {
  CellKey key;
  double efficacy = 0.0;
  double late_mean_reward = 0.0;
  bool has_predictions = false;
  double accumulated_prediction_error = 0.0;  // meaningful iff has_predictions
  double late_mean_surprisal = 0.0;
  int timeout_rounds = 0;  // continuous runs only
  std::vector<double> surprisal_series;
  std::vector<double> accuracy_series;  // empty unless has_predictions
};

/// The trailing window the late-run digests average over.
int late_window(int rounds);

CellSummary summarize_cell(const CellKey& key,
                           const std::vector<std::vector<RoundRecord>>& dyads,
                           int timeout_rounds, SurprisalEstimator estimator);

/// Deterministic summary document: version, config echo, and one digest per
/// cell in grid order. Carries no timestamp so regeneration is bit-stable.
nlohmann::json build_summary(const RunConfig& config,
                             const std::vector<CellSummary>& cells);

/// Chart files a run with plots enabled produces, relative to the run dir:
/// per opponent an efficacy bar chart, a surprisal line chart, and (when any
/// of its cells predict) a prediction-accuracy line chart.
std::vector<std::string> plot_file_names(const RunConfig& config,
                                         const std::vector<CellSummary>& cells);

std::string render_efficacy_svg(const RunConfig& config,
                                const std::string& opponent,
                                const std::vector<CellSummary>& cells);
std::string render_surprisal_svg(const RunConfig& config,
                                 const std::string& opponent,
                                 const std::vector<CellSummary>& cells);
/// Empty string when no cell of this opponent carries predictions.
std::string render_accuracy_svg(const RunConfig& config,
                                const std::string& opponent,
                                const std::vector<CellSummary>& cells);

/// Writes summary.json and, when want_plots, the plot SVGs under run_dir.
/// Returns the files written, relative to run_dir.
std::vector<std::string> write_reports(const std::string& run_dir,
                                       const RunConfig& config,
                                       const std::vector<CellSummary>& cells,
                                       bool want_plots);

/// Rebuilds summary.json (and plots per the manifest's config, or always
/// with force_plots) from a run directory. Missing or malformed inputs are
/// all reported to `diag` before the nonzero return.
int report_command(const std::string& run_dir, bool force_plots,
                   std::ostream& diag);

}  // namespace dyadlab
