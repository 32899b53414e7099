#include "dyadlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <stdexcept>

#include "dyadlab/run_io.hpp"

namespace dyadlab {

namespace fs = std::filesystem;

namespace {

constexpr const char* kPalette[] = {"#4e79a7", "#e15759", "#59a14f",
                                    "#b07aa1", "#f28e2b", "#76b7b2",
                                    "#edc948"};

const char* model_color(size_t index) {
  return kPalette[index % (sizeof(kPalette) / sizeof(kPalette[0]))];
}

const CellSummary* find_cell(const std::vector<CellSummary>& cells,
                             const std::string& model,
                             const std::string& opponent,
                             const std::string& game) {
  for (const auto& cell : cells)
    if (cell.key.model == model && cell.key.opponent == opponent &&
        cell.key.game == game)
      return &cell;
  return nullptr;
}

std::string num(double v) { return format_number(v); }

void append_text(std::string& svg, double x, double y,
                 const std::string& anchor, int size,
                 const std::string& text) {
  svg += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" +
         anchor + "\" font-family=\"sans-serif\" font-size=\"" +
         std::to_string(size) + "\" fill=\"#333\">" + text + "</text>\n";
}

void append_legend(std::string& svg, const RunConfig& config, double x,
                   double y) {
  for (size_t m = 0; m < config.grid.models.size(); ++m) {
    svg += "<rect x=\"" + num(x) + "\" y=\"" + num(y - 9) +
           "\" width=\"12\" height=\"12\" fill=\"" +
           std::string(model_color(m)) + "\"/>\n";
    std::string label = to_string(config.grid.models[m]);
    append_text(svg, x + 16, y + 1, "start", 12, label);
    x += 22 + 7.5 * static_cast<double>(label.size());
  }
}

/// Decimates a series to at most `cap` points, always keeping the first.
std::vector<size_t> sample_indices(size_t n, size_t cap) {
  std::vector<size_t> idx;
  if (n == 0) return idx;
  size_t stride = (n + cap - 1) / cap;
  if (stride == 0) stride = 1;
  for (size_t i = 0; i < n; i += stride) idx.push_back(i);
  if (idx.back() != n - 1) idx.push_back(n - 1);
  return idx;
}

struct PanelSeries {
  size_t model_index;
  const std::vector<double>* values;
};

/// Shared renderer for the per-game stacked line charts: one panel per game,
/// one polyline per model series within it.
std::string render_line_chart(
    const RunConfig& config, const std::string& opponent,
    const std::string& title, bool fixed_unit_range,
    const std::function<const std::vector<double>*(const CellSummary&)>&
        series_of,
    const std::vector<CellSummary>& cells) {
  const double width = 760;
  const double panel_h = 96;
  const double panel_gap = 30;
  const double left = 56, right = 16, top = 54;
  size_t games = config.grid.games.size();
  double height = top + static_cast<double>(games) * (panel_h + panel_gap) + 8;

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    num(width) + "\" height=\"" + num(height) +
                    "\" viewBox=\"0 0 " + num(width) + " " + num(height) +
                    "\">\n<rect width=\"100%\" height=\"100%\" "
                    "fill=\"#ffffff\"/>\n";
  append_text(svg, left, 22, "start", 15, title);
  append_legend(svg, config, left, 40);

  bool any_series = false;
  for (size_t g = 0; g < games; ++g) {
    const std::string game = config.grid.games[g].name();
    double py = top + static_cast<double>(g) * (panel_h + panel_gap) +
                panel_gap - 8;

    std::vector<PanelSeries> panel;
    double ymax = fixed_unit_range ? 1.0 : 2.0;
    size_t n = 0;
    for (size_t m = 0; m < config.grid.models.size(); ++m) {
      const CellSummary* cell = find_cell(
          cells, to_string(config.grid.models[m]), opponent, game);
      if (!cell) continue;
      const std::vector<double>* values = series_of(*cell);
      if (!values || values->empty()) continue;
      panel.push_back({m, values});
      n = std::max(n, values->size());
      if (!fixed_unit_range)
        for (double v : *values) ymax = std::max(ymax, v);
    }

    svg += "<rect x=\"" + num(left) + "\" y=\"" + num(py) + "\" width=\"" +
           num(width - left - right) + "\" height=\"" + num(panel_h) +
           "\" fill=\"none\" stroke=\"#bbb\"/>\n";
    append_text(svg, left, py - 5, "start", 12, game);
    append_text(svg, left - 6, py + 10, "end", 10, num(ymax));
    append_text(svg, left - 6, py + panel_h, "end", 10, "0");

    if (panel.empty() || n < 2) continue;
    any_series = true;
    double xspan = width - left - right;
    for (const PanelSeries& series : panel) {
      std::string points;
      for (size_t i : sample_indices(series.values->size(), 200)) {
        double x = left + xspan * static_cast<double>(i) /
                              static_cast<double>(n - 1);
        double v = std::clamp((*series.values)[i] / ymax, 0.0, 1.0);
        double y = py + panel_h * (1.0 - v);
        points += num(x) + "," + num(y) + " ";
      }
      svg += "<polyline fill=\"none\" stroke=\"" +
             std::string(model_color(series.model_index)) +
             "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    }
  }
  svg += "</svg>\n";
  return any_series ? svg : std::string();
}

}  // namespace

int late_window(int rounds) { return std::min(200, rounds); }

CellSummary summarize_cell(const CellKey& key,
                           const std::vector<std::vector<RoundRecord>>& dyads,
                           int timeout_rounds, SurprisalEstimator estimator) {
  CellSummary s;
  s.key = key;
  s.timeout_rounds = timeout_rounds;
  if (dyads.empty() || dyads.front().empty()) return s;

  s.efficacy = efficacy(dyads);

  int rounds = static_cast<int>(dyads.front().size());
  int window = late_window(rounds);
  double reward_sum = 0.0;
  for (const auto& dyad : dyads)
    for (int r = rounds - window; r < rounds; ++r)
      reward_sum += dyad[static_cast<size_t>(r)].reward_a;
  s.late_mean_reward =
      reward_sum / (static_cast<double>(window) *
                    static_cast<double>(dyads.size()));

  s.surprisal_series = mean_surprisal(dyads, SurprisalParams{estimator});
  double surprisal_sum = 0.0;
  for (int r = rounds - window; r < rounds; ++r)
    surprisal_sum += s.surprisal_series[static_cast<size_t>(r)];
  s.late_mean_surprisal = surprisal_sum / static_cast<double>(window);

  s.has_predictions = dyads.front().front().pred_correct_a.has_value();
  if (s.has_predictions) {
    PredictionAccuracy acc = prediction_accuracy(dyads);
    s.accumulated_prediction_error = acc.accumulated_error;
    s.accuracy_series = std::move(acc.per_round_mean);
  }
  return s;
}

nlohmann::json build_summary(const RunConfig& config,
                             const std::vector<CellSummary>& cells) {
  nlohmann::json rows = nlohmann::json::array();
  for (const CellSummary& cell : cells) {
    nlohmann::json row = {{"model", cell.key.model},
                          {"opponent", cell.key.opponent},
                          {"game", cell.key.game},
                          {"efficacy", cell.efficacy},
                          {"late_mean_reward", cell.late_mean_reward},
                          {"late_mean_surprisal", cell.late_mean_surprisal},
                          {"timeout_rounds", cell.timeout_rounds}};
    if (cell.has_predictions)
      row["accumulated_prediction_error"] = cell.accumulated_prediction_error;
    rows.push_back(std::move(row));
  }
  return {{"version", kDyadlabVersion},
          {"config", serialize_config(config)},
          {"late_window", late_window(config.grid.rounds)},
          {"cells", rows}};
}

std::vector<std::string> plot_file_names(
    const RunConfig& config, const std::vector<CellSummary>& cells) {
  std::vector<std::string> names;
  for (const Phenotype& opp : config.grid.opponents) {
    std::string opponent = to_string(opp);
    names.push_back("plots/efficacy__" + opponent + ".svg");
    names.push_back("plots/surprisal__" + opponent + ".svg");
    bool predictive = false;
    for (const CellSummary& cell : cells)
      if (cell.key.opponent == opponent && cell.has_predictions)
        predictive = true;
    if (predictive) names.push_back("plots/prediction__" + opponent + ".svg");
  }
  return names;
}

std::string render_efficacy_svg(const RunConfig& config,
                                const std::string& opponent,
                                const std::vector<CellSummary>& cells) {
  const double width = 760, height = 380;
  const double left = 56, right = 16, top = 64, bottom = 40;
  const double x0 = left, x1 = width - right;
  const double y0 = top, y1 = height - bottom;

  double vmax = 1.0;
  for (const auto& model : config.grid.models)
    for (const auto& game : config.grid.games)
      if (const CellSummary* cell = find_cell(cells, to_string(model),
                                              opponent, game.name()))
        vmax = std::max(vmax, cell->efficacy);
  vmax = std::ceil(vmax * 2.0) / 2.0;

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    num(width) + "\" height=\"" + num(height) +
                    "\" viewBox=\"0 0 " + num(width) + " " + num(height) +
                    "\">\n<rect width=\"100%\" height=\"100%\" "
                    "fill=\"#ffffff\"/>\n";
  append_text(svg, left, 22, "start", 15,
              "Efficacy (mean model reward) vs " + opponent);
  append_legend(svg, config, left, 44);

  for (int tick = 0; tick <= 4; ++tick) {
    double v = vmax * static_cast<double>(tick) / 4.0;
    double y = y1 - (y1 - y0) * static_cast<double>(tick) / 4.0;
    svg += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y) + "\" x2=\"" +
           num(x1) + "\" y2=\"" + num(y) + "\" stroke=\"#ddd\"/>\n";
    append_text(svg, x0 - 6, y + 4, "end", 10, num(v));
  }

  size_t games = config.grid.games.size();
  size_t models = config.grid.models.size();
  double group_w = (x1 - x0) / static_cast<double>(games);
  double bar_w = group_w * 0.8 / static_cast<double>(std::max<size_t>(models, 1));
  for (size_t g = 0; g < games; ++g) {
    double gx = x0 + group_w * static_cast<double>(g);
    append_text(svg, gx + group_w / 2.0, y1 + 16, "middle", 11,
                config.grid.games[g].name());
    for (size_t m = 0; m < models; ++m) {
      const CellSummary* cell =
          find_cell(cells, to_string(config.grid.models[m]), opponent,
                    config.grid.games[g].name());
      if (!cell) continue;
      double v = std::clamp(cell->efficacy / vmax, 0.0, 1.0);
      double bx = gx + group_w * 0.1 + bar_w * static_cast<double>(m);
      double by = y1 - (y1 - y0) * v;
      svg += "<rect x=\"" + num(bx) + "\" y=\"" + num(by) + "\" width=\"" +
             num(bar_w * 0.9) + "\" height=\"" + num(y1 - by) + "\" fill=\"" +
             std::string(model_color(m)) + "\"/>\n";
    }
  }
  svg += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y1) + "\" x2=\"" +
         num(x1) + "\" y2=\"" + num(y1) + "\" stroke=\"#333\"/>\n</svg>\n";
  return svg;
}

std::string render_surprisal_svg(const RunConfig& config,
                                 const std::string& opponent,
                                 const std::vector<CellSummary>& cells) {
  return render_line_chart(
      config, opponent, "Outcome surprisal vs " + opponent + " (bits)", false,
      [](const CellSummary& cell) { return &cell.surprisal_series; }, cells);
}

std::string render_accuracy_svg(const RunConfig& config,
                                const std::string& opponent,
                                const std::vector<CellSummary>& cells) {
  return render_line_chart(
      config, opponent, "Prediction accuracy vs " + opponent, true,
      [](const CellSummary& cell) {
        return cell.has_predictions ? &cell.accuracy_series : nullptr;
      },
      cells);
}

std::vector<std::string> write_reports(const std::string& run_dir,
                                       const RunConfig& config,
                                       const std::vector<CellSummary>& cells,
                                       bool want_plots) {
  std::vector<std::string> written;
  fs::path dir(run_dir);

  auto write_file = [&](const std::string& rel, const std::string& content) {
    std::ofstream out(dir / rel, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + (dir / rel).string());
    out << content;
    out.flush();
    if (!out)
      throw std::runtime_error("write failed: " + (dir / rel).string());
    written.push_back(rel);
  };

  write_file("summary.json", build_summary(config, cells).dump(2) + "\n");

  if (want_plots) {
    fs::create_directories(dir / "plots");
    for (const Phenotype& opp : config.grid.opponents) {
      std::string opponent = to_string(opp);
      write_file("plots/efficacy__" + opponent + ".svg",
                 render_efficacy_svg(config, opponent, cells));
      std::string surprisal = render_surprisal_svg(config, opponent, cells);
      if (!surprisal.empty())
        write_file("plots/surprisal__" + opponent + ".svg", surprisal);
      std::string accuracy = render_accuracy_svg(config, opponent, cells);
      if (!accuracy.empty())
        write_file("plots/prediction__" + opponent + ".svg", accuracy);
    }
  }
  return written;
}

int report_command(const std::string& run_dir, bool force_plots,
                   std::ostream& diag) {
  ConfigLoad loaded = load_config(run_dir + "/manifest.json");
  if (!loaded.errors.empty()) {
    for (const auto& msg : loaded.errors)
      diag << "manifest: " << msg << '\n';
    return 1;
  }
  const RunConfig& config = loaded.config;

  std::vector<CellSummary> summaries;
  std::vector<std::string> problems;
  for (const auto& model : config.grid.models)
    for (const auto& opponent : config.grid.opponents)
      for (const auto& game : config.grid.games) {
        CellKey key{to_string(model), to_string(opponent), game.name()};
        std::string path = run_dir + "/cells/" + cell_csv_name(key);
        CellData data;
        try {
          data = read_cell_csv(path, key);
        } catch (const std::exception& ex) {
          problems.emplace_back(ex.what());
          continue;
        }
        if (data.continuous != (config.mode == RunMode::Continuous)) {
          problems.push_back(path + ": mode does not match the manifest");
          continue;
        }
        if (static_cast<int>(data.dyads.size()) != config.grid.dyads_per_cell) {
          problems.push_back(path + ": expected " +
                             std::to_string(config.grid.dyads_per_cell) +
                             " dyads, got " +
                             std::to_string(data.dyads.size()));
          continue;
        }
        bool rounds_ok = true;
        for (const auto& dyad : data.dyads)
          if (static_cast<int>(dyad.size()) != config.grid.rounds) {
            problems.push_back(path + ": expected " +
                               std::to_string(config.grid.rounds) +
                               " rounds per dyad, got " +
                               std::to_string(dyad.size()));
            rounds_ok = false;
            break;
          }
        if (!rounds_ok) continue;
        int timeouts = 0;
        for (const auto& dyad : data.embodied)
          for (const auto& rec : dyad) timeouts += rec.timeout ? 1 : 0;
        summaries.push_back(
            summarize_cell(key, data.dyads, timeouts, config.estimator));
      }

  if (!problems.empty()) {
    for (const auto& msg : problems) diag << msg << '\n';
    return 1;
  }

  try {
    write_reports(run_dir, config, summaries,
                  config.emit_plots || force_plots);
  } catch (const std::exception& ex) {
    diag << ex.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace dyadlab
