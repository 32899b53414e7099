#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dyadlab/config.hpp"

namespace dyadlab {

/// Shortest decimal form that parses back to the same double ("0.15", "2").
std::string format_number(double v);

/// ISO-8601 UTC wall-clock time, e.g. "2024-05-01T12:30:00Z".
std::string now_utc_iso8601();

/// "C" / "D" and back.
std::string action_code(Action a);
Action action_from_code(const std::string& s);

/// File name of one cell's records inside <run_dir>/cells/.
std::string cell_csv_name(const CellKey& key);

/// Fixed header orders. The continuous header extends the discrete one.
std::string discrete_csv_header();
std::string continuous_csv_header();

void write_cell_csv(std::ostream& out, const CellResult& cell);
void write_cell_csv(std::ostream& out, const ContinuousCellResult& cell);

/// One cell read back from disk. In continuous mode `embodied` carries the
/// extra per-round fields and `dyads` the projected records; in discrete
/// mode `embodied` is empty.
struct CellData {
  CellKey key;
  bool continuous = false;
  std::vector<std::vector<RoundRecord>> dyads;
  std::vector<std::vector<ContinuousRoundRecord>> embodied;
};

/// Parses a cell CSV. Throws std::runtime_error naming the problem on any
/// malformed header, row, or field.
CellData read_cell_csv(const std::string& path, const CellKey& key);

/// Manifest: the config echo, the per-cell seed table, and provenance. The
/// embedded config is accepted by load_config, so the manifest of a run is
/// enough to reproduce it.
nlohmann::json build_manifest(const RunConfig& config,
                              const std::string& timestamp);

/// Executes the configured run: writes manifest.json, one CSV per cell
/// under cells/, optional trajectory CSVs, summary.json, and plots when
/// requested. Returns a process exit status; on failure a diagnostic goes
/// to `diag` and every file this call created is removed.
int run_command(const RunConfig& config, int jobs, std::ostream& diag);

}  // namespace dyadlab
