#pragma once

// CSV and JSON emission. Numbers are written with 17 significant digits so a
// reload reproduces every double exactly.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bpk/collision.hpp"
#include "bpk/diagnostics.hpp"
#include "bpk/dynamics.hpp"
#include "bpk/radial_grid.hpp"
#include "json.hpp"

namespace bpk {

std::string format_double(double x);
double parse_double(const std::string& s);

struct TimeSeriesRow {
  double t = 0.0;
  double n_c = 0.0;
  double mass_f = 0.0;
  double total_mass = 0.0;
  double m[7] = {};  ///< m_3 .. m_9
  double weighted_sup = 0.0;
  double entropy = 0.0;
  double dissipation = 0.0;
  double tail_rate = 0.0;
  double dt_used = 0.0;
  double mass_drift = 0.0;
  double energy_drift = 0.0;
};

const std::vector<std::string>& timeseries_columns();

/// Dissipation floors zero samples at 1e-300; tail_rate is 0 at t = 0.
TimeSeriesRow make_row(const SimState& s, double dt_used, const CollisionTables& tables);

void write_timeseries(std::ostream& out, const std::vector<TimeSeriesRow>& rows);

/// Two-column (r, f) CSV with header.
void write_snapshot(std::ostream& out, const RadialFunction& f);

/// Reads a snapshot onto `grid`; node positions must match to 1e-12 relative.
RadialFunction read_snapshot(std::istream& in, GridPtr grid);
RadialFunction read_snapshot_file(const std::filesystem::path& path, GridPtr grid);

nlohmann::ordered_json to_json(const CheckRecord& r);
nlohmann::ordered_json to_json(const DiagnosticsReport& r);

/// Writes text to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace bpk
