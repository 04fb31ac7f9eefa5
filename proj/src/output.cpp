#include "bpk/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "bpk/errors.hpp"

namespace bpk {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  if (ec != std::errc()) throw Error("number formatting failed");
  return std::string(buf, p);
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double x = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || p != s.data() + s.size())
    throw DomainError("not a number: '" + s + "'");
  return x;
}

const std::vector<std::string>& timeseries_columns() {
  static const std::vector<std::string> cols = {
      "t",   "n_c", "mass_f", "total_mass", "m_3", "m_4", "m_5", "m_6",
      "m_7", "m_8", "m_9",    "weighted_sup", "entropy", "dissipation", "tail_rate",
      "dt_used", "mass_drift", "energy_drift"};
  return cols;
}

TimeSeriesRow make_row(const SimState& s, double dt_used, const CollisionTables& tables) {
  TimeSeriesRow row;
  row.t = s.t;
  row.n_c = s.n_c;
  row.mass_f = s.mass_f();
  row.total_mass = row.mass_f + s.n_c;
  for (int k = 3; k <= 9; ++k) row.m[k - 3] = line_moment(s.f, k);
  row.weighted_sup = weighted_sup(s.f);
  row.entropy = entropy(s.f);
  row.dissipation = entropy_dissipation(s.f, tables, LogFloor::floor);
  row.tail_rate = s.t > 0.0 ? tail_rate_estimate(s.f, s.t) : 0.0;
  row.dt_used = dt_used;
  row.mass_drift = s.total_mass0 > 0.0 ? (row.total_mass - s.total_mass0) / s.total_mass0 : 0.0;
  row.energy_drift = s.energy0 > 0.0 ? (row.m[0] - s.energy0) / s.energy0 : 0.0;
  return row;
}

void write_timeseries(std::ostream& out, const std::vector<TimeSeriesRow>& rows) {
  const auto& cols = timeseries_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << "\r\n";
  for (const auto& r : rows) {
    out << format_double(r.t) << ',' << format_double(r.n_c) << ',' << format_double(r.mass_f)
        << ',' << format_double(r.total_mass);
    for (double v : r.m) out << ',' << format_double(v);
    out << ',' << format_double(r.weighted_sup) << ',' << format_double(r.entropy) << ','
        << format_double(r.dissipation) << ',' << format_double(r.tail_rate) << ','
        << format_double(r.dt_used) << ',' << format_double(r.mass_drift) << ','
        << format_double(r.energy_drift) << "\r\n";
  }
}

void write_snapshot(std::ostream& out, const RadialFunction& f) {
  out << "r,f\r\n";
  for (std::size_t i = 0; i < f.size(); ++i)
    out << format_double(f.grid().node(i)) << ',' << format_double(f[i]) << "\r\n";
}

RadialFunction read_snapshot(std::istream& in, GridPtr grid) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("snapshot is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "r,f") throw DomainError("snapshot header must be 'r,f'");
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw DomainError("snapshot line " + std::to_string(lineno) + " needs two columns");
    const double r = parse_double(line.substr(0, comma));
    const double f = parse_double(line.substr(comma + 1));
    const std::size_t i = values.size();
    if (i >= grid->size())
      throw GridMismatch("snapshot has more rows than the grid has nodes");
    const double node = grid->node(i);
    if (std::abs(r - node) > 1e-12 * std::max(1.0, std::abs(node)))
      throw GridMismatch("snapshot line " + std::to_string(lineno) + ": r = " + format_double(r) +
                         " does not match grid node " + format_double(node));
    values.push_back(f);
  }
  return RadialFunction(std::move(grid), std::move(values));
}

RadialFunction read_snapshot_file(const std::filesystem::path& path, GridPtr grid) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open snapshot " + path.string());
  return read_snapshot(in, std::move(grid));
}

namespace {

nlohmann::ordered_json number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

}  // namespace

nlohmann::ordered_json to_json(const CheckRecord& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["passed"] = r.passed;
  nlohmann::ordered_json measured = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.measured) measured[k] = number(v);
  nlohmann::ordered_json bounds = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.bounds) bounds[k] = number(v);
  j["measured"] = measured;
  j["bounds"] = bounds;
  j["tolerance"] = number(r.tolerance);
  j["reference"] = r.reference;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

nlohmann::ordered_json to_json(const DiagnosticsReport& r) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& rec : r.records) arr.push_back(to_json(rec));
  return arr;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace bpk
