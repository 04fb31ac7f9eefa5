#include "bpk/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "bpk/errors.hpp"

namespace bpk {

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names = {
      "conservation", "closed_form",   "h_theorem",    "linf_bound",
      "m2_interpolation", "moment_propagation", "moment_creation", "ml_propagation",
      "budget",       "threshold_stability", "beta_sum"};
  return names;
}

const std::vector<std::string>& default_checks() {
  static const std::vector<std::string> names = {"conservation", "closed_form", "h_theorem",
                                                 "linf_bound", "m2_interpolation",
                                                 "threshold_stability"};
  return names;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool valid_name(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

std::vector<std::string> split_list(const std::string& v, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end || !std::isfinite(x))
    throw ConfigError(key + " must be a number, got '" + v + "'");
  return x;
}

long long to_int(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end) throw ConfigError(key + " must be an integer, got '" + v + "'");
  return x;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

double positive(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  require(x > 0.0, key + " must be > 0");
  return x;
}

double nonnegative(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  require(x >= 0.0, key + " must be >= 0");
  return x;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"grid.n_points",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const long long n = to_int(k, v);
         require(n >= 2, k + " must be >= 2");
         c.grid.n_points = static_cast<std::size_t>(n);
       }},
      {"grid.p_max", [](RunConfig& c, auto& k, auto& v) { c.grid.p_max = positive(k, v); }},
      {"physics.m", [](RunConfig& c, auto& k, auto& v) { c.physics.m = positive(k, v); }},
      {"physics.g", [](RunConfig& c, auto& k, auto& v) { c.physics.g = positive(k, v); }},
      {"physics.n0", [](RunConfig& c, auto& k, auto& v) { c.physics.n0 = positive(k, v); }},
      {"physics.kbt", [](RunConfig& c, auto& k, auto& v) { c.physics.kBT = positive(k, v); }},
      {"initial.preset",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         static const std::vector<std::string> ok = {"bose_einstein", "gaussian_bump", "bumps",
                                                     "power_tail", "zero", "file"};
         require(std::find(ok.begin(), ok.end(), v) != ok.end(),
                 k + " must be one of bose_einstein, gaussian_bump, bumps, power_tail, zero, file");
         c.initial.preset = v;
       }},
      {"initial.alpha", [](RunConfig& c, auto& k, auto& v) { c.initial.alpha = positive(k, v); }},
      {"initial.amplitude",
       [](RunConfig& c, auto& k, auto& v) { c.initial.amplitude = nonnegative(k, v); }},
      {"initial.center", [](RunConfig& c, auto& k, auto& v) { c.initial.center = nonnegative(k, v); }},
      {"initial.width", [](RunConfig& c, auto& k, auto& v) { c.initial.width = positive(k, v); }},
      {"initial.power", [](RunConfig& c, auto& k, auto& v) { c.initial.power = positive(k, v); }},
      {"initial.bumps",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.initial.bumps.clear();
         for (const auto& item : split_list(v, ',')) {
           const auto parts = split_list(item, ':');
           require(parts.size() == 3, k + " entries must read amplitude:center:width");
           Bump b{nonnegative(k, parts[0]), nonnegative(k, parts[1]), positive(k, parts[2])};
           c.initial.bumps.push_back(b);
         }
         require(!c.initial.bumps.empty(), k + " must list at least one bump");
       }},
      {"initial.path", [](RunConfig& c, auto&, auto& v) { c.initial.path = v; }},
      {"integration.t_end",
       [](RunConfig& c, auto& k, auto& v) { c.integration.t_end = positive(k, v); }},
      {"integration.dt_max",
       [](RunConfig& c, auto& k, auto& v) { c.integration.dt_max = positive(k, v); }},
      {"integration.fixed_dt",
       [](RunConfig& c, auto& k, auto& v) { c.integration.fixed_dt = positive(k, v); }},
      {"integration.safety",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const double s = to_double(k, v);
         require(s > 0.0 && s <= 1.0, k + " must lie in (0, 1]");
         c.integration.safety = s;
       }},
      {"integration.nc_floor",
       [](RunConfig& c, auto& k, auto& v) { c.integration.nc_floor = positive(k, v); }},
      {"integration.positivity_policy",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "reject_and_halve")
           c.integration.positivity = PositivityPolicy::reject_and_halve;
         else if (v == "clamp_with_ledger")
           c.integration.positivity = PositivityPolicy::clamp_with_ledger;
         else
           throw ConfigError(k + " must be reject_and_halve or clamp_with_ledger");
       }},
      {"integration.max_steps",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const long long n = to_int(k, v);
         require(n >= 1, k + " must be >= 1");
         c.integration.max_steps = static_cast<std::size_t>(n);
       }},
      {"integration.workers",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const long long n = to_int(k, v);
         require(n >= 1 && n <= 1024, k + " must lie in [1, 1024]");
         c.integration.workers = static_cast<unsigned>(n);
       }},
      {"outputs.snapshot_stride",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const long long n = to_int(k, v);
         require(n >= 0, k + " must be >= 0");
         c.outputs.snapshot_stride = static_cast<std::size_t>(n);
       }},
      {"outputs.timeseries", [](RunConfig& c, auto&, auto& v) { c.outputs.timeseries = v; }},
      {"outputs.report", [](RunConfig& c, auto&, auto& v) { c.outputs.report = v; }},
      {"outputs.snapshot", [](RunConfig& c, auto&, auto& v) { c.outputs.snapshot = v; }},
      {"outputs.log_t_min",
       [](RunConfig& c, auto& k, auto& v) { c.outputs.log_t_min = positive(k, v); }},
      {"outputs.log_t_max",
       [](RunConfig& c, auto& k, auto& v) { c.outputs.log_t_max = positive(k, v); }},
      {"outputs.log_count",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const long long n = to_int(k, v);
         require(n >= 2, k + " must be >= 2");
         c.outputs.log_count = static_cast<std::size_t>(n);
       }},
      {"diagnostics.checks",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.diagnostics.checks.clear();
         for (const auto& name : split_list(v, ',')) {
           const auto& ok = known_checks();
           require(std::find(ok.begin(), ok.end(), name) != ok.end(),
                   k + ": unknown check '" + name + "'");
           c.diagnostics.checks.push_back(name);
         }
       }},
      {"diagnostics.moment_k",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const long long n = to_int(k, v);
         require(n > 3 && n <= 60, k + " must lie in (3, 60]");
         c.diagnostics.moment_k = static_cast<int>(n);
       }},
      {"diagnostics.ck", [](RunConfig& c, auto& k, auto& v) { c.diagnostics.Ck = nonnegative(k, v); }},
      {"diagnostics.ml_a",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const double a = to_double(k, v);
         require(a >= 1.0, k + " must be >= 1");
         c.diagnostics.ml_a = a;
       }},
      {"diagnostics.ml_alpha0",
       [](RunConfig& c, auto& k, auto& v) { c.diagnostics.ml_alpha0 = positive(k, v); }},
      {"diagnostics.c8", [](RunConfig& c, auto& k, auto& v) { c.diagnostics.C8 = positive(k, v); }},
      {"diagnostics.delta", [](RunConfig& c, auto& k, auto& v) { c.diagnostics.delta = positive(k, v); }},
      {"diagnostics.budget_headroom",
       [](RunConfig& c, auto& k, auto& v) { c.diagnostics.budget_headroom = nonnegative(k, v); }},
      {"diagnostics.budget_c8t_upper",
       [](RunConfig& c, auto& k, auto& v) { c.diagnostics.budget_C8t = positive(k, v); }},
      {"diagnostics.budget_c8t_lower",
       [](RunConfig& c, auto& k, auto& v) { c.diagnostics.budget_c8t = positive(k, v); }},
      {"diagnostics.creation_t_min",
       [](RunConfig& c, auto& k, auto& v) { c.diagnostics.creation_t_min = positive(k, v); }},
      {"diagnostics.creation_t_max",
       [](RunConfig& c, auto& k, auto& v) { c.diagnostics.creation_t_max = positive(k, v); }},
      {"diagnostics.creation_slack",
       [](RunConfig& c, auto& k, auto& v) { c.diagnostics.creation_slack = nonnegative(k, v); }},
      {"diagnostics.threshold_convention",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "total_mass")
           c.diagnostics.threshold_convention = ThresholdConvention::total_mass;
         else if (v == "line_moment")
           c.diagnostics.threshold_convention = ThresholdConvention::line_moment;
         else
           throw ConfigError(k + " must be total_mass or line_moment");
       }},
      {"diagnostics.conservation_tol",
       [](RunConfig& c, auto& k, auto& v) { c.diagnostics.conservation_tol = positive(k, v); }},
      {"diagnostics.closed_form_tol",
       [](RunConfig& c, auto& k, auto& v) { c.diagnostics.closed_form_tol = positive(k, v); }},
      {"diagnostics.beta_k_max",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const long long n = to_int(k, v);
         require(n >= 3 && n <= 1000, k + " must lie in [3, 1000]");
         c.diagnostics.beta_k_max = static_cast<int>(n);
       }},
  };
  return table;
}

void validate(RunConfig& c, const std::filesystem::path& base_dir) {
  const auto has = [&](const char* key) {
    return std::any_of(c.entries.begin(), c.entries.end(),
                       [&](const auto& e) { return e.first == key; });
  };
  for (const char* key : {"grid.n_points", "grid.p_max", "physics.n0", "integration.t_end"})
    require(has(key), std::string("missing required key ") + key);
  if (c.initial.preset == "file") {
    require(!c.initial.path.empty(), "initial.path is required for the file preset");
    if (c.initial.path.is_relative() && !base_dir.empty()) c.initial.path = base_dir / c.initial.path;
  }
  if (c.initial.preset == "bumps")
    require(!c.initial.bumps.empty(), "initial.bumps is required for the bumps preset");
  if (c.outputs.log_count > 0)
    require(c.outputs.log_t_min > 0.0 && c.outputs.log_t_max > c.outputs.log_t_min,
            "outputs.log_t_min and outputs.log_t_max must satisfy 0 < min < max");
  require(c.integration.nc_floor < c.physics.n0, "integration.nc_floor must be < physics.n0");
  if (!has("diagnostics.checks")) c.diagnostics.checks = default_checks();
  const bool creation = std::find(c.diagnostics.checks.begin(), c.diagnostics.checks.end(),
                                  "moment_creation") != c.diagnostics.checks.end();
  if (creation) {
    require(c.diagnostics.creation_t_min && c.diagnostics.creation_t_max,
            "moment_creation needs diagnostics.creation_t_min and diagnostics.creation_t_max");
    require(*c.diagnostics.creation_t_max >= 10.0 * *c.diagnostics.creation_t_min,
            "the moment_creation window must span at least one decade");
  }
}

}  // namespace

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  RunConfig c;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'section.key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    const auto dot = key.find('.');
    if (dot == std::string::npos || key.find('.', dot + 1) != std::string::npos ||
        !valid_name(std::string_view(key).substr(0, dot)) ||
        !valid_name(std::string_view(key).substr(dot + 1)))
      throw ConfigError(where + "malformed key '" + key + "'");
    if (value.empty()) throw ConfigError(where + "missing value for " + key);
    const auto& table = setters();
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError(where + "unknown key '" + key + "'");
    for (const auto& e : c.entries)
      if (e.first == key) throw ConfigError(where + "duplicate key '" + key + "'");
    try {
      it->second(c, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
    c.entries.emplace_back(key, value);
  }
  validate(c, base_dir);
  return c;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), file.parent_path());
}

}  // namespace bpk
