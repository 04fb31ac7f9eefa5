#pragma once

// Flat key-value run configuration.
//
// Grammar, one statement per line:
//   line      := blank | comment | statement [comment]
//   statement := section "." key ws* "=" ws* value
//   comment   := "#" any-text
// section and key are [a-z0-9_]+; value runs to the comment or end of line
// with surrounding whitespace stripped. Each key may appear once; unknown
// keys are errors.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bpk/dynamics.hpp"

namespace bpk {

struct Bump {
  double amplitude = 1.0;
  double center = 3.0;
  double width = 0.5;
};

struct RunConfig {
  struct Grid {
    std::size_t n_points = 0;  ///< number of intervals N
    double p_max = 0.0;
  } grid;

  struct Physics {
    double m = 1.0;
    double g = 1.0;
    double n0 = 0.0;
    std::optional<double> kBT;
  } physics;

  struct Initial {
    std::string preset = "bose_einstein";
    double alpha = 1.0;
    double amplitude = 1.0;
    double center = 3.0;
    double width = 0.5;
    double power = 4.0;
    std::vector<Bump> bumps;
    std::filesystem::path path;
  } initial;

  struct Integration {
    double t_end = 0.0;
    std::optional<double> dt_max;
    std::optional<double> fixed_dt;
    double safety = 0.5;
    double nc_floor = 1e-3;
    PositivityPolicy positivity = PositivityPolicy::reject_and_halve;
    std::size_t max_steps = 10000000;
    unsigned workers = 1;
  } integration;

  struct Outputs {
    std::size_t snapshot_stride = 10;
    std::filesystem::path timeseries;
    std::filesystem::path report;
    std::filesystem::path snapshot;
    double log_t_min = 0.0;
    double log_t_max = 0.0;
    std::size_t log_count = 0;
  } outputs;

  struct Diagnostics {
    std::vector<std::string> checks;
    int moment_k = 8;
    double Ck = 1.0;
    double ml_a = 1.0;
    std::optional<double> ml_alpha0;
    double C8 = 1.0;
    std::optional<double> delta;
    double budget_headroom = 0.5;
    double budget_C8t = 1.0;
    double budget_c8t = 1.0;
    std::optional<double> creation_t_min;
    std::optional<double> creation_t_max;
    double creation_slack = 0.5;
    ThresholdConvention threshold_convention = ThresholdConvention::total_mass;
    double conservation_tol = 1e-12;
    double closed_form_tol = 1e-8;
    int beta_k_max = 60;
  } diagnostics;

  /// Statements in document order, for echoing into the report.
  std::vector<std::pair<std::string, std::string>> entries;

  double delta() const { return diagnostics.delta.value_or(integration.nc_floor); }
  double dt_max() const { return integration.dt_max.value_or(integration.t_end); }
};

/// Names accepted by diagnostics.checks.
const std::vector<std::string>& known_checks();
const std::vector<std::string>& default_checks();

/// Relative paths in the document are resolved against base_dir.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& file);

}  // namespace bpk
