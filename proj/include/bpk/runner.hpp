#pragma once

#include <iosfwd>
#include <string>

#include "bpk/collision.hpp"
#include "bpk/config.hpp"
#include "bpk/diagnostics.hpp"
#include "bpk/dynamics.hpp"
#include "json.hpp"

namespace bpk {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitChecksFailed = 2;
inline constexpr int kExitStabilityLoss = 3;

GridPtr build_grid(const RunConfig& config);
RadialFunction build_initial(const RunConfig& config, GridPtr grid);

struct RunOutcome {
  int exit_code = kExitOk;
  std::string status;  ///< "completed" or "stability_loss"
  Trajectory trajectory;
  DiagnosticsReport report;
  ThresholdResult threshold;
  std::string timeseries_csv;
  nlohmann::ordered_json report_json;
};

/// Runs the configured simulation and its checks. Writes the configured
/// output files and logs progress lines to `log`.
RunOutcome run(const RunConfig& config, std::ostream& log);

/// The checks enabled in `config`, evaluated on a finished trajectory.
DiagnosticsReport evaluate_checks(const RunConfig& config, const Trajectory& traj,
                                  const CollisionTables& tables, const ThresholdResult& thr);

struct EquilibriumResidual {
  double max_rate = 0.0;        ///< max_i |q_i|
  double max_pair = 0.0;        ///< largest single pair contribution
  double max_strong = 0.0;      ///< max_i |S_i| from the strong form
  double strong_scale = 0.0;    ///< max_i over the twelve terms of |term|
  double ratio() const { return max_pair > 0.0 ? max_rate / max_pair : 0.0; }
  double strong_ratio() const { return strong_scale > 0.0 ? max_strong / strong_scale : 0.0; }
};

EquilibriumResidual equilibrium_residual(const RadialFunction& f, const CollisionTables& tables);

}  // namespace bpk
