#pragma once

#include <stdexcept>
#include <string>

#include "blowuplab/energy.hpp"
#include "blowuplab/integrator.hpp"
#include "blowuplab/rate.hpp"
#include "blowuplab/regularity.hpp"
#include "blowuplab/scenarios.hpp"
#include "blowuplab/selfsim.hpp"

namespace blowuplab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RangeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Full run description parsed from the JSON config file. Unknown keys are
/// rejected; every field has a printable default.
struct RunConfig {
  std::string scenario; // when set, overrides the raw fields below
  std::string tier = "reference";
  long seed = 0;
  DomainSpec domain{DomainKind::interval, 1, 0.0, 1.0};
  double p = 3.0;
  int node_count = 401;
  bool reaction_on = true;
  bool diffusion_on = true;
  InitialProfile initial;
  SolverConfig solver;
  RegularityConfig regularity;

  bool synthetic_flat = false; // substitute the exact flat trajectory
  Time synthetic_omega = 1.0L;
  double synthetic_delta_start = 0.5;
  double synthetic_delta_end = 1e-12;
  double synthetic_ds = 0.05;

  double rescale_a = 0.0;
  double rescale_s0 = 1.0;
  double rescale_s1 = 5.0;
  double rescale_ds = 0.25;

  double bisect_lo = 0.5;
  double bisect_hi = 8.0;
  double bisect_tol = 1e-3;
  int bisect_budget = 60;

  ScenarioSpec to_scenario() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);
std::string default_config_text();

// CSV artifacts (fixed "%.17g" / "%.21Lg" formatting for reproducibility)
void write_ledger_csv(const std::string& path, const Trajectory& traj);
void write_rate_csv(const std::string& path, const RateCurve& curve);
void write_frame_csv(const std::string& path, const RescaledFrame& frame);
void write_series_csv(const std::string& path, const LocalEnergySeries& series);
void write_density_csv(const std::string& path, const SingularSetMap& map);

// JSON artifacts
std::string verdict_json(const Trajectory& traj, const OmegaEstimate& omega,
                         const DissipationAudit& audit,
                         const CollapseVerdict& collapse,
                         const RateDiagnostics& rate);
std::string dimension_json(const DimensionReport& rep);
std::string bisection_json(const BisectionReport& rep);
std::string scenario_summary_json(const ScenarioReport& rep);
std::string error_json(const std::string& kind, const std::string& message);

/// Versioned JSON checkpoint (schema_version 1). Times are stored as
/// two-double pairs to round-trip the extended precision.
void save_checkpoint(const std::string& path, const Trajectory& traj);
Trajectory load_checkpoint(const std::string& path);

void write_text_file(const std::string& path, const std::string& text);

} // namespace blowuplab
