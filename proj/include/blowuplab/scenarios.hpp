#pragma once

#include <optional>
#include <string>
#include <vector>

#include "blowuplab/energy.hpp"
#include "blowuplab/integrator.hpp"
#include "blowuplab/rate.hpp"
#include "blowuplab/regularity.hpp"

namespace blowuplab {

/// Named initial-datum families. All satisfy the Dirichlet boundary values.
///  gaussian_bump:      A exp(-(x-center)^2 / (2 width^2)), walls zeroed
///  radial_decreasing:  A cos(pi r / (2R))^2, monotone down in r
///  annulus_ring:       A exp(-(r-center)^2 / (2 width^2)) on the annulus
///  eigenfunction:      A times the principal Dirichlet mode
struct InitialProfile {
  std::string name = "gaussian_bump";
  double amplitude = 1.0;
  double width = 0.2;
  double center = 0.5;
};

std::vector<double> make_initial(const Grid& grid,
                                 const InitialProfile& profile);

struct ScenarioExpectation {
  std::optional<CollapseClass> collapse;
  std::optional<RateType> rate;
  std::optional<double> set_dimension; // box-count slope
};

struct ScenarioSpec {
  std::string name;
  DomainSpec domain;
  double p = 3.0;
  int node_count = 401;
  InitialProfile initial;
  SolverConfig solver;
  RegularityConfig regularity;
  bool scan_set = false;
  ScenarioExpectation expect;
};

/// Catalogue entry by name, with tier in {coarse, reference, fine}.
ScenarioSpec named_scenario(const std::string& name,
                            const std::string& tier = "reference");
std::vector<std::string> scenario_names();

/// Tier presets for node count and solver tolerances.
void apply_tier(ScenarioSpec& spec, const std::string& tier);

struct ScenarioReport {
  ScenarioSpec spec;
  Trajectory traj;
  OmegaEstimate omega;
  DissipationAudit audit;
  CollapseVerdict collapse;
  RateDiagnostics rate;
  std::optional<SingularSetMap> set;
  std::optional<DimensionReport> dimension;
  bool matches_expectation = true;
  std::vector<std::string> mismatches;
};

ScenarioReport run_scenario(const ScenarioSpec& spec);

enum class GlobalVerdict { global, blowup, unresolved };

std::string to_string(GlobalVerdict verdict);

/// Bisection predicate: decayed (or settled far below the initial sup with
/// nonnegative energy at the horizon) vs numerically blown up.
GlobalVerdict classify_global_vs_blowup(const Trajectory& traj,
                                        double decay_factor = 1e-2);

struct BisectionIterate {
  double lambda = 0;
  GlobalVerdict verdict = GlobalVerdict::unresolved;
};

struct BisectionReport {
  double lambda_lo = 0;
  double lambda_hi = 0;
  double lambda_star = 0;
  bool converged = false;
  bool budget_exhausted = false;
  std::vector<BisectionIterate> iterates;
  Trajectory near_borderline; // blowup run at lambda_hi
  CollapseVerdict collapse;   // collapse class of the lambda_hi run
};

/// Bisects the amplitude threshold between global decay and blowup for the
/// scenario's initial profile scaled by lambda. Expands a one-sided bracket
/// geometrically before bisecting.
BisectionReport bisect_borderline(const ScenarioSpec& base, double lambda_lo,
                                  double lambda_hi, double tol = 1e-3,
                                  int budget = 60);

} // namespace blowuplab
