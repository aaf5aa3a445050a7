#pragma once

#include <span>
#include <string>
#include <vector>

#include "blowuplab/integrator.hpp"
#include "blowuplab/mesh.hpp"

namespace blowuplab {

/// E(f) = 1/2 int |grad f|^2 - 1/(p+1) int |f|^{p+1}.
double energy(const Grid& grid, std::span<const double> f, double p);

struct EnergyRecord {
  Time t = 0;
  double E = 0;
  double D = 0;      // cumulative dissipation
  double defect = 0; // |E(t) - E(0) + D(t)|
};

struct DissipationAudit {
  double max_defect = 0;         // max |E(t) - E(0) + D(t)|
  double max_scaled_defect = 0;  // max defect / (1 + |E(0)| + D(t))
  std::vector<EnergyRecord> series;
};

DissipationAudit dissipation_audit(const Trajectory& traj);

/// Explicit constants retraced from the energy arguments:
///   delta:    2|E| + c B^{(p+1)/2} >= delta (|E|^{2/(p+1)} + B)^{(p+1)/2}
///             with c = (p-1)/(p+1) |Omega|^{-(p-1)/2};
///   c_bound:  2 (p-1)^{-1} delta^{-1}, the blowup-time constant;
///   envelope_delta: int u_t^2 >= envelope_delta |E|^{2p/(p+1)} once E < 0
///             (Hoelder + Young chain);
///   envelope_c: E(t) >= -envelope_c (omega - t)^{-(p+1)/(p-1)}.
struct DerivedConstants {
  double p = 0;
  double domain_volume = 0;
  double delta = 0;
  double c_bound = 0;
  double envelope_delta = 0;
  double envelope_c = 0;
};

DerivedConstants derived_constants(double p, const Grid& grid);

/// Upper bound t0 + c_bound |E0|^{-(p-1)/(p+1)} on the blowup time given a
/// negative energy E0 observed at t0. Rejects E0 >= 0.
Time blowup_time_bound(double E0, Time t0, const DerivedConstants& consts);

enum class CollapseClass { collapsing, non_collapsing, undetermined };

std::string to_string(CollapseClass c);

struct CollapseOptions {
  double threshold_factor = 1e3; // E_threshold = factor * (1 + |E(0)|)
  double tail_tol = 1e-2;        // dissipation Cauchy-tail bound
  double min_final_sup = 1e4;    // below this the verdict is undetermined
};

struct CollapseVerdict {
  CollapseClass verdict = CollapseClass::undetermined;
  double B_est = 0;          // last observed E, proxy for the energy limit
  double evidence = 0;       // fitted exponent of log|E| vs log(omega-t)
  double dissipation_tail = 0; // Cauchy tail of D over the last decade
  double q1_integral = 0;    // int (int |grad u|^2 + |u|^{p+1})^q dt, q=1
  double q2_integral = 0;    // same, q=2
  double q1_tail = 0;        // last-decade fraction of q1_integral
  double q2_tail = 0;
  bool complete_label = false; // collapsing => complete blowup
};

CollapseVerdict classify_collapse(const Trajectory& traj, Time omega,
                                  const CollapseOptions& opts = {});

} // namespace blowuplab
