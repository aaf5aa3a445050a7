#pragma once

#include <string>
#include <vector>

#include "blowuplab/integrator.hpp"

namespace blowuplab {

struct RatePoint {
  Time t = 0;
  Time omega_minus_t = 0;
  double g = 0; // (omega - t)^{1/(p-1)} |u(t)|_inf
};

struct RateCurve {
  double p = 0;
  Time omega = 0;
  std::vector<RatePoint> points;
  size_t window_begin = 0; // first index of the final decade of omega - t
};

/// Scaled sup-norm history against a given blowup time. Rejects
/// trajectories that did not reach the blowup amplitude threshold.
RateCurve rate_curve(const Trajectory& traj, Time omega);

enum class RateType { type_one, type_two, undetermined };

std::string to_string(RateType type);

struct RateConfig {
  double type_one_band = 0.2;  // max relative oscillation of g on the window
  double type_two_slope = 0.05; // min growth of log g per e-fold of omega-t
  size_t min_window = 20;
};

struct RateDiagnostics {
  RateType verdict = RateType::undetermined;
  double plateau = 0; // mean of g over the classification window
  double slope = 0;   // d log g / d(-log(omega - t)) on the window
  double oscillation = 0;
  double sup_g = 0;   // max of g over the whole curve
};

RateDiagnostics classify_type(const RateCurve& curve,
                              const RateConfig& cfg = {});

} // namespace blowuplab
