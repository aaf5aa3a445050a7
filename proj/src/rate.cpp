#include "blowuplab/rate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace blowuplab {

std::string to_string(RateType type) {
  switch (type) {
    case RateType::type_one: return "type_I";
    case RateType::type_two: return "type_II";
    default: return "undetermined";
  }
}

RateCurve rate_curve(const Trajectory& traj, Time omega) {
  if (traj.stop != StopReason::blowup_suspected)
    throw std::invalid_argument("rate curve requires a blowup trajectory");
  if (traj.ledger.empty())
    throw std::invalid_argument("rate curve requires ledger entries");
  if (omega <= traj.ledger.back().t)
    throw std::invalid_argument("omega must exceed the final ledger time");
  RateCurve curve;
  curve.p = traj.params.p;
  curve.omega = omega;
  const double inv = 1.0 / (curve.p - 1.0);
  for (const LedgerEntry& e : traj.ledger) {
    RatePoint pt;
    pt.t = e.t;
    pt.omega_minus_t = omega - e.t;
    pt.g = (double)powl((long double)pt.omega_minus_t, (long double)inv) *
           e.sup_norm;
    curve.points.push_back(pt);
  }
  const Time d_last = curve.points.back().omega_minus_t;
  curve.window_begin = 0;
  for (size_t i = 0; i < curve.points.size(); ++i) {
    if (curve.points[i].omega_minus_t <= 10.0L * d_last) {
      curve.window_begin = i;
      break;
    }
  }
  // widen a sparsely sampled final decade so the classifier has a window
  const size_t min_window = RateConfig{}.min_window;
  if (curve.points.size() - curve.window_begin < min_window)
    curve.window_begin =
        curve.points.size() > min_window ? curve.points.size() - min_window : 0;
  return curve;
}

RateDiagnostics classify_type(const RateCurve& curve, const RateConfig& cfg) {
  RateDiagnostics diag;
  const size_t n = curve.points.size();
  if (n - curve.window_begin < cfg.min_window) return diag; // undetermined
  double gmin = 1e300, gmax = 0.0, gsum = 0.0;
  size_t count = 0;
  // least squares of log g against x = -log(omega - t)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double g = curve.points[i].g;
    diag.sup_g = std::max(diag.sup_g, g);
    if (i < curve.window_begin || g <= 0.0) continue;
    gmin = std::min(gmin, g);
    gmax = std::max(gmax, g);
    gsum += g;
    ++count;
    const double x = -(double)logl((long double)curve.points[i].omega_minus_t);
    const double y = std::log(g);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  if (count < cfg.min_window) return diag; // undetermined
  diag.plateau = gsum / count;
  diag.oscillation = (gmax - gmin) / diag.plateau;
  const double det = count * sxx - sx * sx;
  diag.slope = det != 0.0 ? (count * sxy - sx * sy) / det : 0.0;
  // g growing while already far above the self-similar amplitude kappa is
  // super-algebraic even when the window slope has flattened below the cut
  const double k = std::pow(curve.p - 1.0, -1.0 / (curve.p - 1.0));
  if (diag.slope >= cfg.type_two_slope ||
      (diag.slope > 0.0 && gmin > 10.0 * k))
    diag.verdict = RateType::type_two;
  else if (diag.oscillation <= cfg.type_one_band &&
           std::abs(diag.slope) < cfg.type_two_slope)
    diag.verdict = RateType::type_one;
  else
    diag.verdict = RateType::undetermined;
  return diag;
}

} // namespace blowuplab
