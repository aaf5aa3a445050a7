#include "blowuplab/energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace blowuplab {

double energy(const Grid& grid, std::span<const double> f, double p) {
  std::vector<double> fp(f.size());
  for (size_t i = 0; i < f.size(); ++i)
    fp[i] = std::pow(std::abs(f[i]), p + 1.0);
  return 0.5 * grad_sq_integral(grid, f) -
         integrate(grid, fp) / (p + 1.0);
}

DissipationAudit dissipation_audit(const Trajectory& traj) {
  DissipationAudit audit;
  if (traj.ledger.empty()) return audit;
  const double e0 = traj.ledger.front().energy;
  audit.series.reserve(traj.ledger.size());
  for (const LedgerEntry& e : traj.ledger) {
    EnergyRecord rec;
    rec.t = e.t;
    rec.E = e.energy;
    rec.D = e.dissipation;
    rec.defect = std::abs(e.energy - e0 + e.dissipation);
    audit.max_defect = std::max(audit.max_defect, rec.defect);
    audit.max_scaled_defect = std::max(
        audit.max_scaled_defect, rec.defect / (1.0 + std::abs(e0) + rec.D));
    audit.series.push_back(rec);
  }
  return audit;
}

DerivedConstants derived_constants(double p, const Grid& grid) {
  if (!(p > 1.0)) throw std::invalid_argument("p must be > 1");
  DerivedConstants c;
  c.p = p;
  c.domain_volume = grid.spec.volume();
  const double vol = c.domain_volume;

  // Hoelder step constant of the |u|^{p+1} lower bound.
  const double hoelder = (p - 1.0) / (p + 1.0) * std::pow(vol, -(p - 1.0) / 2.0);
  // Elementary inequality a + b^{(p+1)/2} >= 2^{-(p-1)/2} (a^{2/(p+1)} + b)^{(p+1)/2}
  // applied with coefficients (2, hoelder).
  c.delta = std::min(2.0, hoelder) * std::pow(2.0, -(p - 1.0) / 2.0);
  c.c_bound = 2.0 / ((p - 1.0) * c.delta);

  // Young-inequality constant in 2|E| <= C_eps |Omega|^{(p-1)/(2p)} (int u_t^2)^{(p+1)/(2p)}.
  const double c_eps = std::pow((p - 1.0) / 2.0, -1.0 / p) * p / (p + 1.0);
  c.envelope_delta = std::pow(
      2.0 / (c_eps * std::pow(vol, (p - 1.0) / (2.0 * p))),
      2.0 * p / (p + 1.0));
  c.envelope_c = std::pow((p - 1.0) * c.envelope_delta / (p + 1.0),
                          -(p + 1.0) / (p - 1.0));
  return c;
}

Time blowup_time_bound(double E0, Time t0, const DerivedConstants& consts) {
  if (E0 >= 0.0)
    throw std::invalid_argument("blowup time bound requires negative energy");
  const double p = consts.p;
  return t0 +
         Time(consts.c_bound * std::pow(std::abs(E0), -(p - 1.0) / (p + 1.0)));
}

std::string to_string(CollapseClass c) {
  switch (c) {
    case CollapseClass::collapsing: return "collapsing";
    case CollapseClass::non_collapsing: return "non_collapsing";
    case CollapseClass::undetermined: return "undetermined";
  }
  throw std::logic_error("unknown CollapseClass");
}

namespace {

// Trapezoid in time of (grad_sq + pow_int)^q over the ledger, with the
// share accumulated over the last decade of omega - t.
void q_integral(const Trajectory& traj, Time omega, double q, double* total,
                double* tail_fraction) {
  const auto& led = traj.ledger;
  long double acc = 0.0L, tail = 0.0L;
  const Time tail_start = omega - 10.0L * (omega - led.back().t);
  for (size_t i = 1; i < led.size(); ++i) {
    const long double f0 =
        std::pow(led[i - 1].grad_sq + led[i - 1].pow_int, q);
    const long double f1 = std::pow(led[i].grad_sq + led[i].pow_int, q);
    const long double piece = 0.5L * (f0 + f1) * (led[i].t - led[i - 1].t);
    acc += piece;
    if (led[i].t >= tail_start) tail += piece;
  }
  *total = double(acc);
  *tail_fraction = acc > 0.0L ? double(tail / acc) : 0.0;
}

} // namespace

CollapseVerdict classify_collapse(const Trajectory& traj, Time omega,
                                  const CollapseOptions& opts) {
  CollapseVerdict v;
  if (traj.ledger.empty()) return v;
  const auto& led = traj.ledger;
  v.B_est = led.back().energy;

  q_integral(traj, omega, 1.0, &v.q1_integral, &v.q1_tail);
  q_integral(traj, omega, 2.0, &v.q2_integral, &v.q2_tail);

  if (traj.stop != StopReason::blowup_suspected ||
      traj.final_sup() < opts.min_final_sup)
    return v; // undetermined

  const double e0 = led.front().energy;
  const double threshold = opts.threshold_factor * (1.0 + std::abs(e0));
  const Time tail_start = omega - 10.0L * (omega - led.back().t);

  if (v.B_est < -threshold) {
    v.verdict = CollapseClass::collapsing;
    v.complete_label = true;
    // Power-law exponent of |E| against omega - t, over the deep window.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const LedgerEntry& e : led) {
      if (e.energy >= -threshold) continue;
      const double x = std::log(double(omega - e.t));
      const double y = std::log(-e.energy);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++n;
    }
    if (n >= 2 && n * sxx - sx * sx > 0.0)
      v.evidence = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double d_total = led.back().dissipation;
    double d_at_tail = d_total;
    for (const LedgerEntry& e : led)
      if (e.t >= tail_start) {
        d_at_tail = e.dissipation;
        break;
      }
    v.dissipation_tail =
        d_total > 0.0 ? (d_total - d_at_tail) / d_total : 0.0;
    return v;
  }

  // Bounded energy over the final decade?
  double min_e_tail = 0.0;
  for (const LedgerEntry& e : led)
    if (e.t >= tail_start) min_e_tail = std::min(min_e_tail, e.energy);
  const double d_total = led.back().dissipation;
  double d_at_tail = d_total;
  for (const LedgerEntry& e : led)
    if (e.t >= tail_start) {
      d_at_tail = e.dissipation;
      break;
    }
  v.dissipation_tail = d_total > 0.0 ? (d_total - d_at_tail) / d_total : 0.0;
  if (min_e_tail >= -threshold && v.dissipation_tail < opts.tail_tol) {
    v.verdict = CollapseClass::non_collapsing;
    return v;
  }
  return v;
}

} // namespace blowuplab
