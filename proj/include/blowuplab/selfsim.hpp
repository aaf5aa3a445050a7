#pragma once

#include <span>
#include <utility>
#include <vector>

#include "blowuplab/integrator.hpp"
#include "blowuplab/mesh.hpp"

namespace blowuplab {

/// kappa = (p-1)^{-1/(p-1)}, the amplitude of the flat blowup solution.
double kappa(double p);

/// Gaussian-weighted energy of the constant profile w == kappa over all of
/// R^N: kappa^2 (4 pi)^{N/2} / (2 (p+1)).
double local_energy_of_kappa(double p, int dim);

struct SelfsimConfig {
  double y_extent = 8.0;
  int y_nodes = 257;
};

/// Self-similar view w(y,s) = (omega-t)^{1/(p-1)} u(a + y sqrt(omega-t), t),
/// sampled along the coordinate ray through the center a.
struct RescaledFrame {
  DomainSpec domain;
  double p = 0;
  double a = 0;       // blowup center (radial / interval coordinate)
  Time omega = 0;
  double s = 0;       // similarity time, s = -log(omega - t)
  double lambda = 0;  // sqrt(omega - t) = e^{-s/2}
  double y_extent = 0;
  std::vector<double> y;
  std::vector<double> w;
  std::vector<double> rho;  // e^{-y^2/4} along the ray
  std::vector<char> mask;   // 1 where a + lambda*y lies inside Omega

  Time physical_time() const;
};

RescaledFrame rescale(const Trajectory& traj, double a, Time omega, double s,
                      const SelfsimConfig& cfg = {});

/// Weighted local energy
///   E(w) = int (1/2 |grad w|^2 + w^2/(2(p-1)) - |w|^{p+1}/(p+1)) rho dy
/// over Omega_s, evaluated with the full N-dimensional Gaussian measure
/// (spherical-shell kernel for radial domains, exact for centered frames).
double local_energy(const RescaledFrame& frame);

struct LocalEnergyEntry {
  double s = 0;
  double E = 0;
  double ws_norm = 0;         // int w_s^2 rho over the surrounding interval
  double decay_integrand = 0; // int rho (1+y^2)(w_s^2 + |grad w|^2)
};

struct LocalEnergySeries {
  std::vector<LocalEnergyEntry> entries;
  double max_positive_jump = 0; // monotonicity audit: E should not increase
};

LocalEnergySeries local_energy_series(const Trajectory& traj, double a,
                                      Time omega,
                                      std::span<const double> s_grid,
                                      const SelfsimConfig& cfg = {});

struct NondegeneracyResult {
  bool blowup_candidate = false;
  double g_final = 0; // tail value of the scaled windowed sup
  std::vector<std::pair<double, double>> g; // (omega - t, g(t))
};

/// Windowed-sup nondegeneracy check: g_a(t) = (2 sqrt(omega-t))^{2/(p-1)} *
/// sup_{|x-a| <= 2 sqrt(omega-t)} |u|; vanishing g rules out blowup at a.
NondegeneracyResult nondegeneracy_check(const Trajectory& traj, double a,
                                        Time omega, double tol = 0.05);

/// Synthetic trajectory u == kappa (omega - t)^{-1/(p-1)}, flat in space,
/// with snapshots geometric in omega - t and an analytically consistent
/// ledger. Test and calibration fixture.
Trajectory make_flat_trajectory(const ModelParams& params, Time omega,
                                double delta_start, double delta_end,
                                double ds);

/// Synthetic blowup ledger with the log-corrected sup norm
/// (omega-t)^{-1/(p-1)} log(e/(omega-t)): a Type II rate profile.
Trajectory make_log_divergent_trajectory(const ModelParams& params, Time omega,
                                         double delta_start, double delta_end,
                                         double ds);

} // namespace blowuplab
