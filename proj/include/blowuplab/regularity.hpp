#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "blowuplab/integrator.hpp"
#include "blowuplab/selfsim.hpp"

namespace blowuplab {

struct RegularityConfig {
  double eps0 = 1e-2; // cylinder |u|^{p+1} density threshold
  double eps1 = 1e-2; // rescaled local-energy threshold
  double eps3 = 1e-2; // gradient / L2 slab density threshold
  double eps4 = 1e-2; // enlarged-ball density threshold driving the set scan
  double enlargement = 2.0; // K > 1, ball B_{Kr} in the enlarged criterion
  std::vector<double> radii;            // decreasing, geometric ratio 1/2
  std::vector<double> q_list = {2, 4, 8, 16};
  double min_flag_sup = 1e5; // required resolution before set extraction

  void validate() const;
  /// Cylinder ball radius factor sqrt(N / (2 pi e)).
  static double cylinder_factor(int dim);
};

/// Geometric radii r0, r0/2, ..., count entries.
std::vector<double> geometric_radii(double r0, int count);

struct DensityResult {
  double value = 0;
  double truncated_fraction = 0; // portion of the time slab past coverage
};

/// r^{4/(p-1)-N} int over B_{c_N r}(a) x (omega - r^2, omega) of |u|^{p+1}.
DensityResult cylinder_density(const Trajectory& traj, double a, double r,
                               Time omega);

struct GradDensity {
  double grad_term = 0; // r^{4/(p-1)-N} int |grad u|^2, slab (w-r^2, w-r^2/e)
  double l2_term = 0;   // r^{4/(p-1)-2-N} int u^2 over the same slab
  double truncated_fraction = 0;
};

GradDensity grad_density(const Trajectory& traj, double a, double r,
                         Time omega);

/// r^{4/(p-1)-N} int over B_{Kr}(a) x (omega-9r^2, omega-4r^2) of
/// |grad u|^2 + |u|^{p+1}.
DensityResult supercrit_density(const Trajectory& traj, double a, double r,
                                double K, Time omega);

/// Local energy of the rescaled frame at (a, s0), with the eps1 verdict.
struct LocalEnergyCriterion {
  double value = 0;
  bool regular = false;
};
LocalEnergyCriterion local_energy_criterion(const Trajectory& traj, double a,
                                            Time omega, double s0,
                                            const RegularityConfig& cfg);

struct SingularSetMap {
  DomainSpec domain;
  double p = 0;
  Time omega = 0;
  RegularityConfig cfg;
  std::vector<double> centers; // radial shells (or interval points)
  // row-major [center][radius]
  std::vector<double> density_cylinder;
  std::vector<double> density_grad;
  std::vector<double> density_l2;
  std::vector<double> density_enlarged;
  std::vector<char> flagged; // per center: enlarged density >= eps4 at all r
  // per (center, radius): criterion held at this and every coarser radius;
  // the set resolved at scale r_j, used by scale-j box counts
  std::vector<char> flagged_at;
  std::vector<double> truncation; // per radius, worst slab truncation

  double density_at(size_t center, size_t radius) const {
    return density_enlarged[center * cfg.radii.size() + radius];
  }
  std::vector<double> flagged_centers() const;
};

SingularSetMap extract_singular_set(const Trajectory& traj, Time omega,
                                    const RegularityConfig& cfg);

/// Sets eps thresholds to 10x the largest densities observed on a bounded
/// reference trajectory, so that non-blowup data never flags.
void calibrate_thresholds(const Trajectory& bounded, Time omega_proxy,
                          RegularityConfig& cfg);

struct CoveringSum {
  double q = 0;
  double exponent = 0; // N - 4/(p-1) - 2q/(q-1)
  std::vector<std::pair<double, double>> sums; // (r, sum over Vitali balls)
  bool bounded = false;
};

struct DimensionReport {
  bool empty = true;
  double box_slope = 0; // fitted -d log N(r) / d log r
  std::vector<std::pair<double, double>> box_counts; // (r, N(r))
  std::vector<CoveringSum> covering;
  double analytic_bound = 0; // N - 2 - 4/(p-1)
};

DimensionReport covering_dimension(const SingularSetMap& map,
                                   std::span<const double> q_list);

} // namespace blowuplab
