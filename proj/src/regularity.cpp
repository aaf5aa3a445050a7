#include "blowuplab/regularity.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace blowuplab {

void RegularityConfig::validate() const {
  if (eps0 <= 0 || eps1 <= 0 || eps3 <= 0 || eps4 <= 0)
    throw std::invalid_argument("regularity thresholds must be positive");
  if (enlargement <= 1.0)
    throw std::invalid_argument("enlargement factor must exceed 1");
  if (radii.empty())
    throw std::invalid_argument("radius list is empty");
  for (size_t i = 1; i < radii.size(); ++i)
    if (radii[i] >= radii[i - 1])
      throw std::invalid_argument("radius list must decrease");
  if (radii.back() <= 0)
    throw std::invalid_argument("radii must be positive");
}

double RegularityConfig::cylinder_factor(int dim) {
  return std::sqrt(dim / (2.0 * M_PI * M_E));
}

std::vector<double> geometric_radii(double r0, int count) {
  std::vector<double> out;
  double r = r0;
  for (int i = 0; i < count; ++i, r *= 0.5) out.push_back(r);
  return out;
}

namespace {

enum class Integrand { pow_p1, grad_sq, u_sq, grad_plus_pow };

// Fraction of the sphere of radius s (about the origin) lying inside the
// ball of radius r centered at distance a from the origin.
double shell_fraction(int dim, double a, double s, double r) {
  if (s <= 0.0) return a <= r ? 1.0 : 0.0;
  if (a <= 0.0) return s <= r ? 1.0 : 0.0;
  if (a + s <= r) return 1.0;
  if (std::abs(s - a) >= r) return 0.0;
  double c = (a * a + s * s - r * r) / (2.0 * a * s);
  c = std::clamp(c, -1.0, 1.0);
  if (dim == 1) return 0.5;
  if (dim == 2) return std::acos(c) / M_PI;
  if (dim == 3) return 0.5 * (1.0 - c);
  const double expo = 0.5 * (dim - 3);
  const int n = 256;
  double num = 0.0, den = 0.0;
  const double dci = (1.0 - c) / n;
  for (int i = 0; i < n; ++i) {
    const double x = c + (i + 0.5) * dci;
    num += std::pow(1.0 - x * x, expo);
  }
  num *= dci;
  const double dcf = 2.0 / n;
  for (int i = 0; i < n; ++i) {
    const double x = -1.0 + (i + 0.5) * dcf;
    den += std::pow(1.0 - x * x, expo);
  }
  den *= dcf;
  return num / den;
}

// Quadrature multipliers (on top of grid.quad_weights) restricting the
// space integral to B_rb(a) intersected with the domain.
std::vector<double> ball_multipliers(const Grid& grid, double a, double rb) {
  std::vector<double> m(grid.node_count, 0.0);
  const double h2 = 0.5 * grid.h;
  // overlap of the node cell [x-h/2, x+h/2] (clipped to the section) with
  // [lo, hi], as a fraction of the cell; smooths the ball boundary to O(h^2)
  auto cell_fraction = [&](int i, double lo, double hi) {
    const double cl = std::max(grid.nodes[i] - h2, grid.nodes.front());
    const double ch = std::min(grid.nodes[i] + h2, grid.nodes.back());
    if (ch <= cl) return 0.0;
    const double ov = std::min(ch, hi) - std::max(cl, lo);
    return std::max(ov, 0.0) / (ch - cl);
  };
  for (int i = 0; i < grid.node_count; ++i) {
    if (grid.spec.kind == DomainKind::interval)
      m[i] = cell_fraction(i, a - rb, a + rb);
    else if (std::abs(a) < 1e-12)
      // centered ball: the shell fraction is a sharp radial cutoff, so use
      // the cell overlap instead
      m[i] = cell_fraction(i, -rb, rb);
    else
      m[i] = shell_fraction(grid.spec.dim, std::abs(a), grid.nodes[i], rb);
  }
  return m;
}

void integrand_values(const Grid& grid, double p, Integrand kind,
                      std::span<const double> u, std::vector<double>& out,
                      std::vector<double>& scratch) {
  const size_t n = u.size();
  out.assign(n, 0.0);
  if (kind == Integrand::grad_sq || kind == Integrand::grad_plus_pow) {
    scratch.resize(n);
    gradient(grid, u, scratch);
    for (size_t i = 0; i < n; ++i) out[i] += scratch[i] * scratch[i];
  }
  if (kind == Integrand::pow_p1 || kind == Integrand::grad_plus_pow)
    for (size_t i = 0; i < n; ++i)
      out[i] += std::pow(std::abs(u[i]), p + 1.0);
  if (kind == Integrand::u_sq)
    for (size_t i = 0; i < n; ++i) out[i] = u[i] * u[i];
}

// Space-time integral over B_rb(center_j) x (T0, T1) for every center at
// once. The slab is clamped to snapshot coverage; *trunc reports the
// clipped fraction of (T0, T1).
std::vector<double> slab_ball_integrals(const Trajectory& traj,
                                        std::span<const double> centers,
                                        double rb, Time T0, Time T1,
                                        Integrand kind, double* trunc) {
  std::vector<double> acc(centers.size(), 0.0);
  if (traj.snapshots.empty())
    throw std::invalid_argument("trajectory has no snapshots");
  const Grid& grid = traj.params.grid;
  const double p = traj.params.p;
  const Time cov0 = traj.snapshots.front().t;
  const Time cov1 = traj.snapshots.back().t;
  const Time lo = std::max(T0, cov0);
  const Time hi = std::min(T1, cov1);
  if (trunc) {
    const Time span = T1 - T0;
    const Time cut = std::max((Time)0, T1 - hi) + std::max((Time)0, lo - T0);
    *trunc = span > 0 ? (double)(cut / span) : 1.0;
  }
  if (hi <= lo) return acc;
  std::vector<Time> times{lo};
  for (const Snapshot& s : traj.snapshots)
    if (s.t > lo && s.t < hi) times.push_back(s.t);
  times.push_back(hi);
  std::vector<std::vector<double>> mult;
  mult.reserve(centers.size());
  for (double a : centers) mult.push_back(ball_multipliers(grid, a, rb));
  std::vector<double> fprev, fcur, scratch, vals;
  std::vector<double> space_prev(centers.size(), 0.0), space_cur(centers.size());
  for (size_t k = 0; k < times.size(); ++k) {
    const std::vector<double> u = traj.field_at(times[k]);
    integrand_values(grid, p, kind, u, vals, scratch);
    for (size_t c = 0; c < centers.size(); ++c) {
      double s = 0.0;
      const std::vector<double>& m = mult[c];
      for (int i = 0; i < grid.node_count; ++i)
        s += grid.quad_weights[i] * m[i] * vals[i];
      space_cur[c] = s;
    }
    if (k > 0) {
      const double dt = (double)(times[k] - times[k - 1]);
      for (size_t c = 0; c < centers.size(); ++c)
        acc[c] += 0.5 * dt * (space_prev[c] + space_cur[c]);
    }
    space_prev.swap(space_cur);
  }
  return acc;
}

void require_ball_resolved(const Grid& grid, double a, double rb) {
  int count = 0;
  for (int i = 0; i < grid.node_count; ++i) {
    const double d = grid.spec.kind == DomainKind::interval
                         ? std::abs(grid.nodes[i] - a)
                         : std::abs(grid.nodes[i] - std::abs(a));
    if (d <= rb) ++count;
  }
  if (count < 4)
    throw std::invalid_argument("radius under-resolved: fewer than 4 nodes in ball");
}

double scale_exponent(double p, int dim) { return 4.0 / (p - 1.0) - dim; }

} // namespace

DensityResult cylinder_density(const Trajectory& traj, double a, double r,
                               Time omega) {
  const Grid& grid = traj.params.grid;
  const double rb = RegularityConfig::cylinder_factor(grid.spec.dim) * r;
  require_ball_resolved(grid, a, rb);
  DensityResult res;
  const double centers[1] = {a};
  const Time r2 = (Time)r * (Time)r;
  const std::vector<double> I =
      slab_ball_integrals(traj, centers, rb, omega - r2, omega,
                          Integrand::pow_p1, &res.truncated_fraction);
  res.value = std::pow(r, scale_exponent(traj.params.p, grid.spec.dim)) * I[0];
  return res;
}

GradDensity grad_density(const Trajectory& traj, double a, double r,
                         Time omega) {
  const Grid& grid = traj.params.grid;
  require_ball_resolved(grid, a, r);
  GradDensity res;
  const double centers[1] = {a};
  const Time r2 = (Time)r * (Time)r;
  const Time T0 = omega - r2;
  const Time T1 = omega - r2 / (Time)M_E;
  const std::vector<double> Ig = slab_ball_integrals(
      traj, centers, r, T0, T1, Integrand::grad_sq, &res.truncated_fraction);
  const std::vector<double> Iu =
      slab_ball_integrals(traj, centers, r, T0, T1, Integrand::u_sq, nullptr);
  const double e = scale_exponent(traj.params.p, grid.spec.dim);
  res.grad_term = std::pow(r, e) * Ig[0];
  res.l2_term = std::pow(r, e - 2.0) * Iu[0];
  return res;
}

DensityResult supercrit_density(const Trajectory& traj, double a, double r,
                                double K, Time omega) {
  const Grid& grid = traj.params.grid;
  require_ball_resolved(grid, a, K * r);
  DensityResult res;
  const double centers[1] = {a};
  const Time r2 = (Time)r * (Time)r;
  const std::vector<double> I = slab_ball_integrals(
      traj, centers, K * r, omega - 9.0L * r2, omega - 4.0L * r2,
      Integrand::grad_plus_pow, &res.truncated_fraction);
  res.value = std::pow(r, scale_exponent(traj.params.p, grid.spec.dim)) * I[0];
  return res;
}

LocalEnergyCriterion local_energy_criterion(const Trajectory& traj, double a,
                                            Time omega, double s0,
                                            const RegularityConfig& cfg) {
  LocalEnergyCriterion out;
  out.value = local_energy(rescale(traj, a, omega, s0));
  out.regular = out.value <= cfg.eps1;
  return out;
}

namespace {

SingularSetMap compute_map(const Trajectory& traj, Time omega,
                           const RegularityConfig& cfg) {
  cfg.validate();
  const Grid& grid = traj.params.grid;
  SingularSetMap map;
  map.domain = grid.spec;
  map.p = traj.params.p;
  map.omega = omega;
  map.cfg = cfg;
  map.centers = grid.nodes;
  const size_t nc = map.centers.size();
  const size_t nr = cfg.radii.size();
  map.density_cylinder.assign(nc * nr, 0.0);
  map.density_grad.assign(nc * nr, 0.0);
  map.density_l2.assign(nc * nr, 0.0);
  map.density_enlarged.assign(nc * nr, 0.0);
  map.truncation.assign(nr, 0.0);
  const double e = scale_exponent(traj.params.p, grid.spec.dim);
  const double cf = RegularityConfig::cylinder_factor(grid.spec.dim);
  auto scan_radius = [&](size_t j) {
    const double r = cfg.radii[j];
    const Time r2 = (Time)r * (Time)r;
    double trunc_cyl = 0.0, trunc_en = 0.0;
    const std::vector<double> cyl =
        slab_ball_integrals(traj, map.centers, cf * r, omega - r2, omega,
                            Integrand::pow_p1, &trunc_cyl);
    const Time T0 = omega - r2, T1 = omega - r2 / (Time)M_E;
    const std::vector<double> gr = slab_ball_integrals(
        traj, map.centers, r, T0, T1, Integrand::grad_sq, nullptr);
    const std::vector<double> l2 = slab_ball_integrals(
        traj, map.centers, r, T0, T1, Integrand::u_sq, nullptr);
    const std::vector<double> en = slab_ball_integrals(
        traj, map.centers, cfg.enlargement * r, omega - 9.0L * r2,
        omega - 4.0L * r2, Integrand::grad_plus_pow, &trunc_en);
    map.truncation[j] = std::max(trunc_cyl, trunc_en);
    const double se = std::pow(r, e);
    for (size_t c = 0; c < nc; ++c) {
      map.density_cylinder[c * nr + j] = se * cyl[c];
      map.density_grad[c * nr + j] = se * gr[c];
      map.density_l2[c * nr + j] = se / (r * r) * l2[c];
      map.density_enlarged[c * nr + j] = se * en[c];
    }
  };
  // radii are independent; each writes disjoint slices of the map
  const int workers = std::min<int>(thread_budget(), (int)nr);
  if (workers <= 1) {
    for (size_t j = 0; j < nr; ++j) scan_radius(j);
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (size_t j = next++; j < nr; j = next++) scan_radius(j);
      });
    for (std::thread& th : pool) th.join();
  }
  map.flagged.assign(nc, 0);
  map.flagged_at.assign(nc * nr, 0);
  for (size_t c = 0; c < nc; ++c) {
    bool all = true;
    for (size_t j = 0; j < nr; ++j) {
      if (map.density_enlarged[c * nr + j] < cfg.eps4) all = false;
      map.flagged_at[c * nr + j] = all ? 1 : 0;
    }
    map.flagged[c] = all ? 1 : 0;
  }
  return map;
}

} // namespace

std::vector<double> SingularSetMap::flagged_centers() const {
  std::vector<double> out;
  for (size_t c = 0; c < centers.size(); ++c)
    if (flagged[c]) out.push_back(centers[c]);
  return out;
}

SingularSetMap extract_singular_set(const Trajectory& traj, Time omega,
                                    const RegularityConfig& cfg) {
  if (traj.final_sup() < cfg.min_flag_sup)
    throw std::invalid_argument("trajectory under-resolved for set extraction");
  const Time d_last = omega - traj.snapshots.back().t;
  if ((Time)cfg.radii.back() * (Time)cfg.radii.back() < 4.0L * d_last)
    throw std::invalid_argument("smallest radius below the resolved scale");
  return compute_map(traj, omega, cfg);
}

void calibrate_thresholds(const Trajectory& bounded, Time omega_proxy,
                          RegularityConfig& cfg) {
  const SingularSetMap map = compute_map(bounded, omega_proxy, cfg);
  auto vmax = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
  };
  const double floor = 1e-12;
  cfg.eps0 = std::max(floor, 10.0 * vmax(map.density_cylinder));
  cfg.eps3 = std::max(floor, 10.0 * std::max(vmax(map.density_grad),
                                             vmax(map.density_l2)));
  cfg.eps4 = std::max(floor, 10.0 * vmax(map.density_enlarged));
}

namespace {

struct Cluster {
  double lo = 0, hi = 0;
};

// Clusters of centers passing the criterion at scale index j (this and all
// coarser radii). Counting at scale r_j must use the set resolved at r_j:
// the criterion has spatial resolution ~K*r, so finer radii refine the set.
std::vector<Cluster> flagged_clusters(const SingularSetMap& map, size_t j) {
  const size_t nr = map.cfg.radii.size();
  std::vector<double> pts;
  for (size_t c = 0; c < map.centers.size(); ++c)
    if (map.flagged_at[c * nr + j]) pts.push_back(map.centers[c]);
  std::vector<Cluster> out;
  if (pts.empty()) return out;
  std::sort(pts.begin(), pts.end());
  double spacing = 1e300;
  for (size_t i = 1; i < map.centers.size(); ++i)
    spacing = std::min(spacing, std::abs(map.centers[i] - map.centers[i - 1]));
  Cluster cur{pts[0], pts[0]};
  for (size_t i = 1; i < pts.size(); ++i) {
    if (pts[i] - cur.hi <= 1.5 * spacing) {
      cur.hi = pts[i];
    } else {
      out.push_back(cur);
      cur = {pts[i], pts[i]};
    }
  }
  out.push_back(cur);
  return out;
}

// Lattice-box count of the flagged set at mesh size r. Interval domains
// count cells on the line; radial domains count cells in R^N meeting the
// union of spherical shells.
double box_count(const SingularSetMap& map, const std::vector<Cluster>& cls,
                 double r) {
  const DomainSpec& dom = map.domain;
  auto count_line = [&](const std::vector<Cluster>& segs) {
    std::vector<std::pair<long, long>> ranges;
    for (const Cluster& c : segs)
      ranges.emplace_back((long)std::floor(c.lo / r),
                          (long)std::floor(c.hi / r));
    std::sort(ranges.begin(), ranges.end());
    long total = 0;
    long prev_hi = std::numeric_limits<long>::min();
    for (auto& [a, b] : ranges) {
      const long lo = std::max(a, prev_hi + 1);
      if (b >= lo) total += b - lo + 1;
      prev_hi = std::max(prev_hi, b);
    }
    return (double)total;
  };
  if (dom.kind == DomainKind::interval) return count_line(cls);
  if (dom.dim == 1) {
    std::vector<Cluster> mirrored;
    for (const Cluster& c : cls) {
      mirrored.push_back(c);
      mirrored.push_back({-c.hi, -c.lo});
    }
    return count_line(mirrored);
  }
  const double R = dom.outer_radius;
  const long kmax = (long)std::ceil(R / r) + 1;
  auto axis_range = [&](long k, double& lo, double& hi) {
    const double c0 = k * r, c1 = (k + 1) * r;
    lo = c0 > 0 ? c0 : (c1 < 0 ? -c1 : 0.0);
    hi = std::max(std::abs(c0), std::abs(c1));
  };
  auto hits = [&](double dmin, double dmax) {
    for (const Cluster& c : cls)
      if (dmax >= c.lo && dmin <= c.hi) return true;
    return false;
  };
  long count = 0;
  if (dom.dim == 2) {
    for (long i = -kmax; i < kmax; ++i)
      for (long j = -kmax; j < kmax; ++j) {
        double xl, xh, yl, yh;
        axis_range(i, xl, xh);
        axis_range(j, yl, yh);
        const double dmin = std::sqrt(xl * xl + yl * yl);
        const double dmax = std::sqrt(xh * xh + yh * yh);
        if (hits(dmin, dmax)) ++count;
      }
    return (double)count;
  }
  for (long i = -kmax; i < kmax; ++i)
    for (long j = -kmax; j < kmax; ++j)
      for (long k = -kmax; k < kmax; ++k) {
        double xl, xh, yl, yh, zl, zh;
        axis_range(i, xl, xh);
        axis_range(j, yl, yh);
        axis_range(k, zl, zh);
        const double dmin = std::sqrt(xl * xl + yl * yl + zl * zl);
        const double dmax = std::sqrt(xh * xh + yh * yh + zh * zh);
        if (hits(dmin, dmax)) ++count;
      }
  return (double)count;
}

// Size of a greedy disjoint-ball (radius K*r) family with centers in the
// flagged set.
double vitali_count(const SingularSetMap& map, const std::vector<Cluster>& cls,
                    double r) {
  const double K = map.cfg.enlargement;
  const double sep = 2.0 * K * r;
  const DomainSpec& dom = map.domain;
  double total = 0.0;
  for (const Cluster& c : cls) {
    const double len = c.hi - c.lo;
    const double layers = std::floor(len / sep) + 1.0;
    if (dom.kind == DomainKind::interval) {
      total += layers;
      continue;
    }
    const int N = dom.dim;
    double per_layer = 0.0;
    for (int l = 0; l < (int)layers; ++l) {
      const double rho = c.lo + l * sep;
      if (rho <= 0.5 * sep) {
        per_layer += 1.0;
      } else if (N == 1) {
        per_layer += 2.0;
      } else if (N == 2) {
        per_layer += std::max(1.0, std::floor(M_PI * rho / (K * r)));
      } else {
        // spherical cap packing: solid angle 4pi over caps of angular
        // radius K*r/rho
        const double th = std::min(1.0, K * r / rho);
        per_layer += std::max(1.0, std::floor(4.0 / (th * th)));
      }
    }
    total += per_layer;
  }
  return total;
}

} // namespace

DimensionReport covering_dimension(const SingularSetMap& map,
                                   std::span<const double> q_list) {
  DimensionReport rep;
  rep.analytic_bound = map.domain.dim - 2.0 - 4.0 / (map.p - 1.0);
  const size_t nr = map.cfg.radii.size();
  std::vector<std::vector<Cluster>> scale_cls(nr);
  for (size_t j = 0; j < nr; ++j) scale_cls[j] = flagged_clusters(map, j);
  rep.empty = scale_cls.back().empty();
  if (rep.empty) return rep;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (size_t j = 0; j < nr; ++j) {
    const double r = map.cfg.radii[j];
    const double N = box_count(map, scale_cls[j], r);
    rep.box_counts.emplace_back(r, N);
    if (N >= 1.0) {
      const double x = std::log(1.0 / r);
      const double y = std::log(N);
      sx += x; sy += y; sxx += x * x; sxy += x * y;
      ++n;
    }
  }
  const double det = n * sxx - sx * sx;
  rep.box_slope = (n >= 2 && det != 0.0) ? (n * sxy - sx * sy) / det : 0.0;
  const double K = map.cfg.enlargement;
  for (double q : q_list) {
    CoveringSum cs;
    cs.q = q;
    cs.exponent = map.domain.dim - 4.0 / (map.p - 1.0) - 2.0 * q / (q - 1.0);
    for (size_t j = 0; j < nr; ++j) {
      const double r = map.cfg.radii[j];
      const double M = vitali_count(map, scale_cls[j], r);
      cs.sums.emplace_back(r, M * std::pow(5.0 * K * r, cs.exponent));
    }
    double smax = 0.0;
    for (auto& [r, s] : cs.sums) smax = std::max(smax, s);
    cs.bounded = smax <= 2.0 * cs.sums.front().second + 1e-300;
    rep.covering.push_back(cs);
  }
  return rep;
}

} // namespace blowuplab
