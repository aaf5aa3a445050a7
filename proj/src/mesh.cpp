#include "blowuplab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>

namespace blowuplab {

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::interval: return "interval";
    case DomainKind::radial_ball: return "radial_ball";
    case DomainKind::radial_annulus: return "radial_annulus";
  }
  throw std::logic_error("unknown DomainKind");
}

DomainKind domain_kind_from_string(const std::string& name) {
  if (name == "interval") return DomainKind::interval;
  if (name == "radial_ball") return DomainKind::radial_ball;
  if (name == "radial_annulus") return DomainKind::radial_annulus;
  throw std::invalid_argument("unknown domain kind: " + name);
}

void DomainSpec::validate() const {
  if (dim < 1) throw std::invalid_argument("domain dimension must be >= 1");
  if (!(outer_radius > inner_radius) || inner_radius < 0.0)
    throw std::invalid_argument("domain radii must satisfy R > R0 >= 0");
  switch (kind) {
    case DomainKind::interval:
      if (dim != 1)
        throw std::invalid_argument("interval domain forces N = 1");
      break;
    case DomainKind::radial_ball:
      if (inner_radius != 0.0)
        throw std::invalid_argument("ball requires R0 = 0");
      break;
    case DomainKind::radial_annulus:
      if (inner_radius <= 0.0)
        throw std::invalid_argument("annulus requires R0 > 0");
      break;
  }
}

double unit_sphere_area(int dim) {
  // sigma_N = 2 pi^{N/2} / Gamma(N/2)
  return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) /
         std::tgamma(0.5 * dim);
}

double DomainSpec::volume() const {
  validate();
  if (kind == DomainKind::interval) return outer_radius - inner_radius;
  const double sigma = unit_sphere_area(dim);
  return sigma / dim *
         (std::pow(outer_radius, dim) - std::pow(inner_radius, dim));
}

Grid build_grid(const DomainSpec& spec, int node_count) {
  spec.validate();
  if (node_count < 8)
    throw std::invalid_argument("grid needs at least 8 nodes");

  Grid g;
  g.spec = spec;
  g.node_count = node_count;
  g.h = (spec.outer_radius - spec.inner_radius) / (node_count - 1);
  g.nodes.resize(node_count);
  g.quad_weights.resize(node_count);
  g.dirichlet.assign(node_count, false);

  for (int i = 0; i < node_count; ++i)
    g.nodes[i] = spec.inner_radius + i * g.h;
  g.nodes.back() = spec.outer_radius;

  const bool radial = spec.kind != DomainKind::interval;
  const double sigma = radial ? unit_sphere_area(spec.dim) : 1.0;
  for (int i = 0; i < node_count; ++i) {
    const double trap = (i == 0 || i == node_count - 1) ? 0.5 * g.h : g.h;
    const double w =
        radial ? sigma * std::pow(g.nodes[i], spec.dim - 1) : 1.0;
    g.quad_weights[i] = trap * w;
  }

  g.dirichlet.back() = true;
  if (spec.kind != DomainKind::radial_ball) g.dirichlet.front() = true;
  return g;
}

void laplacian(const Grid& grid, std::span<const double> f,
               std::span<double> out) {
  const int m = grid.node_count;
  const double inv_h2 = 1.0 / (grid.h * grid.h);
  const int dim = grid.spec.dim;
  const bool radial = grid.spec.kind != DomainKind::interval && dim > 1;

  for (int i = 1; i + 1 < m; ++i) {
    double val = (f[i - 1] - 2.0 * f[i] + f[i + 1]) * inv_h2;
    if (radial) {
      const double r = grid.nodes[i];
      val += (dim - 1) / r * (f[i + 1] - f[i - 1]) / (2.0 * grid.h);
    }
    out[i] = val;
  }

  if (grid.symmetry_at_origin()) {
    // ghost node f[-1] = f[1] enforces f_r(0)=0; symmetric limit N f_rr
    out[0] = dim * 2.0 * (f[1] - f[0]) * inv_h2;
  } else {
    out[0] = (f[0] - 2.0 * f[1] + f[2]) * inv_h2; // one-sided, O(h)
  }
  out[m - 1] = (f[m - 3] - 2.0 * f[m - 2] + f[m - 1]) * inv_h2;
}

void gradient(const Grid& grid, std::span<const double> f,
              std::span<double> out) {
  const int m = grid.node_count;
  const double inv_2h = 1.0 / (2.0 * grid.h);
  for (int i = 1; i + 1 < m; ++i) out[i] = (f[i + 1] - f[i - 1]) * inv_2h;
  if (grid.symmetry_at_origin())
    out[0] = 0.0;
  else
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv_2h;
  out[m - 1] = (3.0 * f[m - 1] - 4.0 * f[m - 2] + f[m - 3]) * inv_2h;
}

double integrate(const Grid& grid, std::span<const double> f) {
  double acc = 0.0;
  for (int i = 0; i < grid.node_count; ++i) acc += grid.quad_weights[i] * f[i];
  return acc;
}

double grad_sq_integral(const Grid& grid, std::span<const double> f) {
  // Edge midpoint rule. On the interval this is summation-by-parts exact
  // against the 3-point Laplacian, so the discrete energy identity holds
  // to time-integration accuracy even when the profile is under-resolved.
  const bool radial = grid.spec.kind != DomainKind::interval;
  const double sigma = radial ? unit_sphere_area(grid.spec.dim) : 1.0;
  double acc = 0.0;
  for (int i = 0; i + 1 < grid.node_count; ++i) {
    const double d = (f[i + 1] - f[i]) / grid.h;
    const double r_mid = 0.5 * (grid.nodes[i] + grid.nodes[i + 1]);
    const double w =
        radial ? sigma * std::pow(r_mid, grid.spec.dim - 1) : 1.0;
    acc += grid.h * w * d * d;
  }
  return acc;
}

int thread_budget() {
  if (const char* env = std::getenv("BLOWUPLAB_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

double interpolate_cubic(const Grid& grid, std::span<const double> f,
                         double x) {
  const int m = grid.node_count;
  const double lo = grid.nodes.front();
  const double hi = grid.nodes.back();
  x = std::clamp(x, lo, hi);
  int i = static_cast<int>((x - lo) / grid.h);
  i = std::clamp(i, 0, m - 2);

  if (i == 0 || i == m - 2) {
    const double t = (x - grid.nodes[i]) / grid.h;
    return (1.0 - t) * f[i] + t * f[i + 1];
  }
  // 4-point Lagrange on nodes i-1..i+2
  const double t = (x - grid.nodes[i]) / grid.h; // in [0,1]
  const double a = f[i - 1], b = f[i], c = f[i + 1], d = f[i + 2];
  const double c0 = b;
  const double c1 = -a / 3.0 - b / 2.0 + c - d / 6.0;
  const double c2 = 0.5 * (a + c) - b;
  const double c3 = (d - a) / 6.0 + 0.5 * (b - c);
  return c0 + t * (c1 + t * (c2 + t * c3));
}

} // namespace blowuplab
