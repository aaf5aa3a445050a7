#pragma once

#include <span>
#include <string>
#include <vector>

namespace blowuplab {

enum class DomainKind { interval, radial_ball, radial_annulus };

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& name);

/// Spatial domain: a 1D interval [R0,R], or a radial ball / annulus in
/// dimension N described by its radial section.
struct DomainSpec {
  DomainKind kind = DomainKind::interval;
  int dim = 1;               // ambient dimension N
  double inner_radius = 0.0; // R0, 0 unless annulus
  double outer_radius = 1.0; // R

  void validate() const; // throws std::invalid_argument on inconsistency
  double volume() const; // |Omega| in R^N
};

/// Surface area of the unit sphere S^{N-1} in R^N (2 for N=1).
double unit_sphere_area(int dim);

/// Worker-thread cap: BLOWUPLAB_THREADS when set, else 1.
int thread_budget();

/// Uniform grid over the radial section [R0,R] with trapezoid quadrature
/// weights carrying the radial factor sigma_N r^{N-1}.
struct Grid {
  DomainSpec spec;
  int node_count = 0;
  double h = 0.0;
  std::vector<double> nodes;
  std::vector<double> quad_weights;
  std::vector<bool> dirichlet; // nodes held at zero

  bool symmetry_at_origin() const {
    return spec.kind == DomainKind::radial_ball;
  }
};

Grid build_grid(const DomainSpec& spec, int node_count);

/// Second-order centered Laplacian. Radial grids use f_rr + (N-1)/r f_r;
/// the origin of a ball uses the symmetric limit N*f_rr with a ghost node.
/// Boundary entries are one-sided and only meaningful for Dirichlet data.
void laplacian(const Grid& grid, std::span<const double> f,
               std::span<double> out);

/// First derivative by centered differences (one-sided at the ends).
void gradient(const Grid& grid, std::span<const double> f,
              std::span<double> out);

/// Quadrature of f over the full N-dimensional domain.
double integrate(const Grid& grid, std::span<const double> f);

/// Quadrature of |grad f|^2 over the domain.
double grad_sq_integral(const Grid& grid, std::span<const double> f);

/// Cubic (4-point Lagrange) interpolation of nodal values at coordinate x;
/// falls back to linear near the ends. x outside [R0,R] is clamped.
double interpolate_cubic(const Grid& grid, std::span<const double> f,
                         double x);

} // namespace blowuplab
