#include "blowuplab/selfsim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace blowuplab {

Time RescaledFrame::physical_time() const {
  return omega - (Time)expl(-(long double)s);
}

double kappa(double p) {
  if (p <= 1.0) throw std::invalid_argument("kappa requires p > 1");
  return std::pow(p - 1.0, -1.0 / (p - 1.0));
}

double local_energy_of_kappa(double p, int dim) {
  const double k = kappa(p);
  return k * k * std::pow(4.0 * M_PI, 0.5 * dim) / (2.0 * (p + 1.0));
}

namespace {

// Integral of e^{-beta(1-c)} over the unit sphere S^{N-1}, c the cosine of
// the colatitude. Equals sigma_N at beta = 0.
double angular_gaussian(int dim, double beta) {
  const double sigma = unit_sphere_area(dim);
  if (beta <= 0.0) return sigma;
  if (dim == 1) return 1.0 + std::exp(-2.0 * beta);
  if (dim == 2) {
    if (beta < 600.0) return 2.0 * M_PI * std::exp(-beta) * std::cyl_bessel_i(0.0, beta);
    const double b = 1.0 / beta;
    return 2.0 * M_PI / std::sqrt(2.0 * M_PI * beta) *
           (1.0 + 0.125 * b + 9.0 / 128.0 * b * b);
  }
  if (dim == 3) return -0.5 * sigma * std::expm1(-2.0 * beta) / beta;
  // general N: substitute v = beta(1-c); the e^{-v} factor keeps the
  // quadrature window short for large beta.
  const double expo = 0.5 * (dim - 3);
  const double vmax = std::min(2.0 * beta, 60.0);
  const int n = 512;
  const double dv = vmax / n;
  double num = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = (i + 0.5) * dv;
    const double c = 1.0 - v / beta;
    num += std::exp(-v) * std::pow((1.0 - c) * (1.0 + c), expo);
  }
  num *= dv / beta;
  double den = 0.0;
  const int m = 512;
  const double dc = 2.0 / m;
  for (int i = 0; i < m; ++i) {
    const double c = -1.0 + (i + 0.5) * dc;
    den += std::pow(1.0 - c * c, expo);
  }
  den *= dc;
  return sigma * num / den;
}

// Per-node quadrature weights for int_{Omega_s} f(y) e^{-|y|^2/4} dy where
// f is sampled along the ray through the center. Centered radial frames use
// the exact shell weight; off-center frames integrate the Gaussian over each
// shell analytically in the polar angle.
std::vector<double> gaussian_weights(const RescaledFrame& frame) {
  const size_t n = frame.y.size();
  std::vector<double> wq(n, 0.0);
  const double dy = frame.y.size() > 1 ? frame.y[1] - frame.y[0] : 0.0;
  const auto& dom = frame.domain;
  const double lam = frame.lambda;
  if (dom.kind == DomainKind::interval) {
    for (size_t i = 0; i < n; ++i) {
      if (!frame.mask[i]) continue;
      wq[i] = frame.rho[i] * dy;
    }
    return wq;
  }
  // radial: physical radius r = a + lam*y must be >= 0; each shell of
  // radius s = r/lam in y-space carries weight s^{N-1} * G(beta) with
  // beta = a*r/(2 lam^2) from the angular Gaussian integral.
  const int N = dom.dim;
  for (size_t i = 0; i < n; ++i) {
    if (!frame.mask[i]) continue;
    const double r = frame.a + lam * frame.y[i];
    if (r < 0.0) continue;
    const double s = r / lam; // shell radius in y coordinates
    const double beta = frame.a * r / (2.0 * lam * lam);
    // e^{-(s^2 + (a/lam)^2)/4} absorbed into the kernel: the angular
    // integral of e^{-|y|^2/4} over the shell is
    // e^{-(s-a/lam)^2/4} ... recombined below via rho at the axis point.
    const double amp = std::exp(-0.25 * (frame.y[i] * frame.y[i]));
    wq[i] = std::pow(s, N - 1) * amp * angular_gaussian(N, beta) * dy;
  }
  return wq;
}

double masked_derivative(const RescaledFrame& f, size_t i) {
  const size_t n = f.y.size();
  const double dy = f.y[1] - f.y[0];
  const bool lo = i > 0 && f.mask[i - 1];
  const bool hi = i + 1 < n && f.mask[i + 1];
  if (lo && hi) return (f.w[i + 1] - f.w[i - 1]) / (2.0 * dy);
  if (hi) return (f.w[i + 1] - f.w[i]) / dy;
  if (lo) return (f.w[i] - f.w[i - 1]) / dy;
  return 0.0;
}

} // namespace

RescaledFrame rescale(const Trajectory& traj, double a, Time omega, double s,
                      const SelfsimConfig& cfg) {
  if (cfg.y_nodes < 4) throw std::invalid_argument("y_nodes too small");
  const long double delta = expl(-(long double)s);
  const Time t = omega - (Time)delta;
  const Grid& grid = traj.params.grid;
  RescaledFrame frame;
  frame.domain = grid.spec;
  frame.p = traj.params.p;
  frame.a = a;
  frame.omega = omega;
  frame.s = s;
  frame.lambda = (double)sqrtl(delta);
  frame.y_extent = cfg.y_extent;
  const std::vector<double> u = traj.field_at(t);
  const double scale = (double)powl(delta, (long double)(1.0 / (frame.p - 1.0)));
  const int n = cfg.y_nodes;
  frame.y.resize(n);
  frame.w.assign(n, 0.0);
  frame.rho.resize(n);
  frame.mask.assign(n, 0);
  const double dy = 2.0 * cfg.y_extent / (n - 1);
  const double lo = grid.spec.kind == DomainKind::radial_annulus
                        ? grid.spec.inner_radius
                        : (grid.spec.kind == DomainKind::radial_ball
                               ? -grid.spec.outer_radius
                               : grid.spec.inner_radius);
  const double hi = grid.spec.outer_radius;
  for (int i = 0; i < n; ++i) {
    const double y = -cfg.y_extent + i * dy;
    frame.y[i] = y;
    frame.rho[i] = std::exp(-0.25 * y * y);
    const double pos = a + frame.lambda * y;
    bool inside;
    if (grid.spec.kind == DomainKind::radial_annulus)
      inside = std::abs(pos) >= lo && std::abs(pos) <= hi;
    else
      inside = pos >= lo && pos <= hi;
    if (!inside) continue;
    frame.mask[i] = 1;
    const double rad = grid.spec.kind == DomainKind::interval ? pos : std::abs(pos);
    frame.w[i] = scale * interpolate_cubic(grid, u, rad);
  }
  return frame;
}

double local_energy(const RescaledFrame& frame) {
  const std::vector<double> wq = gaussian_weights(frame);
  const double p = frame.p;
  double E = 0.0;
  for (size_t i = 0; i < frame.y.size(); ++i) {
    if (!frame.mask[i]) continue;
    const double dw = masked_derivative(frame, i);
    const double w = frame.w[i];
    const double dens = 0.5 * dw * dw + w * w / (2.0 * (p - 1.0)) -
                        std::pow(std::abs(w), p + 1.0) / (p + 1.0);
    E += dens * wq[i];
  }
  return E;
}

LocalEnergySeries local_energy_series(const Trajectory& traj, double a,
                                      Time omega,
                                      std::span<const double> s_grid,
                                      const SelfsimConfig& cfg) {
  if (s_grid.size() < 2)
    throw std::invalid_argument("local energy series needs >= 2 samples");
  LocalEnergySeries out;
  std::vector<RescaledFrame> frames;
  frames.reserve(s_grid.size());
  for (double s : s_grid) frames.push_back(rescale(traj, a, omega, s, cfg));
  for (size_t k = 0; k < frames.size(); ++k) {
    const RescaledFrame& f = frames[k];
    LocalEnergyEntry e;
    e.s = f.s;
    e.E = local_energy(f);
    // w_s by centered differencing in s across neighbouring frames.
    const size_t ka = k == 0 ? 0 : k - 1;
    const size_t kb = k + 1 == frames.size() ? k : k + 1;
    const double dsab = frames[kb].s - frames[ka].s;
    const std::vector<double> wq = gaussian_weights(f);
    double ws2 = 0.0, decay = 0.0;
    for (size_t i = 0; i < f.y.size(); ++i) {
      if (!f.mask[i] || !frames[ka].mask[i] || !frames[kb].mask[i]) continue;
      const double ws = dsab > 0 ? (frames[kb].w[i] - frames[ka].w[i]) / dsab : 0.0;
      const double dw = masked_derivative(f, i);
      ws2 += ws * ws * wq[i];
      decay += (1.0 + f.y[i] * f.y[i]) * (ws * ws + dw * dw) * wq[i];
    }
    e.ws_norm = ws2;
    e.decay_integrand = decay;
    out.entries.push_back(e);
  }
  for (size_t k = 1; k < out.entries.size(); ++k) {
    const double jump = out.entries[k].E - out.entries[k - 1].E;
    out.max_positive_jump = std::max(out.max_positive_jump, jump);
  }
  return out;
}

NondegeneracyResult nondegeneracy_check(const Trajectory& traj, double a,
                                        Time omega, double tol) {
  if (traj.snapshots.empty())
    throw std::invalid_argument("nondegeneracy check needs snapshots");
  const Grid& grid = traj.params.grid;
  const double p = traj.params.p;
  const Time t_last = traj.snapshots.back().t;
  if (omega <= t_last)
    throw std::invalid_argument("omega must exceed the last snapshot time");
  const long double d_last = (long double)(omega - t_last);
  const long double d_first =
      std::min((long double)(omega - traj.snapshots.front().t), d_last * 1e6L);
  NondegeneracyResult res;
  const int samples = 40;
  const long double ratio = powl(d_first / d_last, 1.0L / (samples - 1));
  for (int k = 0; k < samples; ++k) {
    const long double delta = d_last * powl(ratio, (long double)(samples - 1 - k));
    const Time t = omega - (Time)delta;
    const std::vector<double> u = traj.field_at(t);
    const double win = 2.0 * (double)sqrtl(delta);
    double sup = 0.0;
    for (int i = 0; i < grid.node_count; ++i) {
      const double r = grid.nodes[i];
      const bool near = grid.spec.kind == DomainKind::interval
                            ? std::abs(r - a) <= win
                            : std::abs(r - std::abs(a)) <= win;
      if (near) sup = std::max(sup, std::abs(u[i]));
    }
    const double g = std::pow(win, 2.0 / (p - 1.0)) * sup;
    res.g.emplace_back((double)delta, g);
  }
  // tail value: median of the deepest samples
  std::vector<double> tail;
  for (size_t k = res.g.size() >= 5 ? res.g.size() - 5 : 0; k < res.g.size(); ++k)
    tail.push_back(res.g[k].second);
  std::sort(tail.begin(), tail.end());
  res.g_final = tail[tail.size() / 2];
  res.blowup_candidate = res.g_final > tol;
  return res;
}

namespace {

Trajectory make_synthetic(const ModelParams& params, Time omega,
                          double delta_start, double delta_end, double ds,
                          bool log_corrected) {
  if (delta_end <= 0 || delta_end >= delta_start)
    throw std::invalid_argument("need delta_start > delta_end > 0");
  params.validate();
  const double p = params.p;
  const double k = log_corrected ? 1.0 : kappa(p);
  const Grid& grid = params.grid;
  const double vol = grid.spec.volume();
  Trajectory traj;
  traj.params = params;
  traj.stop = StopReason::blowup_suspected;
  const double s0 = -std::log(delta_start);
  const double s1 = -std::log(delta_end);
  const int steps = std::max(2, (int)std::ceil((s1 - s0) / ds) + 1);
  auto amplitude = [&](long double delta) {
    double A = k * (double)powl(delta, (long double)(-1.0 / (p - 1.0)));
    if (log_corrected) A *= std::log(M_E / (double)delta);
    return A;
  };
  // cumulative dissipation of the flat profile, int |Omega| (du/dt)^2 dt
  // = |Omega| kappa^2 / ((p-1)(p+1)) * delta^{-(p+1)/(p-1)} + const
  const double dcoef = vol * k * k / ((p - 1.0) * (p + 1.0));
  const double dexp = (p + 1.0) / (p - 1.0);
  double d0 = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double s = s0 + (s1 - s0) * i / (steps - 1);
    const long double delta = expl(-(long double)s);
    const Time t = omega - (Time)delta;
    const double A = amplitude(delta);
    Snapshot snap;
    snap.t = t;
    snap.u.assign(grid.node_count, A);
    traj.snapshots.push_back(std::move(snap));
    LedgerEntry e;
    e.t = t;
    e.dt = 0;
    e.sup_norm = A;
    e.grad_sq = 0.0;
    e.pow_int = std::pow(A, p + 1.0) * vol;
    e.energy = -e.pow_int / (p + 1.0);
    const double d = dcoef * (double)powl(delta, (long double)(-dexp));
    if (i == 0) d0 = d;
    e.dissipation = log_corrected ? 0.0 : d - d0;
    traj.ledger.push_back(e);
  }
  return traj;
}

} // namespace

Trajectory make_flat_trajectory(const ModelParams& params, Time omega,
                                double delta_start, double delta_end,
                                double ds) {
  return make_synthetic(params, omega, delta_start, delta_end, ds, false);
}

Trajectory make_log_divergent_trajectory(const ModelParams& params, Time omega,
                                         double delta_start, double delta_end,
                                         double ds) {
  return make_synthetic(params, omega, delta_start, delta_end, ds, true);
}

} // namespace blowuplab
