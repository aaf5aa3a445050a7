#include "blowuplab/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "blowuplab/energy.hpp"

namespace blowuplab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Dormand-Prince 5(4) tableau.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double kB5[7] = {35.0 / 384,    0.0,        500.0 / 1113, 125.0 / 192,
                           -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr double kB4[7] = {5179.0 / 57600,    0.0,          7571.0 / 16695,
                           393.0 / 640,       -92097.0 / 339200,
                           187.0 / 2100,      1.0 / 40};

double sup_norm(std::span<const double> u) {
  double s = 0.0;
  for (double v : u) s = std::max(s, std::abs(v));
  return s;
}

double stability_cap(const SolverConfig& cfg, const ModelParams& params,
                     double sup) {
  double cap = kInf;
  if (params.diffusion_on) {
    const double h = params.grid.h;
    cap = std::min(cap, cfg.cfl_safety * h * h / 2.0);
  }
  if (params.reaction_on && sup > 0.0)
    cap = std::min(cap, cfg.reaction_safety * std::pow(sup, 1.0 - params.p));
  return cap;
}

} // namespace

void ModelParams::validate() const {
  if (!(p > 1.0)) throw std::invalid_argument("exponent p must be > 1");
  if (grid.node_count < 8) throw std::invalid_argument("params need a grid");
}

double ModelParams::kappa() const {
  return std::pow(p - 1.0, -1.0 / (p - 1.0));
}

double ModelParams::sobolev_critical() const {
  const int n = grid.spec.dim;
  if (n <= 2) return kInf;
  return double(n + 2) / double(n - 2);
}

double ModelParams::joseph_lundgren() const {
  const int n = grid.spec.dim;
  if (n <= 10) return kInf;
  return 1.0 + 4.0 / (n - 4.0 - 2.0 * std::sqrt(double(n - 1)));
}

std::string ModelParams::regime() const {
  const double ps = sobolev_critical();
  if (!std::isfinite(ps)) return "subcritical";
  if (std::abs(p - ps) <= 1e-12 * ps) return "critical";
  return p < ps ? "subcritical" : "supercritical";
}

void SolverConfig::validate() const {
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0))
    throw std::invalid_argument("cfl_safety must be in (0,1]");
  if (!(reaction_safety > 0.0 && reaction_safety <= 1.0))
    throw std::invalid_argument("reaction_safety must be in (0,1]");
  if (!(dt_min > 0.0L) || !(t_max > 0.0L) || !(rk_tolerance > 0.0) ||
      !(u_max > 0.0) || snapshot_stride <= 0 || !(snapshot_s_spacing > 0.0))
    throw std::invalid_argument("solver config fields must be positive");
  if (u_max < 1e6)
    throw std::invalid_argument("u_max must be at least 1e6");
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::blowup_suspected: return "blowup_suspected";
    case StopReason::horizon_reached: return "horizon_reached";
    case StopReason::decayed_to_zero: return "decayed_to_zero";
    case StopReason::step_underflow: return "step_underflow";
    case StopReason::running: return "running";
  }
  throw std::logic_error("unknown StopReason");
}

void pde_rhs(const ModelParams& params, std::span<const double> u,
             std::span<double> out) {
  const int m = params.grid.node_count;
  if (params.diffusion_on) {
    laplacian(params.grid, u, out);
  } else {
    std::fill(out.begin(), out.end(), 0.0);
  }
  if (params.reaction_on) {
    const double q = params.p - 1.0;
    for (int i = 0; i < m; ++i)
      out[i] += std::pow(std::abs(u[i]), q) * u[i];
  }
  if (params.diffusion_on) {
    for (int i = 0; i < m; ++i)
      if (params.grid.dirichlet[i]) out[i] = 0.0;
  }
}

StepResult step(std::span<const double> state, Time t, const SolverConfig& cfg,
                const ModelParams& params, Time dt_hint) {
  const int m = params.grid.node_count;
  StepResult res;
  res.u_t.resize(m);

  const double sup = sup_norm(state);
  const double cap = stability_cap(cfg, params, sup);
  Time dt = dt_hint > 0.0L ? std::min<Time>(dt_hint, cap) : Time(cap);
  if (!std::isfinite(double(dt))) dt = 0.01L; // no cap active (e.g. u == 0)

  std::vector<std::vector<double>> k(7, std::vector<double>(m));
  std::vector<double> y(m), y5(m), y4(m);
  pde_rhs(params, state, k[0]);
  res.u_t = k[0];

  const double rtol = cfg.rk_tolerance;
  for (int attempt = 0; attempt < 64; ++attempt) {
    if (dt < cfg.dt_min) {
      res.underflow = true;
      res.dt_used = dt;
      return res;
    }
    const double hdt = double(dt);
    for (int s = 1; s < 7; ++s) {
      for (int i = 0; i < m; ++i) {
        double acc = 0.0;
        for (int j = 0; j < s; ++j) acc += kA[s][j] * k[j][i];
        y[i] = state[i] + hdt * acc;
      }
      pde_rhs(params, y, k[s]);
    }
    double err_sq = 0.0;
    for (int i = 0; i < m; ++i) {
      double acc5 = 0.0, acc4 = 0.0;
      for (int s = 0; s < 7; ++s) {
        acc5 += kB5[s] * k[s][i];
        acc4 += kB4[s] * k[s][i];
      }
      y5[i] = state[i] + hdt * acc5;
      y4[i] = state[i] + hdt * acc4;
      const double sc =
          rtol + rtol * std::max(std::abs(state[i]), std::abs(y5[i]));
      const double e = (y5[i] - y4[i]) / sc;
      err_sq += e * e;
    }
    const double err = std::sqrt(err_sq / m);
    if (err <= 1.0) {
      res.state = y5;
      res.dt_used = dt;
      double d_inc = 0.0;
      for (int s = 0; s < 7; ++s) {
        if (kB5[s] == 0.0) continue;
        std::vector<double> ksq(m);
        for (int i = 0; i < m; ++i) ksq[i] = k[s][i] * k[s][i];
        d_inc += kB5[s] * integrate(params.grid, ksq);
      }
      res.dissipation_increment = hdt * d_inc;
      const double grow =
          std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
      res.dt_next = std::min<Time>(dt * grow, cap);
      return res;
    }
    dt *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.5);
  }
  res.underflow = true;
  res.dt_used = dt;
  return res;
}

namespace {

LedgerEntry make_entry(const ModelParams& params, std::span<const double> u,
                       Time t, Time dt, double dissipation) {
  LedgerEntry e;
  e.t = t;
  e.dt = dt;
  e.sup_norm = sup_norm(u);
  e.grad_sq = grad_sq_integral(params.grid, u);
  std::vector<double> up(u.size());
  const double q = params.p + 1.0;
  for (size_t i = 0; i < u.size(); ++i) up[i] = std::pow(std::abs(u[i]), q);
  e.pow_int = integrate(params.grid, up);
  e.energy = (params.diffusion_on ? 0.5 * e.grad_sq : 0.0) -
             (params.reaction_on ? e.pow_int / q : 0.0);
  e.dissipation = dissipation;
  return e;
}

// Flat-solution extrapolation of the remaining life time.
Time provisional_remaining(const ModelParams& params, double sup) {
  if (!params.reaction_on || sup <= 0.0) return Time(kInf);
  return Time(std::pow(sup, 1.0 - params.p) / (params.p - 1.0));
}

void integrate_loop(Trajectory& traj, std::vector<double> state, Time t,
                    double dissipation) {
  const ModelParams& params = traj.params;
  const SolverConfig& cfg = traj.cfg;
  const double sup0 = std::max(traj.initial_sup(), sup_norm(state));
  const double decay_floor = cfg.decay_threshold * std::max(1.0, sup0);

  Time dt_hint = 0;
  int steps_since_snapshot = 0;
  Time last_snapshot_t = traj.snapshots.empty() ? t : traj.snapshots.back().t;
  double prev_sup = sup_norm(state);

  auto store_snapshot = [&](Time at) {
    if (!cfg.store_snapshots) return;
    traj.snapshots.push_back({at, state});
    last_snapshot_t = at;
    steps_since_snapshot = 0;
  };

  if (traj.snapshots.empty() && traj.ledger.empty()) {
    traj.ledger.push_back(make_entry(params, state, t, 0, dissipation));
    store_snapshot(t);
  }

  while (true) {
    const double sup = sup_norm(state);
    if (sup >= cfg.u_max) {
      traj.stop = StopReason::blowup_suspected;
      break;
    }
    if (sup <= decay_floor) {
      traj.stop = StopReason::decayed_to_zero;
      break;
    }
    if (cfg.early_decay_factor > 0.0 && sup <= cfg.early_decay_factor * sup0 &&
        t > 0.0L) {
      traj.stop = StopReason::decayed_to_zero;
      break;
    }
    if (t >= cfg.t_max) {
      traj.stop = StopReason::horizon_reached;
      break;
    }

    Time dt_request = dt_hint;
    if (dt_request > cfg.t_max - t || dt_request <= 0.0L)
      dt_request = std::min<Time>(dt_hint > 0.0L ? dt_hint : Time(kInf),
                                  cfg.t_max - t);
    StepResult r = step(state, t, cfg, params, dt_request);
    if (r.underflow) {
      traj.stop = (sup > prev_sup || sup > 10.0 * sup0)
                      ? StopReason::blowup_suspected
                      : StopReason::step_underflow;
      break;
    }
    // The reaction cap can shrink the step below the resolution of t
    // itself; past that point time no longer advances, which only happens
    // when the amplitude explodes. Stop while omega - t is still
    // representable.
    if (t + r.dt_used == t) {
      traj.stop = StopReason::blowup_suspected;
      break;
    }
    prev_sup = sup;
    state = std::move(r.state);
    t += r.dt_used;
    dissipation += r.dissipation_increment;
    dt_hint = r.dt_next;
    traj.ledger.push_back(
        make_entry(params, state, t, r.dt_used, dissipation));
    ++steps_since_snapshot;

    bool want_snapshot = steps_since_snapshot >= cfg.snapshot_stride;
    const Time rem = provisional_remaining(params, sup_norm(state));
    if (!want_snapshot && std::isfinite(double(rem))) {
      const Time omega_prov = t + rem;
      const Time since = omega_prov - last_snapshot_t;
      if (since > rem &&
          double(since / rem) > std::exp(cfg.snapshot_s_spacing))
        want_snapshot = true;
    }
    if (want_snapshot) store_snapshot(t);
  }
  if (cfg.store_snapshots &&
      (traj.snapshots.empty() || traj.snapshots.back().t != t))
    traj.snapshots.push_back({t, state});
}

} // namespace

Trajectory run(std::span<const double> u0, const SolverConfig& cfg,
               const ModelParams& params) {
  params.validate();
  cfg.validate();
  std::vector<double> state(u0.begin(), u0.end());
  if (params.diffusion_on) {
    for (int i = 0; i < params.grid.node_count; ++i)
      if (params.grid.dirichlet[i]) state[i] = 0.0;
  }
  Trajectory traj;
  traj.params = params;
  traj.cfg = cfg;
  integrate_loop(traj, std::move(state), 0, 0.0);
  return traj;
}

void run_continue(Trajectory& traj, std::span<const double> state, Time t,
                  double dissipation) {
  traj.stop = StopReason::running;
  integrate_loop(traj, std::vector<double>(state.begin(), state.end()), t,
                 dissipation);
}

std::vector<double> Trajectory::field_at(Time t) const {
  if (snapshots.empty()) throw std::out_of_range("trajectory has no snapshots");
  if (t < snapshots.front().t || t > snapshots.back().t)
    throw std::out_of_range("time outside snapshot coverage");
  auto it = std::lower_bound(
      snapshots.begin(), snapshots.end(), t,
      [](const Snapshot& s, Time tt) { return s.t < tt; });
  if (it == snapshots.begin()) return it->u;
  const Snapshot& hi = *it;
  const Snapshot& lo = *(it - 1);
  if (hi.t == lo.t) return hi.u;
  const double w = double((t - lo.t) / (hi.t - lo.t));
  std::vector<double> out(lo.u.size());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = (1.0 - w) * lo.u[i] + w * hi.u[i];
  return out;
}

OmegaEstimate estimate_omega(const Trajectory& traj) {
  if (traj.stop != StopReason::blowup_suspected)
    throw std::runtime_error("omega estimate requires a blowup trajectory");
  const double p = traj.params.p;
  const double sup0 = traj.initial_sup();

  struct Pt {
    Time t;
    double y;
  };
  std::vector<Pt> pts;
  for (const LedgerEntry& e : traj.ledger) {
    if (e.sup_norm < 10.0 * std::max(sup0, 1e-300)) continue;
    const Pt pt{e.t, std::pow(e.sup_norm, -(p - 1.0))};
    // Near blowup the step can drop below the time resolution, leaving runs
    // of entries at one represented t; keep only the deepest of each.
    if (!pts.empty() && pts.back().t == pt.t)
      pts.back() = pt;
    else
      pts.push_back(pt);
  }
  if (pts.size() < 20)
    throw std::runtime_error("insufficient data window for omega fit");

  // Final growth window: last two decades of y, at least 20 points.
  const double y_last = pts.back().y;
  size_t begin = pts.size();
  while (begin > 0 && pts[begin - 1].y <= 100.0 * y_last) --begin;
  if (pts.size() - begin < 20) begin = pts.size() - 20;

  // Weighted least squares y = alpha + beta (t - t_ref), weights 1/y^2 so
  // the intercept is accurate relative to the deepest resolved decade.
  const Time t_ref = pts.back().t;
  long double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (size_t i = begin; i < pts.size(); ++i) {
    const long double w = 1.0L / ((long double)pts[i].y * (long double)pts[i].y);
    const long double x = pts[i].t - t_ref;
    sw += w;
    swx += w * x;
    swy += w * pts[i].y;
    swxx += w * x * x;
    swxy += w * x * pts[i].y;
  }
  const long double det = sw * swxx - swx * swx;
  if (det == 0.0L) throw std::runtime_error("degenerate omega fit window");
  const long double alpha = (swxx * swy - swx * swxy) / det;
  const long double beta = (sw * swxy - swx * swy) / det;

  OmegaEstimate est;
  // Pointwise relative residual of the line; curvature in the rate shows
  // up here rather than in the depth-weighted least-squares residual.
  double res_rel = 0.0;
  for (size_t i = begin; i < pts.size(); ++i) {
    const long double r = pts[i].y - (alpha + beta * (pts[i].t - t_ref));
    res_rel = std::max(
        res_rel, std::abs(double(r)) / std::max(pts[i].y, y_last));
  }

  const LedgerEntry& last = traj.ledger.back();
  est.fallback_omega =
      last.t + Time(std::pow(last.sup_norm, 1.0 - p) / (p - 1.0));
  if (beta < 0.0L) {
    est.fit_omega = t_ref - alpha / beta;
    // For a genuine algebraic rate the fitted intercept agrees with the
    // amplitude extrapolation; disagreement means the rate ansatz fails.
    const double rem_fit = double(est.fit_omega - t_ref);
    const double rem_fb = double(est.fallback_omega - t_ref);
    const double consistency =
        std::abs(rem_fit - rem_fb) / std::max(rem_fit, 1e-300);
    est.fit_quality = std::max(res_rel, consistency);
    est.uncertainty =
        Time(res_rel * double(y_last) / std::abs(double(beta))) +
        Time(std::abs(double(alpha / beta))) * Time(res_rel);
  } else {
    est.fit_omega = est.fallback_omega;
    est.fit_quality = 1.0;
  }
  est.fallback = est.fit_quality > 0.1;
  est.omega = est.fallback ? est.fallback_omega : est.fit_omega;
  if (est.uncertainty <= 0.0L)
    est.uncertainty = Time(1e-3) * (est.omega - last.t);
  return est;
}

} // namespace blowuplab
