#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "blowuplab/mesh.hpp"

namespace blowuplab {

/// Simulation time. Blowup trajectories resolve omega - t down to many
/// orders of magnitude below t itself, which exceeds what plain doubles
/// can represent; time is therefore accumulated in extended precision.
using Time = long double;

struct ModelParams {
  double p = 3.0; // nonlinear exponent, > 1
  Grid grid;
  bool reaction_on = true;
  bool diffusion_on = true;

  void validate() const;
  double kappa() const; // (p-1)^{-1/(p-1)}
  double sobolev_critical() const;  // p_S = (N+2)/(N-2), +inf for N <= 2
  double joseph_lundgren() const;   // p_JL, +inf for N <= 10
  std::string regime() const;       // subcritical / critical / supercritical
};

struct SolverConfig {
  double cfl_safety = 0.4;      // dt <= cfl_safety * h^2 / 2
  double reaction_safety = 0.1; // dt <= reaction_safety * |u|_inf^{1-p}
  Time dt_min = 1e-300L;
  double u_max = 1e8;           // amplitude declaring numerical blowup
  Time t_max = 10.0L;
  int snapshot_stride = 200;    // steps between stored snapshots (early phase)
  double snapshot_s_spacing = 0.1; // max spacing in s = -log(omega - t)
  double rk_tolerance = 1e-8;
  bool store_snapshots = true;
  double decay_threshold = 1e-13; // |u|_inf below this (relative) => decayed
  double early_decay_factor = 0.0; // >0: stop once |u|_inf <= factor*|u0|_inf

  void validate() const;
};

enum class StopReason {
  blowup_suspected,
  horizon_reached,
  decayed_to_zero,
  step_underflow,
  running // internal: not yet stopped
};

std::string to_string(StopReason reason);

struct LedgerEntry {
  Time t = 0;
  Time dt = 0;          // step that advanced to t (0 for the initial entry)
  double sup_norm = 0;
  double energy = 0;    // E(u(t)), consistent with enabled terms
  double dissipation = 0; // cumulative int_0^t int u_t^2
  double grad_sq = 0;   // int |grad u|^2
  double pow_int = 0;   // int |u|^{p+1}
};

struct Snapshot {
  Time t = 0;
  std::vector<double> u;
};

struct Trajectory {
  ModelParams params;
  SolverConfig cfg;
  std::vector<Snapshot> snapshots;
  std::vector<LedgerEntry> ledger;
  StopReason stop = StopReason::running;

  double initial_sup() const {
    return ledger.empty() ? 0.0 : ledger.front().sup_norm;
  }
  double final_sup() const {
    return ledger.empty() ? 0.0 : ledger.back().sup_norm;
  }
  Time final_time() const { return ledger.empty() ? 0 : ledger.back().t; }

  /// Field at time t by linear interpolation between bracketing snapshots.
  std::vector<double> field_at(Time t) const;
};

struct StepResult {
  std::vector<double> state;
  Time dt_used = 0;
  std::vector<double> u_t;       // stage-based du/dt at the step start
  double dissipation_increment = 0; // int_t^{t+dt} int u_t^2, RK quadrature
  bool underflow = false;
  Time dt_next = 0;              // error-controller suggestion
};

/// Right-hand side du/dt = [Delta u] + [|u|^{p-1} u] per enabled terms.
void pde_rhs(const ModelParams& params, std::span<const double> u,
             std::span<double> out);

/// One accepted embedded Dormand-Prince 5(4) step with blowup-adapted caps.
StepResult step(std::span<const double> state, Time t, const SolverConfig& cfg,
                const ModelParams& params, Time dt_hint = 0);

Trajectory run(std::span<const double> u0, const SolverConfig& cfg,
               const ModelParams& params);

/// Continue a trajectory in place from its last snapshot (checkpoint resume).
void run_continue(Trajectory& traj, std::span<const double> state, Time t,
                  double dissipation);

struct OmegaEstimate {
  Time omega = 0;
  double fit_quality = 0; // residual / rate-consistency defect of the fit
  bool fallback = false;  // true when the fit was rejected (Type II suspected)
  Time fit_omega = 0;     // raw fit intercept
  Time fallback_omega = 0;
  Time uncertainty = 0;   // residual-propagated intercept uncertainty
};

/// Inverts |u|_inf ~ C (omega - t)^{-1/(p-1)} by a weighted least-squares
/// line through |u|_inf^{-(p-1)} vs t over the final growth window.
OmegaEstimate estimate_omega(const Trajectory& traj);

} // namespace blowuplab
