#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <blowuplab/integrator.hpp>
#include <blowuplab/selfsim.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace blowuplab;

namespace {

ModelParams interval_params(double p, int nodes) {
  ModelParams mp;
  mp.p = p;
  DomainSpec dom;
  dom.kind = DomainKind::interval;
  dom.outer_radius = 1.0;
  mp.grid = build_grid(dom, nodes);
  return mp;
}

std::vector<double> bump(const Grid& g, double A, double w, double c) {
  std::vector<double> u(g.nodes.size());
  for (size_t i = 0; i < u.size(); ++i) {
    const double z = (g.nodes[i] - c) / w;
    u[i] = A * std::exp(-0.5 * z * z);
    if (g.dirichlet[i]) u[i] = 0.0;
  }
  return u;
}

} // namespace

TEST_CASE("model constants and regime classification") {
  ModelParams mp = interval_params(3.0, 9);
  CHECK(mp.kappa() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(mp.regime() == "subcritical"); // N = 1: p_S infinite
  DomainSpec b;
  b.kind = DomainKind::radial_ball;
  b.dim = 3;
  ModelParams mb;
  mb.grid = build_grid(b, 9);
  mb.p = 5.0;
  CHECK(mb.sobolev_critical() == doctest::Approx(5.0));
  CHECK(mb.regime() == "critical");
  mb.p = 7.0;
  CHECK(mb.regime() == "supercritical");
  mb.p = 2.0;
  CHECK(mb.regime() == "subcritical");

  ModelParams bad = interval_params(1.0, 9);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  SolverConfig weak;
  weak.u_max = 1e5; // too small to resolve the asymptotic regime
  CHECK_THROWS_AS(weak.validate(), std::invalid_argument);
}

TEST_CASE("reaction-only dynamics tracks the exact amplitude equation") {
  // u' = u^p, u(0) = A: u(t) = A (1 - (p-1) A^{p-1} t)^{-1/(p-1)},
  // blowup at omega = A^{1-p}/(p-1)
  ModelParams mp = interval_params(3.0, 16);
  mp.diffusion_on = false;
  std::vector<double> u0(16, 1.0);
  SolverConfig cfg;
  Trajectory traj = run(u0, cfg, mp);
  REQUIRE(traj.stop == StopReason::blowup_suspected);
  const long double omega = 0.5L;
  CHECK(std::abs((double)(omega - traj.final_time())) / (double)omega < 0.01);
  // each entry implies omega = t + sup^{1-p}/(p-1); the implied value must
  // hold uniformly, which pins the amplitude law itself
  for (const LedgerEntry& e : traj.ledger) {
    const long double implied =
        e.t + (long double)std::pow(e.sup_norm, -2.0) / 2.0L;
    CHECK(std::abs((double)(implied - omega)) < 1e-6);
  }
  OmegaEstimate est = estimate_omega(traj);
  CHECK_FALSE(est.fallback);
  CHECK(std::abs((double)(est.omega - omega)) / (double)omega < 0.005);

  // p = 2, A = 2: omega = 1/A = 0.5
  ModelParams mp2 = interval_params(2.0, 16);
  mp2.diffusion_on = false;
  std::vector<double> u2(16, 2.0);
  Trajectory t2 = run(u2, cfg, mp2);
  REQUIRE(t2.stop == StopReason::blowup_suspected);
  OmegaEstimate e2 = estimate_omega(t2);
  CHECK(std::abs((double)(e2.omega - 0.5L)) / 0.5 < 0.005);
}

TEST_CASE("synthetic log-corrected growth rejects the algebraic-rate fit") {
  ModelParams mp = interval_params(3.0, 16);
  Trajectory traj = make_log_divergent_trajectory(mp, 1.0L, 0.5, 1e-8, 0.05);
  OmegaEstimate est = estimate_omega(traj);
  CHECK(est.fallback);
  CHECK(est.fit_quality > 0.1);
  CHECK(est.omega == est.fallback_omega);
  CHECK(est.omega > traj.final_time());
}

TEST_CASE("pure diffusion damps the fundamental mode at the exact rate") {
  ModelParams mp = interval_params(3.0, 201);
  mp.reaction_on = false;
  std::vector<double> u0(mp.grid.nodes.size());
  for (size_t i = 0; i < u0.size(); ++i)
    u0[i] = std::sin(M_PI * mp.grid.nodes[i]);
  u0.front() = u0.back() = 0.0;
  SolverConfig cfg;
  cfg.t_max = 0.1L;
  Trajectory traj = run(u0, cfg, mp);
  REQUIRE(traj.stop == StopReason::horizon_reached);
  const double want = std::exp(-M_PI * M_PI * 0.1);
  CHECK(std::abs(traj.final_sup() - want) / want < 1e-3);
}

TEST_CASE("step-size caps are respected along a blowup trajectory") {
  ModelParams mp = interval_params(3.0, 101);
  SolverConfig cfg;
  Trajectory traj = run(bump(mp.grid, 10.0, 0.2, 0.5), cfg, mp);
  REQUIRE(traj.stop == StopReason::blowup_suspected);
  const double cap_cfl = cfg.cfl_safety * mp.grid.h * mp.grid.h / 2.0;
  // entry i+1 records the step taken from entry i, capped by the state there
  for (size_t i = 0; i + 1 < traj.ledger.size(); ++i) {
    const double dt = (double)traj.ledger[i + 1].dt;
    CHECK(dt <= cap_cfl * (1.0 + 1e-12));
    const double cap_rx =
        cfg.reaction_safety * std::pow(traj.ledger[i].sup_norm, 1.0 - mp.p);
    CHECK(dt <= cap_rx * (1.0 + 1e-12));
    CHECK((double)traj.ledger[i + 1].t > (double)traj.ledger[i].t);
    CHECK((double)(traj.ledger[i].t + traj.ledger[i + 1].dt) ==
          doctest::Approx((double)traj.ledger[i + 1].t).epsilon(1e-12));
  }
}

TEST_CASE("nonnegative data stays nonnegative") {
  ModelParams mp = interval_params(3.0, 101);
  SolverConfig cfg;
  cfg.t_max = 0.05L;
  Trajectory traj = run(bump(mp.grid, 1.0, 0.15, 0.5), cfg, mp);
  for (const Snapshot& s : traj.snapshots)
    for (double v : s.u) CHECK(v >= -1e-7);
}

TEST_CASE("snapshot cadence and field interpolation") {
  ModelParams mp = interval_params(3.0, 101);
  SolverConfig cfg;
  Trajectory traj = run(bump(mp.grid, 10.0, 0.2, 0.5), cfg, mp);
  REQUIRE(traj.snapshots.size() > 4);
  for (size_t i = 0; i + 1 < traj.snapshots.size(); ++i)
    CHECK((double)traj.snapshots[i + 1].t > (double)traj.snapshots[i].t);
  CHECK((double)traj.snapshots.back().t ==
        doctest::Approx((double)traj.final_time()));
  // interpolation is exact at snapshot times, defined between them
  const Snapshot& mid = traj.snapshots[traj.snapshots.size() / 2];
  std::vector<double> v = traj.field_at(mid.t);
  for (size_t i = 0; i < v.size(); ++i)
    CHECK(v[i] == doctest::Approx(mid.u[i]).epsilon(1e-14));
  CHECK_THROWS_AS(traj.field_at(traj.final_time() + 1.0L),
                  std::out_of_range);
  CHECK_THROWS_AS(traj.field_at(-1.0L), std::out_of_range);
}

TEST_CASE("zero data reports immediate decay") {
  ModelParams mp = interval_params(3.0, 33);
  std::vector<double> u0(33, 0.0);
  SolverConfig cfg;
  Trajectory traj = run(u0, cfg, mp);
  CHECK(traj.stop == StopReason::decayed_to_zero);
}

TEST_CASE("resumed run continues without a time gap") {
  ModelParams mp = interval_params(3.0, 101);
  mp.reaction_on = false;
  std::vector<double> u0(mp.grid.nodes.size());
  for (size_t i = 0; i < u0.size(); ++i)
    u0[i] = std::sin(M_PI * mp.grid.nodes[i]);
  u0.front() = u0.back() = 0.0;
  SolverConfig cfg;
  cfg.t_max = 0.02L;
  Trajectory traj = run(u0, cfg, mp);
  REQUIRE(traj.stop == StopReason::horizon_reached);
  const size_t n0 = traj.ledger.size();
  const Time t0 = traj.final_time();
  traj.cfg.t_max = 0.04L;
  run_continue(traj, traj.snapshots.back().u, traj.snapshots.back().t,
               traj.ledger.back().dissipation);
  CHECK(traj.stop == StopReason::horizon_reached);
  CHECK(traj.ledger.size() > n0);
  CHECK((double)traj.ledger[n0].t >= (double)t0);
  for (size_t i = n0; i + 1 < traj.ledger.size(); ++i)
    CHECK((double)traj.ledger[i + 1].t > (double)traj.ledger[i].t);
  const double want = std::exp(-M_PI * M_PI * 0.04);
  CHECK(std::abs(traj.final_sup() - want) / want < 1e-3);
}

TEST_CASE("early decay cutoff stops clearly subcritical runs") {
  ModelParams mp = interval_params(3.0, 101);
  SolverConfig cfg;
  cfg.early_decay_factor = 1e-2;
  cfg.t_max = 10.0L;
  Trajectory traj = run(bump(mp.grid, 0.1, 0.2, 0.5), cfg, mp);
  CHECK(traj.stop == StopReason::decayed_to_zero);
  CHECK((double)traj.final_time() < 10.0);
}
