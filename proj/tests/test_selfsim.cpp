#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <blowuplab/selfsim.hpp>

#include <cmath>
#include <vector>

using namespace blowuplab;

namespace {

ModelParams make_params(DomainKind kind, int dim, double p, int nodes,
                        double R0 = 0.0, double R = 1.0) {
  ModelParams mp;
  mp.p = p;
  DomainSpec d;
  d.kind = kind;
  d.dim = dim;
  d.inner_radius = R0;
  d.outer_radius = R;
  mp.grid = build_grid(d, nodes);
  return mp;
}

} // namespace

TEST_CASE("kappa and the constant-profile energy") {
  CHECK(kappa(2.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(kappa(3.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  for (double p : {1.5, 2.0, 3.0, 5.0, 7.0}) {
    const double k = kappa(p);
    // fixed point of the rescaled reaction: k^p = k/(p-1)
    CHECK(std::pow(k, p) == doctest::Approx(k / (p - 1.0)).epsilon(1e-12));
  }
  // p=3, N=1: kappa^2 sqrt(4 pi) / 8
  CHECK(local_energy_of_kappa(3.0, 1) ==
        doctest::Approx(0.5 * std::sqrt(4.0 * M_PI) / 8.0).epsilon(1e-12));
  CHECK(local_energy_of_kappa(3.0, 1) == doctest::Approx(0.2216).epsilon(2e-3));
}

TEST_CASE("rescaled frame of the flat solution is the constant kappa") {
  ModelParams mp = make_params(DomainKind::interval, 1, 3.0, 201);
  Trajectory traj = make_flat_trajectory(mp, 1.0L, 0.5, 1e-12, 0.05);
  RescaledFrame fr = rescale(traj, 0.5, 1.0L, 5.0);
  CHECK(fr.lambda == doctest::Approx(std::exp(-2.5)).epsilon(1e-12));
  CHECK((double)fr.physical_time() ==
        doctest::Approx(1.0 - std::exp(-5.0)).epsilon(1e-14));
  const double k = kappa(3.0);
  bool any_masked = false;
  for (size_t i = 0; i < fr.y.size(); ++i) {
    CHECK(fr.rho[i] ==
          doctest::Approx(std::exp(-fr.y[i] * fr.y[i] / 4.0)).epsilon(1e-12));
    if (!fr.mask[i]) continue;
    any_masked = true;
    CHECK(std::abs(fr.w[i] - k) / k < 1e-2); // snapshot interpolation error
  }
  CHECK(any_masked);
}

TEST_CASE("local energy of the flat solution matches the closed form") {
  // interval, centered
  ModelParams mp = make_params(DomainKind::interval, 1, 3.0, 201);
  Trajectory traj = make_flat_trajectory(mp, 1.0L, 0.5, 1e-12, 0.05);
  const double want1 = local_energy_of_kappa(3.0, 1);
  RescaledFrame fr = rescale(traj, 0.5, 1.0L, 10.0);
  CHECK(std::abs(local_energy(fr) - want1) / want1 < 0.02);

  // ball in R^3, centered: exercises the radial Gaussian kernel
  ModelParams mb = make_params(DomainKind::radial_ball, 3, 7.0, 201);
  Trajectory tb = make_flat_trajectory(mb, 1.0L, 0.5, 1e-12, 0.05);
  const double want3 = local_energy_of_kappa(7.0, 3);
  RescaledFrame fb = rescale(tb, 0.0, 1.0L, 12.0);
  CHECK(std::abs(local_energy(fb) - want3) / want3 < 0.02);

  // ball in R^3, off-center: exercises the angular kernel
  RescaledFrame fo = rescale(tb, 0.5, 1.0L, 12.0);
  CHECK(std::abs(local_energy(fo) - want3) / want3 < 0.02);
}

TEST_CASE("weight truncation is converged at the default extent") {
  ModelParams mp = make_params(DomainKind::interval, 1, 3.0, 201);
  Trajectory traj = make_flat_trajectory(mp, 1.0L, 0.5, 1e-12, 0.05);
  SelfsimConfig wide;
  wide.y_extent = 12.0;
  wide.y_nodes = 385;
  const double e8 = local_energy(rescale(traj, 0.5, 1.0L, 14.0));
  const double e12 = local_energy(rescale(traj, 0.5, 1.0L, 14.0, wide));
  CHECK(std::abs(e12 - e8) < 1e-4 * (1.0 + std::abs(e8)));
}

TEST_CASE("local energy series of the flat solution is constant") {
  ModelParams mp = make_params(DomainKind::interval, 1, 3.0, 201);
  Trajectory traj = make_flat_trajectory(mp, 1.0L, 0.5, 1e-12, 0.05);
  std::vector<double> s_grid;
  for (double s = 4.0; s <= 20.0; s += 0.5) s_grid.push_back(s);
  LocalEnergySeries ser = local_energy_series(traj, 0.5, 1.0L, s_grid);
  REQUIRE(ser.entries.size() == s_grid.size());
  const double E0 = ser.entries.front().E;
  for (const LocalEnergyEntry& e : ser.entries) {
    CHECK(std::abs(e.E - E0) < 0.02 * (1.0 + std::abs(E0)));
    CHECK(e.ws_norm < 1e-2);
  }
  CHECK(ser.max_positive_jump < 1e-2 * (1.0 + std::abs(E0)));
}

TEST_CASE("nondegeneracy check flags the flat blowup and clears decay") {
  ModelParams mp = make_params(DomainKind::interval, 1, 3.0, 201);
  Trajectory traj = make_flat_trajectory(mp, 1.0L, 0.5, 1e-12, 0.05);
  NondegeneracyResult res = nondegeneracy_check(traj, 0.5, 1.0L);
  CHECK(res.blowup_candidate);
  CHECK(res.g_final > 0.05);
  REQUIRE(!res.g.empty());

  // shrink the field far from the center: g decays at an off-center point
  Trajectory damped = traj;
  for (Snapshot& s : damped.snapshots)
    for (size_t i = 0; i < s.u.size(); ++i) {
      const double d = std::abs(damped.params.grid.nodes[i] - 0.5);
      if (d > 0.05) s.u[i] = 0.0;
    }
  NondegeneracyResult off = nondegeneracy_check(damped, 0.15, 1.0L);
  CHECK_FALSE(off.blowup_candidate);
  CHECK(off.g_final < 0.05);
}

TEST_CASE("synthetic trajectories carry consistent ledgers") {
  ModelParams mp = make_params(DomainKind::interval, 1, 3.0, 101);
  Trajectory traj = make_flat_trajectory(mp, 1.0L, 0.5, 1e-10, 0.1);
  CHECK(traj.stop == StopReason::blowup_suspected);
  const double k = kappa(3.0);
  for (const LedgerEntry& e : traj.ledger) {
    const double delta = (double)(1.0L - e.t);
    // delta recovered from 1 - t, so precision is limited near blowup
    CHECK(e.sup_norm ==
          doctest::Approx(k / std::sqrt(delta)).epsilon(1e-6));
  }
  for (size_t i = 0; i + 1 < traj.snapshots.size(); ++i)
    CHECK((double)traj.snapshots[i + 1].t > (double)traj.snapshots[i].t);

  Trajectory lg = make_log_divergent_trajectory(mp, 1.0L, 0.5, 1e-8, 0.1);
  CHECK(lg.stop == StopReason::blowup_suspected);
  for (const LedgerEntry& e : lg.ledger) {
    const double delta = (double)(1.0L - e.t);
    const double want =
        std::pow(delta, -0.5) * std::log(M_E / delta);
    CHECK(e.sup_norm == doctest::Approx(want).epsilon(1e-8));
  }
}
