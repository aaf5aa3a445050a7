#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <blowuplab/energy.hpp>
#include <blowuplab/integrator.hpp>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

using namespace blowuplab;

namespace {

Grid unit_interval(int nodes) {
  DomainSpec d;
  d.kind = DomainKind::interval;
  d.outer_radius = 1.0;
  return build_grid(d, nodes);
}

std::vector<double> sine_mode(const Grid& g) {
  std::vector<double> u(g.nodes.size());
  for (size_t i = 0; i < u.size(); ++i) u[i] = std::sin(M_PI * g.nodes[i]);
  u.front() = u.back() = 0.0;
  return u;
}

} // namespace

TEST_CASE("energy of the fundamental mode") {
  // E(sin(pi x), p=3) = pi^2/4 - 1/4 * 3/8 = pi^2/4 - 3/32
  Grid g = unit_interval(201);
  const double want = M_PI * M_PI / 4.0 - 3.0 / 32.0;
  CHECK(std::abs(energy(g, sine_mode(g), 3.0) - want) < 1e-3);
}

TEST_CASE("energy scaling homogeneity") {
  Grid g = unit_interval(101);
  std::vector<double> f = sine_mode(g);
  const double A = 0.5 * grad_sq_integral(g, f);
  std::vector<double> f4(f.size());
  for (size_t i = 0; i < f.size(); ++i) f4[i] = std::pow(f[i], 4);
  const double B = integrate(g, f4) / 4.0;
  for (double lam : {0.5, 1.0, 2.0, 7.5}) {
    std::vector<double> lf(f.size());
    for (size_t i = 0; i < f.size(); ++i) lf[i] = lam * f[i];
    const double want = lam * lam * A - std::pow(lam, 4) * B;
    CHECK(energy(g, lf, 3.0) ==
          doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("derived constants: structure and monotonicity") {
  Grid g1 = unit_interval(64);
  DomainSpec d2;
  d2.kind = DomainKind::interval;
  d2.outer_radius = 2.0;
  Grid g2 = build_grid(d2, 64);
  for (double p : {2.0, 3.0, 5.0}) {
    DerivedConstants c1 = derived_constants(p, g1);
    DerivedConstants c2 = derived_constants(p, g2);
    CHECK(c1.delta > 0.0);
    CHECK(c1.c_bound ==
          doctest::Approx(2.0 / ((p - 1.0) * c1.delta)).epsilon(1e-14));
    // larger domain weakens the Hoelder constant, so delta shrinks
    CHECK(c2.delta <= c1.delta);
    CHECK(c1.envelope_delta > 0.0);
    CHECK(c1.envelope_c > 0.0);
  }
}

TEST_CASE("interpolation inequality behind the blowup-time constant") {
  // 2a + c b^{(p+1)/2} >= delta (a^{2/(p+1)} + b)^{(p+1)/2} for a, b >= 0,
  // where a plays |E| and b the squared L2 norm
  Grid g = unit_interval(64);
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> expo(-6.0, 6.0);
  for (double p : {2.0, 3.0, 5.0}) {
    DerivedConstants c = derived_constants(p, g);
    const double hoelder =
        (p - 1.0) / (p + 1.0) *
        std::pow(g.spec.volume(), -(p - 1.0) / 2.0);
    for (int k = 0; k < 1000; ++k) {
      const double a = std::pow(10.0, expo(rng));
      const double b = std::pow(10.0, expo(rng));
      const double lhs = 2.0 * a + hoelder * std::pow(b, (p + 1.0) / 2.0);
      const double rhs =
          c.delta *
          std::pow(std::pow(a, 2.0 / (p + 1.0)) + b, (p + 1.0) / 2.0);
      CHECK(lhs >= rhs * (1.0 - 1e-12));
    }
  }
}

TEST_CASE("blowup time bound rejects nonnegative energy and is monotone") {
  Grid g = unit_interval(64);
  DerivedConstants c = derived_constants(3.0, g);
  CHECK_THROWS_AS(blowup_time_bound(0.0, 0.0L, c), std::invalid_argument);
  CHECK_THROWS_AS(blowup_time_bound(1.0, 0.0L, c), std::invalid_argument);
  const double b1 = (double)blowup_time_bound(-1.0, 0.0L, c);
  const double b2 = (double)blowup_time_bound(-100.0, 0.0L, c);
  CHECK(b1 > 0.0);
  CHECK(b2 < b1); // deeper energy means earlier blowup
  CHECK((double)blowup_time_bound(-1.0, 2.0L, c) ==
        doctest::Approx(2.0 + b1).epsilon(1e-14));
}

TEST_CASE("dissipation audit on a resolved decaying run") {
  ModelParams mp;
  mp.p = 3.0;
  mp.grid = unit_interval(201);
  mp.reaction_on = false;
  SolverConfig cfg;
  cfg.t_max = 0.05L;
  Trajectory traj = run(sine_mode(mp.grid), cfg, mp);
  DissipationAudit audit = dissipation_audit(traj);
  CHECK(audit.series.size() == traj.ledger.size());
  const double E0 = traj.ledger.front().energy;
  CHECK(audit.max_defect <= 1e-3 * (1.0 + std::abs(E0)));
  CHECK(audit.max_scaled_defect <= audit.max_defect);
  // E decreases along the flow
  for (size_t i = 1; i < audit.series.size(); ++i)
    CHECK(audit.series[i].E <= audit.series[i - 1].E + 1e-12);
}

TEST_CASE("collapse classification of a focusing interval run") {
  ModelParams mp;
  mp.p = 3.0;
  mp.grid = unit_interval(201);
  std::vector<double> u0(mp.grid.nodes.size());
  for (size_t i = 0; i < u0.size(); ++i) {
    const double z = (mp.grid.nodes[i] - 0.5) / 0.2;
    u0[i] = 10.0 * std::exp(-0.5 * z * z);
  }
  u0.front() = u0.back() = 0.0;
  SolverConfig cfg;
  Trajectory traj = run(u0, cfg, mp);
  REQUIRE(traj.stop == StopReason::blowup_suspected);
  OmegaEstimate est = estimate_omega(traj);
  CollapseVerdict v = classify_collapse(traj, est.omega);
  CHECK(v.verdict == CollapseClass::collapsing);
  CHECK(v.complete_label);
  CHECK(v.B_est < 0.0);
  // energy divergence exponent consistent with (p+1)/(p-1) = 2
  CHECK(v.evidence > 1.0);
  CHECK(v.q2_integral > 0.0);

  // truncating the ledger below the resolved regime withholds the verdict
  Trajectory shallow = traj;
  while (!shallow.ledger.empty() && shallow.ledger.back().sup_norm > 1e3)
    shallow.ledger.pop_back();
  CollapseVerdict vs = classify_collapse(shallow, est.omega);
  CHECK(vs.verdict == CollapseClass::undetermined);
}
