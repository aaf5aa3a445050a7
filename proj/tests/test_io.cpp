#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <blowuplab/io.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace blowuplab;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string tmp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

Trajectory short_blowup_run() {
  DomainSpec dom{DomainKind::interval, 1, 0.0, 1.0};
  ModelParams mp;
  mp.p = 3.0;
  mp.grid = build_grid(dom, 64);
  std::vector<double> u0(mp.grid.nodes.size());
  for (size_t i = 0; i < u0.size(); ++i)
    u0[i] = 8.0 * std::sin(M_PI * mp.grid.nodes[i]);
  SolverConfig cfg;
  cfg.snapshot_stride = 20;
  return run(u0, cfg, mp);
}

} // namespace

TEST_CASE("printable defaults parse back to the same configuration") {
  const std::string text = default_config_text();
  RunConfig cfg = parse_config_text(text);
  const RunConfig ref;
  CHECK(cfg.scenario == ref.scenario);
  CHECK(cfg.tier == ref.tier);
  CHECK(cfg.p == ref.p);
  CHECK(cfg.node_count == ref.node_count);
  CHECK(cfg.domain.kind == ref.domain.kind);
  CHECK(cfg.domain.dim == ref.domain.dim);
  CHECK(cfg.initial.name == ref.initial.name);
  CHECK(cfg.initial.amplitude == ref.initial.amplitude);
  CHECK(cfg.solver.rk_tolerance == ref.solver.rk_tolerance);
  CHECK(cfg.solver.u_max == ref.solver.u_max);
  CHECK(cfg.regularity.eps4 == ref.regularity.eps4);
  CHECK(cfg.bisect_lo == ref.bisect_lo);
  CHECK(cfg.bisect_hi == ref.bisect_hi);
}

TEST_CASE("config parser rejects malformed input by name") {
  CHECK_THROWS_AS(parse_config_text("{ not json"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[1,2,3]"), ConfigError);

  try {
    parse_config_text(R"({"no_such_option": 1})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("no_such_option") != std::string::npos);
  }
  try {
    parse_config_text(R"({"solver": {"dt_mni": 1e-10}})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("dt_mni") != std::string::npos);
  }

  CHECK_THROWS_AS(parse_config_text(R"({"p": 0.5})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"node_count": 3})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"domain": {"kind": "torus"}})"),
                  ConfigError);
  // inconsistent geometry is caught at parse time, not at run time
  CHECK_THROWS_AS(parse_config_text(
                      R"({"domain": {"kind": "radial_annulus", "dim": 3,
                          "inner_radius": 2.0, "outer_radius": 1.0}})"),
                  ConfigError);
}

TEST_CASE("scenario name in the config overrides the raw fields") {
  RunConfig cfg = parse_config_text(
      R"({"scenario": "subcritical_collapse", "tier": "coarse", "p": 9.0})");
  ScenarioSpec spec = cfg.to_scenario();
  CHECK(spec.name == "subcritical_collapse");
  CHECK(spec.p == 3.0); // catalogue value, not the raw field
  RunConfig raw = parse_config_text(R"({"p": 2.5, "node_count": 101})");
  ScenarioSpec custom = raw.to_scenario();
  CHECK(custom.name == "custom");
  CHECK(custom.p == 2.5);
  CHECK(custom.node_count == 101);
}

TEST_CASE("checkpoint round trip is exact") {
  Trajectory traj = short_blowup_run();
  REQUIRE(traj.stop == StopReason::blowup_suspected);
  REQUIRE(!traj.snapshots.empty());

  const std::string path = tmp_path("blowuplab_ckpt_test.json");
  save_checkpoint(path, traj);
  Trajectory back = load_checkpoint(path);

  CHECK(back.stop == traj.stop);
  CHECK(back.params.p == traj.params.p);
  CHECK(back.params.grid.node_count == traj.params.grid.node_count);
  CHECK(back.params.grid.spec.kind == traj.params.grid.spec.kind);
  CHECK(back.cfg.rk_tolerance == traj.cfg.rk_tolerance);
  CHECK(back.cfg.u_max == traj.cfg.u_max);

  REQUIRE(back.ledger.size() == traj.ledger.size());
  for (size_t i = 0; i < traj.ledger.size(); ++i) {
    // extended-precision times survive the double-pair encoding bit-exactly
    CHECK(back.ledger[i].t == traj.ledger[i].t);
    CHECK(back.ledger[i].dt == traj.ledger[i].dt);
    CHECK(back.ledger[i].sup_norm == traj.ledger[i].sup_norm);
    CHECK(back.ledger[i].energy == traj.ledger[i].energy);
    CHECK(back.ledger[i].dissipation == traj.ledger[i].dissipation);
  }
  REQUIRE(back.snapshots.size() == traj.snapshots.size());
  for (size_t i = 0; i < traj.snapshots.size(); ++i) {
    CHECK(back.snapshots[i].t == traj.snapshots[i].t);
    CHECK(back.snapshots[i].u == traj.snapshots[i].u);
  }
  std::filesystem::remove(path);
}

TEST_CASE("checkpoint loader rejects unusable files") {
  const std::string path = tmp_path("blowuplab_ckpt_bad.json");
  CHECK_THROWS(load_checkpoint(tmp_path("blowuplab_does_not_exist.json")));
  write_text_file(path, "{ broken");
  CHECK_THROWS(load_checkpoint(path));
  write_text_file(path, R"({"schema_version": 999})");
  CHECK_THROWS(load_checkpoint(path));
  std::filesystem::remove(path);
}

TEST_CASE("csv artifacts are byte-identical across writes") {
  Trajectory traj = short_blowup_run();
  const std::string a = tmp_path("blowuplab_ledger_a.csv");
  const std::string b = tmp_path("blowuplab_ledger_b.csv");
  write_ledger_csv(a, traj);
  write_ledger_csv(b, traj);
  const std::string text = slurp(a);
  CHECK(text == slurp(b));
  CHECK(text.rfind("t,dt,sup_norm,energy,dissipation,grad_sq,pow_int\n", 0) ==
        0);
  // one header plus one row per ledger entry
  const size_t lines = std::count(text.begin(), text.end(), '\n');
  CHECK(lines == traj.ledger.size() + 1);

  OmegaEstimate est = estimate_omega(traj);
  RateCurve curve = rate_curve(traj, est.omega);
  const std::string c = tmp_path("blowuplab_rate.csv");
  write_rate_csv(c, curve);
  const std::string rate_text = slurp(c);
  CHECK(rate_text.rfind("t,omega_minus_t,g\n", 0) == 0);
  std::filesystem::remove(a);
  std::filesystem::remove(b);
  std::filesystem::remove(c);
}

TEST_CASE("json summaries carry the schema version and verdict strings") {
  Trajectory traj = short_blowup_run();
  OmegaEstimate est = estimate_omega(traj);
  DissipationAudit audit = dissipation_audit(traj);
  CollapseVerdict collapse = classify_collapse(traj, est.omega);
  RateDiagnostics rate = classify_type(rate_curve(traj, est.omega));

  const std::string v = verdict_json(traj, est, audit, collapse, rate);
  CHECK(v.find("\"schema_version\": 1") != std::string::npos);
  CHECK(v.find("\"stop\": \"blowup_suspected\"") != std::string::npos);
  CHECK(v.find("\"rate\"") != std::string::npos);
  CHECK(v.find("\"collapse\"") != std::string::npos);

  const std::string err = error_json("config", "bad key");
  CHECK(err.find("\"error\": \"config\"") != std::string::npos);
  CHECK(err.find("bad key") != std::string::npos);
}
