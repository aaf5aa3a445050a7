#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "blowuplab/io.hpp"

namespace fs = std::filesystem;
using namespace blowuplab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRange = 3;
constexpr int kExitBracket = 4;
constexpr int kExitBudget = 5;

struct Common {
  std::string config_path;
  std::string out_dir = ".";
  std::string tier;
  bool print_defaults = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON run configuration");
  cmd->add_option("--out", c.out_dir, "output directory");
  cmd->add_option("--tier", c.tier, "resolution tier")
      ->check(CLI::IsMember({"coarse", "reference", "fine"}));
  cmd->add_flag("--print-defaults", c.print_defaults,
                "print the default config and exit");
}

int fail(int code, const std::string& kind, const std::string& message) {
  std::fputs(error_json(kind, message).c_str(), stderr);
  return code;
}

std::string out_path(const Common& c, const std::string& name) {
  fs::create_directories(c.out_dir);
  return (fs::path(c.out_dir) / name).string();
}

RunConfig load(const Common& c) {
  if (c.config_path.empty()) throw ConfigError("--config is required");
  RunConfig cfg = load_config(c.config_path);
  if (!c.tier.empty()) cfg.tier = c.tier;
  return cfg;
}

ScenarioSpec spec_of(const RunConfig& cfg, const Common& c) {
  ScenarioSpec spec = cfg.to_scenario();
  if (!c.tier.empty()) apply_tier(spec, c.tier);
  return spec;
}

Trajectory make_trajectory(const RunConfig& cfg, const ScenarioSpec& spec) {
  ModelParams params;
  params.p = spec.p;
  params.grid = build_grid(spec.domain, spec.node_count);
  params.reaction_on = cfg.reaction_on;
  params.diffusion_on = cfg.diffusion_on;
  if (cfg.synthetic_flat)
    return make_flat_trajectory(params, cfg.synthetic_omega,
                                cfg.synthetic_delta_start,
                                cfg.synthetic_delta_end, cfg.synthetic_ds);
  const std::vector<double> u0 = make_initial(params.grid, spec.initial);
  return run(u0, spec.solver, params);
}

void write_run_artifacts(const Common& c, const Trajectory& traj) {
  write_ledger_csv(out_path(c, "ledger.csv"), traj);
  save_checkpoint(out_path(c, "checkpoint.json"), traj);
  OmegaEstimate omega;
  DissipationAudit audit = dissipation_audit(traj);
  CollapseVerdict collapse;
  RateDiagnostics rate;
  if (traj.stop == StopReason::blowup_suspected) {
    omega = estimate_omega(traj);
    collapse = classify_collapse(traj, omega.omega);
    try {
      const RateCurve curve = rate_curve(traj, omega.omega);
      write_rate_csv(out_path(c, "rate.csv"), curve);
      rate = classify_type(curve);
    } catch (const std::invalid_argument&) {
      // too few points for classification; verdict stays undetermined
    }
  }
  write_text_file(out_path(c, "verdict.json"),
                  verdict_json(traj, omega, audit, collapse, rate));
}

int cmd_run(const Common& c, const std::string& resume_path) {
  const RunConfig cfg = load(c);
  const ScenarioSpec spec = spec_of(cfg, c);
  Trajectory traj;
  if (!resume_path.empty()) {
    traj = load_checkpoint(resume_path);
    if (traj.snapshots.empty())
      throw RangeError("checkpoint has no snapshots to resume from");
    const Snapshot& last = traj.snapshots.back();
    run_continue(traj, last.u, last.t, traj.ledger.back().dissipation);
  } else {
    traj = make_trajectory(cfg, spec);
  }
  write_run_artifacts(c, traj);
  return kExitOk;
}

int cmd_rescale(const Common& c, const std::string& traj_path) {
  const RunConfig cfg = load(c);
  const ScenarioSpec spec = spec_of(cfg, c);
  Trajectory traj;
  Time omega;
  if (cfg.synthetic_flat) {
    traj = make_trajectory(cfg, spec);
    omega = cfg.synthetic_omega;
  } else {
    traj = load_checkpoint(traj_path.empty() ? out_path(c, "checkpoint.json")
                                             : traj_path);
    if (traj.stop != StopReason::blowup_suspected)
      throw RangeError("rescaling requires a blowup trajectory");
    omega = estimate_omega(traj).omega;
  }
  const DomainSpec& dom = traj.params.grid.spec;
  const double lo = dom.kind == DomainKind::interval ? dom.inner_radius
                    : dom.kind == DomainKind::radial_annulus ? dom.inner_radius
                                                             : 0.0;
  if (cfg.rescale_a < lo || cfg.rescale_a > dom.outer_radius)
    throw ConfigError("rescale center lies outside the domain");
  if (cfg.rescale_s1 < cfg.rescale_s0 || cfg.rescale_ds <= 0)
    throw ConfigError("invalid rescale s-range");
  std::vector<double> s_grid;
  for (double s = cfg.rescale_s0; s <= cfg.rescale_s1 + 1e-12;
       s += cfg.rescale_ds)
    s_grid.push_back(s);
  try {
    for (double s : s_grid) {
      const RescaledFrame frame = rescale(traj, cfg.rescale_a, omega, s);
      char name[64];
      std::snprintf(name, sizeof name, "frame_s%.6g.csv", s);
      write_frame_csv(out_path(c, name), frame);
    }
    const LocalEnergySeries series =
        local_energy_series(traj, cfg.rescale_a, omega, s_grid);
    write_series_csv(out_path(c, "series.csv"), series);
  } catch (const std::out_of_range& e) {
    throw RangeError(e.what());
  }
  return kExitOk;
}

int cmd_scan(const Common& c, const std::string& traj_path) {
  const RunConfig cfg = load(c);
  const ScenarioSpec spec = spec_of(cfg, c);
  Trajectory traj;
  Time omega = 0;
  if (cfg.synthetic_flat) {
    traj = make_trajectory(cfg, spec);
    omega = cfg.synthetic_omega;
  } else if (!traj_path.empty() || fs::exists(out_path(c, "checkpoint.json"))) {
    traj = load_checkpoint(traj_path.empty() ? out_path(c, "checkpoint.json")
                                             : traj_path);
    if (traj.stop == StopReason::blowup_suspected)
      omega = estimate_omega(traj).omega;
  } else {
    traj = make_trajectory(cfg, spec);
    if (traj.stop == StopReason::blowup_suspected)
      omega = estimate_omega(traj).omega;
  }
  if (traj.stop != StopReason::blowup_suspected && !cfg.synthetic_flat) {
    // bounded data: the blowup set is empty by definition
    SingularSetMap empty;
    empty.domain = traj.params.grid.spec;
    empty.p = traj.params.p;
    empty.cfg = cfg.regularity;
    empty.centers = traj.params.grid.nodes;
    const size_t n = empty.centers.size() * cfg.regularity.radii.size();
    empty.density_cylinder.assign(n, 0.0);
    empty.density_grad.assign(n, 0.0);
    empty.density_l2.assign(n, 0.0);
    empty.density_enlarged.assign(n, 0.0);
    empty.flagged.assign(empty.centers.size(), 0);
    empty.truncation.assign(cfg.regularity.radii.size(), 0.0);
    write_density_csv(out_path(c, "density.csv"), empty);
    write_text_file(out_path(c, "dimension.json"),
                    dimension_json(covering_dimension(empty,
                                                      cfg.regularity.q_list)));
    return kExitOk;
  }
  try {
    const SingularSetMap map =
        extract_singular_set(traj, omega, cfg.regularity);
    write_density_csv(out_path(c, "density.csv"), map);
    write_text_file(out_path(c, "dimension.json"),
                    dimension_json(covering_dimension(map,
                                                      cfg.regularity.q_list)));
  } catch (const std::invalid_argument& e) {
    throw RangeError(e.what());
  }
  return kExitOk;
}

int cmd_bisect(const Common& c) {
  const RunConfig cfg = load(c);
  ScenarioSpec spec = spec_of(cfg, c);
  if (cfg.scenario.empty() && cfg.initial.name == "gaussian_bump" &&
      spec.name == "custom" && cfg.initial.amplitude == 1.0) {
    // bare config: fall back to the canonical borderline family
    spec = named_scenario("eigenfunction_borderline", cfg.tier);
  }
  const BisectionReport rep = bisect_borderline(
      spec, cfg.bisect_lo, cfg.bisect_hi, cfg.bisect_tol, cfg.bisect_budget);
  write_text_file(out_path(c, "bisection.json"), bisection_json(rep));
  if (rep.budget_exhausted)
    return fail(kExitBudget, "budget", "probe budget exhausted; partial report written");
  if (!rep.converged)
    return fail(kExitBracket, "bracket", "could not bracket the blowup threshold");
  return kExitOk;
}

int cmd_scenario(const Common& c, const std::string& name) {
  ScenarioSpec spec =
      named_scenario(name, c.tier.empty() ? "reference" : c.tier);
  const ScenarioReport rep = run_scenario(spec);
  write_ledger_csv(out_path(c, "ledger.csv"), rep.traj);
  write_text_file(out_path(c, "verdict.json"),
                  verdict_json(rep.traj, rep.omega, rep.audit, rep.collapse,
                               rep.rate));
  if (rep.set) {
    write_density_csv(out_path(c, "density.csv"), *rep.set);
    write_text_file(out_path(c, "dimension.json"),
                    dimension_json(*rep.dimension));
  }
  write_text_file(out_path(c, "summary.json"), scenario_summary_json(rep));
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"blowuplab: numerical laboratory for finite-time blowup of "
               "u_t - lap u = |u|^{p-1} u"};
  app.require_subcommand(0, 1);

  Common c_run, c_rescale, c_scan, c_bisect, c_scenario;
  std::string resume_path, traj_rescale, traj_scan, scenario_name;

  CLI::App* run_cmd = app.add_subcommand("run", "integrate an initial datum");
  add_common(run_cmd, c_run);
  run_cmd->add_option("--resume", resume_path, "checkpoint to continue from");

  CLI::App* rescale_cmd =
      app.add_subcommand("rescale", "self-similar frames and local energy");
  add_common(rescale_cmd, c_rescale);
  rescale_cmd->add_option("--traj", traj_rescale, "trajectory checkpoint");

  CLI::App* scan_cmd =
      app.add_subcommand("scan", "density scan and singular-set extraction");
  add_common(scan_cmd, c_scan);
  scan_cmd->add_option("--traj", traj_scan, "trajectory checkpoint");

  CLI::App* bisect_cmd =
      app.add_subcommand("bisect", "borderline amplitude bisection");
  add_common(bisect_cmd, c_bisect);

  CLI::App* scenario_cmd =
      app.add_subcommand("scenario", "named end-to-end experiment");
  add_common(scenario_cmd, c_scenario);
  scenario_cmd->add_option("--name", scenario_name, "scenario name")
      ->check(CLI::IsMember(scenario_names()));

  bool top_defaults = false;
  app.add_flag("--print-defaults", top_defaults,
               "print the default config and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitConfig;
  }

  const Common* commons[] = {&c_run, &c_rescale, &c_scan, &c_bisect,
                             &c_scenario};
  for (const Common* c : commons) top_defaults = top_defaults || c->print_defaults;
  if (top_defaults) {
    std::fputs(default_config_text().c_str(), stdout);
    return kExitOk;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(c_run, resume_path);
    if (rescale_cmd->parsed()) return cmd_rescale(c_rescale, traj_rescale);
    if (scan_cmd->parsed()) return cmd_scan(c_scan, traj_scan);
    if (bisect_cmd->parsed()) return cmd_bisect(c_bisect);
    if (scenario_cmd->parsed()) {
      if (scenario_name.empty())
        return fail(kExitConfig, "config", "scenario --name is required");
      return cmd_scenario(c_scenario, scenario_name);
    }
    std::fputs(app.help().c_str(), stdout);
    return kExitOk;
  } catch (const ConfigError& e) {
    return fail(kExitConfig, "config", e.what());
  } catch (const RangeError& e) {
    return fail(kExitRange, "range", e.what());
  } catch (const std::out_of_range& e) {
    return fail(kExitRange, "range", e.what());
  } catch (const std::invalid_argument& e) {
    return fail(kExitRange, "range", e.what());
  } catch (const std::exception& e) {
    return fail(kExitConfig, "error", e.what());
  }
}
