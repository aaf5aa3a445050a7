#include "blowuplab/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace blowuplab {

using nlohmann::json;

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt(Time x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.21Lg", (long double)x);
  return buf;
}

std::pair<double, double> split_time(Time x) {
  const double hi = (double)x;
  return {hi, (double)(x - (Time)hi)};
}

Time join_time(double hi, double lo) { return (Time)hi + (Time)lo; }

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) { ok = true; break; }
    if (!ok)
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

template <typename T>
void get_to(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) obj.at(key).get_to(out);
}

void get_time(const json& obj, const char* key, Time& out) {
  if (obj.contains(key)) out = (Time)obj.at(key).get<double>();
}

} // namespace

ScenarioSpec RunConfig::to_scenario() const {
  if (!scenario.empty()) return named_scenario(scenario, tier);
  ScenarioSpec spec;
  spec.name = "custom";
  spec.domain = domain;
  spec.p = p;
  spec.node_count = node_count;
  spec.initial = initial;
  spec.solver = solver;
  spec.regularity = regularity;
  return spec;
}

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");
  check_keys(j,
             {"scenario", "tier", "seed", "domain", "p", "node_count",
              "reaction_on", "diffusion_on", "initial", "solver", "regularity",
              "synthetic", "rescale", "bisect"},
             "config root");
  RunConfig cfg;
  cfg.regularity.radii = geometric_radii(0.2, 5);
  get_to(j, "scenario", cfg.scenario);
  get_to(j, "tier", cfg.tier);
  get_to(j, "seed", cfg.seed);
  get_to(j, "p", cfg.p);
  get_to(j, "node_count", cfg.node_count);
  get_to(j, "reaction_on", cfg.reaction_on);
  get_to(j, "diffusion_on", cfg.diffusion_on);
  if (j.contains("domain")) {
    const json& d = j["domain"];
    check_keys(d, {"kind", "dim", "inner_radius", "outer_radius"}, "domain");
    std::string kind = to_string(cfg.domain.kind);
    get_to(d, "kind", kind);
    try {
      cfg.domain.kind = domain_kind_from_string(kind);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    get_to(d, "dim", cfg.domain.dim);
    get_to(d, "inner_radius", cfg.domain.inner_radius);
    get_to(d, "outer_radius", cfg.domain.outer_radius);
  }
  if (j.contains("initial")) {
    const json& d = j["initial"];
    check_keys(d, {"name", "amplitude", "width", "center"}, "initial");
    get_to(d, "name", cfg.initial.name);
    get_to(d, "amplitude", cfg.initial.amplitude);
    get_to(d, "width", cfg.initial.width);
    get_to(d, "center", cfg.initial.center);
  }
  if (j.contains("solver")) {
    const json& d = j["solver"];
    check_keys(d,
               {"cfl_safety", "reaction_safety", "u_max", "t_max",
                "snapshot_stride", "snapshot_s_spacing", "rk_tolerance",
                "store_snapshots", "decay_threshold", "early_decay_factor"},
               "solver");
    get_to(d, "cfl_safety", cfg.solver.cfl_safety);
    get_to(d, "reaction_safety", cfg.solver.reaction_safety);
    get_to(d, "u_max", cfg.solver.u_max);
    get_time(d, "t_max", cfg.solver.t_max);
    get_to(d, "snapshot_stride", cfg.solver.snapshot_stride);
    get_to(d, "snapshot_s_spacing", cfg.solver.snapshot_s_spacing);
    get_to(d, "rk_tolerance", cfg.solver.rk_tolerance);
    get_to(d, "store_snapshots", cfg.solver.store_snapshots);
    get_to(d, "decay_threshold", cfg.solver.decay_threshold);
    get_to(d, "early_decay_factor", cfg.solver.early_decay_factor);
  }
  if (j.contains("regularity")) {
    const json& d = j["regularity"];
    check_keys(d,
               {"eps0", "eps1", "eps3", "eps4", "enlargement", "radii",
                "q_list", "min_flag_sup"},
               "regularity");
    get_to(d, "eps0", cfg.regularity.eps0);
    get_to(d, "eps1", cfg.regularity.eps1);
    get_to(d, "eps3", cfg.regularity.eps3);
    get_to(d, "eps4", cfg.regularity.eps4);
    get_to(d, "enlargement", cfg.regularity.enlargement);
    get_to(d, "radii", cfg.regularity.radii);
    get_to(d, "q_list", cfg.regularity.q_list);
    get_to(d, "min_flag_sup", cfg.regularity.min_flag_sup);
  }
  if (j.contains("synthetic")) {
    const json& d = j["synthetic"];
    check_keys(d, {"flat", "omega", "delta_start", "delta_end", "ds"},
               "synthetic");
    get_to(d, "flat", cfg.synthetic_flat);
    get_time(d, "omega", cfg.synthetic_omega);
    get_to(d, "delta_start", cfg.synthetic_delta_start);
    get_to(d, "delta_end", cfg.synthetic_delta_end);
    get_to(d, "ds", cfg.synthetic_ds);
  }
  if (j.contains("rescale")) {
    const json& d = j["rescale"];
    check_keys(d, {"a", "s0", "s1", "ds"}, "rescale");
    get_to(d, "a", cfg.rescale_a);
    get_to(d, "s0", cfg.rescale_s0);
    get_to(d, "s1", cfg.rescale_s1);
    get_to(d, "ds", cfg.rescale_ds);
  }
  if (j.contains("bisect")) {
    const json& d = j["bisect"];
    check_keys(d, {"lambda_lo", "lambda_hi", "tol", "budget"}, "bisect");
    get_to(d, "lambda_lo", cfg.bisect_lo);
    get_to(d, "lambda_hi", cfg.bisect_hi);
    get_to(d, "tol", cfg.bisect_tol);
    get_to(d, "budget", cfg.bisect_budget);
  }
  if (cfg.p <= 1.0) throw ConfigError("p must exceed 1");
  if (cfg.node_count < 8) throw ConfigError("node_count too small");
  try {
    cfg.domain.validate();
    cfg.solver.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string default_config_text() {
  const RunConfig cfg;
  json j;
  j["scenario"] = cfg.scenario;
  j["tier"] = cfg.tier;
  j["seed"] = cfg.seed;
  j["domain"] = {{"kind", to_string(cfg.domain.kind)},
                 {"dim", cfg.domain.dim},
                 {"inner_radius", cfg.domain.inner_radius},
                 {"outer_radius", cfg.domain.outer_radius}};
  j["p"] = cfg.p;
  j["node_count"] = cfg.node_count;
  j["reaction_on"] = cfg.reaction_on;
  j["diffusion_on"] = cfg.diffusion_on;
  j["initial"] = {{"name", cfg.initial.name},
                  {"amplitude", cfg.initial.amplitude},
                  {"width", cfg.initial.width},
                  {"center", cfg.initial.center}};
  j["solver"] = {{"cfl_safety", cfg.solver.cfl_safety},
                 {"reaction_safety", cfg.solver.reaction_safety},
                 {"u_max", cfg.solver.u_max},
                 {"t_max", (double)cfg.solver.t_max},
                 {"snapshot_stride", cfg.solver.snapshot_stride},
                 {"snapshot_s_spacing", cfg.solver.snapshot_s_spacing},
                 {"rk_tolerance", cfg.solver.rk_tolerance},
                 {"store_snapshots", cfg.solver.store_snapshots},
                 {"decay_threshold", cfg.solver.decay_threshold},
                 {"early_decay_factor", cfg.solver.early_decay_factor}};
  j["regularity"] = {{"eps0", cfg.regularity.eps0},
                     {"eps1", cfg.regularity.eps1},
                     {"eps3", cfg.regularity.eps3},
                     {"eps4", cfg.regularity.eps4},
                     {"enlargement", cfg.regularity.enlargement},
                     {"radii", geometric_radii(0.2, 5)},
                     {"q_list", cfg.regularity.q_list},
                     {"min_flag_sup", cfg.regularity.min_flag_sup}};
  j["synthetic"] = {{"flat", cfg.synthetic_flat},
                    {"omega", (double)cfg.synthetic_omega},
                    {"delta_start", cfg.synthetic_delta_start},
                    {"delta_end", cfg.synthetic_delta_end},
                    {"ds", cfg.synthetic_ds}};
  j["rescale"] = {{"a", cfg.rescale_a},
                  {"s0", cfg.rescale_s0},
                  {"s1", cfg.rescale_s1},
                  {"ds", cfg.rescale_ds}};
  j["bisect"] = {{"lambda_lo", cfg.bisect_lo},
                 {"lambda_hi", cfg.bisect_hi},
                 {"tol", cfg.bisect_tol},
                 {"budget", cfg.bisect_budget}};
  return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
}

void write_ledger_csv(const std::string& path, const Trajectory& traj) {
  std::ostringstream out;
  out << "t,dt,sup_norm,energy,dissipation,grad_sq,pow_int\n";
  for (const LedgerEntry& e : traj.ledger) {
    out << fmt(e.t) << ',' << fmt(e.dt) << ',' << fmt(e.sup_norm) << ','
        << fmt(e.energy) << ',' << fmt(e.dissipation) << ',' << fmt(e.grad_sq)
        << ',' << fmt(e.pow_int) << '\n';
  }
  write_text_file(path, out.str());
}

void write_rate_csv(const std::string& path, const RateCurve& curve) {
  std::ostringstream out;
  out << "t,omega_minus_t,g\n";
  for (const RatePoint& pt : curve.points)
    out << fmt(pt.t) << ',' << fmt(pt.omega_minus_t) << ',' << fmt(pt.g)
        << '\n';
  write_text_file(path, out.str());
}

void write_frame_csv(const std::string& path, const RescaledFrame& frame) {
  std::ostringstream out;
  out << "y,w,rho,mask\n";
  for (size_t i = 0; i < frame.y.size(); ++i)
    out << fmt(frame.y[i]) << ',' << fmt(frame.w[i]) << ',' << fmt(frame.rho[i])
        << ',' << (frame.mask[i] ? 1 : 0) << '\n';
  write_text_file(path, out.str());
}

void write_series_csv(const std::string& path,
                      const LocalEnergySeries& series) {
  std::ostringstream out;
  out << "s,E,ws_norm,decay_integrand\n";
  for (const LocalEnergyEntry& e : series.entries)
    out << fmt(e.s) << ',' << fmt(e.E) << ',' << fmt(e.ws_norm) << ','
        << fmt(e.decay_integrand) << '\n';
  write_text_file(path, out.str());
}

void write_density_csv(const std::string& path, const SingularSetMap& map) {
  std::ostringstream out;
  out << "center,r,density_cylinder,density_grad,density_l2,density_enlarged,"
         "flagged\n";
  const size_t nr = map.cfg.radii.size();
  for (size_t c = 0; c < map.centers.size(); ++c)
    for (size_t j = 0; j < nr; ++j) {
      const size_t k = c * nr + j;
      out << fmt(map.centers[c]) << ',' << fmt(map.cfg.radii[j]) << ','
          << fmt(map.density_cylinder[k]) << ',' << fmt(map.density_grad[k])
          << ',' << fmt(map.density_l2[k]) << ','
          << fmt(map.density_enlarged[k]) << ',' << (map.flagged[c] ? 1 : 0)
          << '\n';
    }
  write_text_file(path, out.str());
}

std::string verdict_json(const Trajectory& traj, const OmegaEstimate& omega,
                         const DissipationAudit& audit,
                         const CollapseVerdict& collapse,
                         const RateDiagnostics& rate) {
  json j;
  j["schema_version"] = 1;
  j["stop"] = to_string(traj.stop);
  j["final_time"] = fmt(traj.final_time());
  j["final_sup"] = traj.final_sup();
  j["omega"] = {{"value", fmt(omega.omega)},
                {"fit_quality", omega.fit_quality},
                {"fallback", omega.fallback},
                {"uncertainty", fmt(omega.uncertainty)}};
  j["energy"] = {{"max_defect", audit.max_defect},
                 {"max_scaled_defect", audit.max_scaled_defect}};
  j["collapse"] = {{"verdict", to_string(collapse.verdict)},
                   {"B_est", collapse.B_est},
                   {"evidence", collapse.evidence},
                   {"dissipation_tail", collapse.dissipation_tail},
                   {"q1_integral", collapse.q1_integral},
                   {"q2_integral", collapse.q2_integral},
                   {"q1_tail", collapse.q1_tail},
                   {"q2_tail", collapse.q2_tail},
                   {"complete_label", collapse.complete_label}};
  j["rate"] = {{"verdict", to_string(rate.verdict)},
               {"plateau", rate.plateau},
               {"slope", rate.slope},
               {"oscillation", rate.oscillation},
               {"sup_g", rate.sup_g}};
  return j.dump(2) + "\n";
}

std::string dimension_json(const DimensionReport& rep) {
  json j;
  j["schema_version"] = 1;
  j["empty"] = rep.empty;
  j["box_slope"] = rep.box_slope;
  j["analytic_bound"] = rep.analytic_bound;
  j["box_counts"] = json::array();
  for (auto& [r, n] : rep.box_counts)
    j["box_counts"].push_back({{"r", r}, {"count", n}});
  j["covering"] = json::array();
  for (const CoveringSum& cs : rep.covering) {
    json c = {{"q", cs.q}, {"exponent", cs.exponent}, {"bounded", cs.bounded}};
    c["sums"] = json::array();
    for (auto& [r, s] : cs.sums) c["sums"].push_back({{"r", r}, {"sum", s}});
    j["covering"].push_back(c);
  }
  return j.dump(2) + "\n";
}

std::string bisection_json(const BisectionReport& rep) {
  json j;
  j["schema_version"] = 1;
  j["lambda_lo"] = rep.lambda_lo;
  j["lambda_hi"] = rep.lambda_hi;
  j["lambda_star"] = rep.lambda_star;
  j["converged"] = rep.converged;
  j["budget_exhausted"] = rep.budget_exhausted;
  j["iterates"] = json::array();
  for (const BisectionIterate& it : rep.iterates)
    j["iterates"].push_back(
        {{"lambda", it.lambda}, {"verdict", to_string(it.verdict)}});
  j["near_borderline_collapse"] = to_string(rep.collapse.verdict);
  return j.dump(2) + "\n";
}

std::string scenario_summary_json(const ScenarioReport& rep) {
  json j;
  j["schema_version"] = 1;
  j["name"] = rep.spec.name;
  j["stop"] = to_string(rep.traj.stop);
  j["matches_expectation"] = rep.matches_expectation;
  j["mismatches"] = rep.mismatches;
  j["omega"] = fmt(rep.omega.omega);
  j["collapse"] = to_string(rep.collapse.verdict);
  j["rate"] = to_string(rep.rate.verdict);
  if (rep.dimension) {
    j["set_empty"] = rep.dimension->empty;
    j["box_slope"] = rep.dimension->box_slope;
  }
  return j.dump(2) + "\n";
}

std::string error_json(const std::string& kind, const std::string& message) {
  json j;
  j["error"] = kind;
  j["message"] = message;
  return j.dump(2) + "\n";
}

void save_checkpoint(const std::string& path, const Trajectory& traj) {
  json j;
  j["schema_version"] = 1;
  const ModelParams& mp = traj.params;
  j["params"] = {{"p", mp.p},
                 {"domain",
                  {{"kind", to_string(mp.grid.spec.kind)},
                   {"dim", mp.grid.spec.dim},
                   {"inner_radius", mp.grid.spec.inner_radius},
                   {"outer_radius", mp.grid.spec.outer_radius}}},
                 {"node_count", mp.grid.node_count},
                 {"reaction_on", mp.reaction_on},
                 {"diffusion_on", mp.diffusion_on}};
  const SolverConfig& sc = traj.cfg;
  j["solver"] = {{"cfl_safety", sc.cfl_safety},
                 {"reaction_safety", sc.reaction_safety},
                 {"u_max", sc.u_max},
                 {"t_max", (double)sc.t_max},
                 {"snapshot_stride", sc.snapshot_stride},
                 {"snapshot_s_spacing", sc.snapshot_s_spacing},
                 {"rk_tolerance", sc.rk_tolerance},
                 {"store_snapshots", sc.store_snapshots},
                 {"decay_threshold", sc.decay_threshold},
                 {"early_decay_factor", sc.early_decay_factor}};
  j["stop"] = to_string(traj.stop);
  json ledger = json::array();
  for (const LedgerEntry& e : traj.ledger) {
    const auto [thi, tlo] = split_time(e.t);
    const auto [dhi, dlo] = split_time(e.dt);
    ledger.push_back({thi, tlo, dhi, dlo, e.sup_norm, e.energy, e.dissipation,
                      e.grad_sq, e.pow_int});
  }
  j["ledger"] = std::move(ledger);
  json snaps = json::array();
  for (const Snapshot& s : traj.snapshots) {
    const auto [thi, tlo] = split_time(s.t);
    snaps.push_back({{"t", {thi, tlo}}, {"u", s.u}});
  }
  j["snapshots"] = std::move(snaps);
  write_text_file(path, j.dump() + "\n");
}

Trajectory load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("corrupt checkpoint: ") + e.what());
  }
  if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1)
    throw std::runtime_error("unsupported checkpoint schema version");
  Trajectory traj;
  const json& p = j.at("params");
  const json& d = p.at("domain");
  DomainSpec dom;
  dom.kind = domain_kind_from_string(d.at("kind").get<std::string>());
  dom.dim = d.at("dim").get<int>();
  dom.inner_radius = d.at("inner_radius").get<double>();
  dom.outer_radius = d.at("outer_radius").get<double>();
  traj.params.p = p.at("p").get<double>();
  traj.params.grid = build_grid(dom, p.at("node_count").get<int>());
  traj.params.reaction_on = p.at("reaction_on").get<bool>();
  traj.params.diffusion_on = p.at("diffusion_on").get<bool>();
  const json& s = j.at("solver");
  SolverConfig& sc = traj.cfg;
  sc.cfl_safety = s.at("cfl_safety").get<double>();
  sc.reaction_safety = s.at("reaction_safety").get<double>();
  sc.u_max = s.at("u_max").get<double>();
  sc.t_max = (Time)s.at("t_max").get<double>();
  sc.snapshot_stride = s.at("snapshot_stride").get<int>();
  sc.snapshot_s_spacing = s.at("snapshot_s_spacing").get<double>();
  sc.rk_tolerance = s.at("rk_tolerance").get<double>();
  sc.store_snapshots = s.at("store_snapshots").get<bool>();
  sc.decay_threshold = s.at("decay_threshold").get<double>();
  sc.early_decay_factor = s.at("early_decay_factor").get<double>();
  const std::string stop = j.at("stop").get<std::string>();
  for (StopReason r : {StopReason::blowup_suspected, StopReason::horizon_reached,
                       StopReason::decayed_to_zero, StopReason::step_underflow,
                       StopReason::running})
    if (to_string(r) == stop) traj.stop = r;
  for (const json& row : j.at("ledger")) {
    LedgerEntry e;
    e.t = join_time(row.at(0).get<double>(), row.at(1).get<double>());
    e.dt = join_time(row.at(2).get<double>(), row.at(3).get<double>());
    e.sup_norm = row.at(4).get<double>();
    e.energy = row.at(5).get<double>();
    e.dissipation = row.at(6).get<double>();
    e.grad_sq = row.at(7).get<double>();
    e.pow_int = row.at(8).get<double>();
    traj.ledger.push_back(e);
  }
  for (const json& row : j.at("snapshots")) {
    Snapshot snap;
    snap.t = join_time(row.at("t").at(0).get<double>(),
                       row.at("t").at(1).get<double>());
    row.at("u").get_to(snap.u);
    traj.snapshots.push_back(std::move(snap));
  }
  return traj;
}

} // namespace blowuplab
