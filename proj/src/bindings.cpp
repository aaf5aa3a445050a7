// Python surface. Time values are long double internally; everything
// crossing this boundary is converted to double.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "blowuplab/io.hpp"

namespace py = pybind11;
using namespace blowuplab;

namespace {

py::dict entry_dict(const LedgerEntry& e) {
  py::dict d;
  d["t"] = double(e.t);
  d["dt"] = double(e.dt);
  d["sup_norm"] = e.sup_norm;
  d["grad_sq"] = e.grad_sq;
  d["pow_int"] = e.pow_int;
  d["energy"] = e.energy;
  d["dissipation"] = e.dissipation;
  return d;
}

} // namespace

PYBIND11_MODULE(_blowuplab, m) {
  m.doc() = "semilinear heat blowup laboratory";

  py::enum_<DomainKind>(m, "DomainKind")
      .value("interval", DomainKind::interval)
      .value("radial_ball", DomainKind::radial_ball)
      .value("radial_annulus", DomainKind::radial_annulus);

  py::class_<DomainSpec>(m, "DomainSpec")
      .def(py::init<>())
      .def_readwrite("kind", &DomainSpec::kind)
      .def_readwrite("dim", &DomainSpec::dim)
      .def_readwrite("inner_radius", &DomainSpec::inner_radius)
      .def_readwrite("outer_radius", &DomainSpec::outer_radius)
      .def("volume", &DomainSpec::volume);

  py::class_<Grid>(m, "Grid")
      .def_readonly("node_count", &Grid::node_count)
      .def_readonly("h", &Grid::h)
      .def_readonly("nodes", &Grid::nodes)
      .def_readonly("quad_weights", &Grid::quad_weights);
  m.def("build_grid", &build_grid, py::arg("spec"), py::arg("node_count"));

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init<>())
      .def_readwrite("p", &ModelParams::p)
      .def_readwrite("grid", &ModelParams::grid)
      .def_readwrite("diffusion_on", &ModelParams::diffusion_on)
      .def_readwrite("reaction_on", &ModelParams::reaction_on);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("rk_tolerance", &SolverConfig::rk_tolerance)
      .def_readwrite("reaction_safety", &SolverConfig::reaction_safety)
      .def_readwrite("u_max", &SolverConfig::u_max)
      .def_readwrite("store_snapshots", &SolverConfig::store_snapshots)
      .def_property(
          "t_max", [](const SolverConfig& c) { return double(c.t_max); },
          [](SolverConfig& c, double v) { c.t_max = v; });

  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly("stop",
                             [](const Trajectory& t) {
                               return to_string(t.stop);
                             })
      .def_property_readonly("final_time",
                             [](const Trajectory& t) {
                               return double(t.final_time());
                             })
      .def_property_readonly("final_sup", &Trajectory::final_sup)
      .def_property_readonly("ledger", [](const Trajectory& t) {
        py::list out;
        for (const LedgerEntry& e : t.ledger) out.append(entry_dict(e));
        return out;
      });

  m.def(
      "run",
      [](const std::vector<double>& u0, const SolverConfig& cfg,
         const ModelParams& params) { return run(u0, cfg, params); },
      py::arg("u0"), py::arg("config"), py::arg("params"));

  m.def("estimate_omega", [](const Trajectory& traj) {
    const OmegaEstimate est = estimate_omega(traj);
    py::dict d;
    d["omega"] = double(est.omega);
    d["fit_quality"] = est.fit_quality;
    d["fallback"] = est.fallback;
    return d;
  });

  m.def("kappa", &kappa, py::arg("p"));
  m.def("local_energy_of_kappa", &local_energy_of_kappa, py::arg("p"),
        py::arg("dim"));

  m.def(
      "classify_collapse",
      [](const Trajectory& traj, double omega) {
        const CollapseVerdict v = classify_collapse(traj, omega);
        py::dict d;
        d["verdict"] = to_string(v.verdict);
        d["B_est"] = v.B_est;
        d["dissipation_tail"] = v.dissipation_tail;
        return d;
      },
      py::arg("traj"), py::arg("omega"));

  m.def(
      "classify_type",
      [](const Trajectory& traj, double omega) {
        const RateDiagnostics diag = classify_type(rate_curve(traj, omega));
        py::dict d;
        d["verdict"] = to_string(diag.verdict);
        d["plateau"] = diag.plateau;
        d["slope"] = diag.slope;
        return d;
      },
      py::arg("traj"), py::arg("omega"));

  m.def("scenario_names", &scenario_names);
  m.def(
      "run_scenario",
      [](const std::string& name, const std::string& tier) {
        const ScenarioReport rep = run_scenario(named_scenario(name, tier));
        py::dict d;
        d["stop"] = to_string(rep.traj.stop);
        d["omega"] = double(rep.omega.omega);
        d["collapse"] = to_string(rep.collapse.verdict);
        d["rate"] = to_string(rep.rate.verdict);
        d["matches_expectation"] = rep.matches_expectation;
        d["mismatches"] = rep.mismatches;
        if (rep.dimension && !rep.dimension->empty)
          d["box_slope"] = rep.dimension->box_slope;
        return d;
      },
      py::arg("name"), py::arg("tier") = "reference");
}
