import math

import pytest

import blowuplab as bl


def test_grid_quadrature():
    spec = bl.DomainSpec()
    spec.kind = bl.DomainKind.interval
    spec.dim = 1
    spec.inner_radius = 0.0
    spec.outer_radius = 1.0
    grid = bl.build_grid(spec, 101)
    assert grid.node_count == 101
    assert math.isclose(sum(grid.quad_weights), spec.volume(), rel_tol=1e-12)


def test_reaction_only_blowup_time():
    spec = bl.DomainSpec()
    spec.kind = bl.DomainKind.interval
    spec.dim = 1
    spec.outer_radius = 1.0
    params = bl.ModelParams()
    params.p = 3.0
    params.grid = bl.build_grid(spec, 16)
    params.diffusion_on = False
    cfg = bl.SolverConfig()
    cfg.store_snapshots = False
    traj = bl.run([2.0] * 16, cfg, params)
    assert traj.stop == "blowup_suspected"
    est = bl.estimate_omega(traj)
    exact = 2.0 ** (1.0 - params.p) / (params.p - 1.0)
    assert abs(est["omega"] - exact) / exact < 1e-2


def test_blowup_run_classification():
    spec = bl.DomainSpec()
    spec.kind = bl.DomainKind.interval
    spec.dim = 1
    spec.outer_radius = 1.0
    params = bl.ModelParams()
    params.p = 3.0
    params.grid = bl.build_grid(spec, 201)
    u0 = [10.0 * math.sin(math.pi * x) for x in params.grid.nodes]
    traj = bl.run(u0, bl.SolverConfig(), params)
    assert traj.stop == "blowup_suspected"
    omega = bl.estimate_omega(traj)["omega"]
    assert omega > traj.ledger[-2]["t"]
    assert bl.classify_collapse(traj, omega)["verdict"] == "collapsing"
    rate = bl.classify_type(traj, omega)
    assert rate["verdict"] == "type_I"
    assert abs(rate["plateau"] - bl.kappa(3.0)) < 0.05 * bl.kappa(3.0)


def test_scenario_catalogue():
    names = bl.scenario_names()
    assert "subcritical_collapse" in names
    rep = bl.run_scenario("subcritical_collapse", "coarse")
    assert rep["matches_expectation"], rep["mismatches"]
    assert rep["collapse"] == "collapsing"
    with pytest.raises(ValueError):
        bl.run_scenario("no_such_scenario", "coarse")
