from ._blowuplab import (
    DomainKind,
    DomainSpec,
    Grid,
    ModelParams,
    SolverConfig,
    Trajectory,
    build_grid,
    classify_collapse,
    classify_type,
    estimate_omega,
    kappa,
    local_energy_of_kappa,
    run,
    run_scenario,
    scenario_names,
)

__all__ = [
    "DomainKind",
    "DomainSpec",
    "Grid",
    "ModelParams",
    "SolverConfig",
    "Trajectory",
    "build_grid",
    "classify_collapse",
    "classify_type",
    "estimate_omega",
    "kappa",
    "local_energy_of_kappa",
    "run",
    "run_scenario",
    "scenario_names",
]
