"""Housing market system dynamics model (C++ core)."""

from ._core import (
    Params,
    RunResult,
    Scenario,
    TheilResult,
    __version__,
    calibrate,
    compare,
    default_scenarios,
    equilibrate,
    extreme_conditions,
    load_params,
    load_scenarios,
    run_acceptance,
    run_scenario,
    sensitivity_sweep,
    theils_u,
)

__all__ = [
    "Params",
    "RunResult",
    "Scenario",
    "TheilResult",
    "__version__",
    "calibrate",
    "compare",
    "default_scenarios",
    "equilibrate",
    "extreme_conditions",
    "load_params",
    "load_scenarios",
    "run_acceptance",
    "run_scenario",
    "sensitivity_sweep",
    "theils_u",
]
