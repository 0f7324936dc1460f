"""Conservation laws on metric networks."""

from ._core import (
    KirchnetError,
    Network,
    ParseError,
    distance,
    godunov_flux,
    integrate,
    load_network,
    mollifier_error,
    network_from_edges,
    observed_order,
    run_cli,
    shortest_path,
    simulate_scenario,
    total_measure,
    upwind_flux,
    validate,
)

__all__ = [
    "KirchnetError",
    "Network",
    "ParseError",
    "distance",
    "godunov_flux",
    "integrate",
    "load_network",
    "mollifier_error",
    "network_from_edges",
    "observed_order",
    "run_cli",
    "shortest_path",
    "simulate_scenario",
    "total_measure",
    "upwind_flux",
    "validate",
]
