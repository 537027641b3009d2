from ._core import (
    ContractError,
    IoError,
    __version__,
    generate_scenario,
    hungarian_max,
    run_episode,
    scenario_hash,
    sinkhorn_distance,
    welch_t,
    write_initial_params,
)

__all__ = [
    "ContractError",
    "IoError",
    "__version__",
    "generate_scenario",
    "hungarian_max",
    "run_episode",
    "scenario_hash",
    "sinkhorn_distance",
    "welch_t",
    "write_initial_params",
]
