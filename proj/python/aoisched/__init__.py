"""Age-of-information scheduling for a two-device wireless-powered uplink.

Thin Python front end over the C++ core: configuration, outage formulas,
policy iteration over the scheduling MDP and Monte Carlo evaluation.
"""

from ._core import (
    ConfigError,
    Error,
    IoError,
    LinkModel,
    Model,
    ModelError,
    SimulationError,
    Solution,
    SolverError,
    SystemParams,
    __version__,
    decode_policy,
    derive,
    encode_policy,
    load_config,
    policy_grid,
    simulate,
    solve,
)

PRESETS = ("wet-oma", "wet-wetoma", "wet-noma", "wet-oma-noma", "adaptive")

__all__ = [
    "ConfigError",
    "Error",
    "IoError",
    "LinkModel",
    "Model",
    "ModelError",
    "PRESETS",
    "SimulationError",
    "Solution",
    "SolverError",
    "SystemParams",
    "__version__",
    "decode_policy",
    "derive",
    "encode_policy",
    "load_config",
    "policy_grid",
    "simulate",
    "solve",
]
