"""Joint computation offloading and energy beamforming for wireless powered MEC."""

from ._core import (
    ConfigError,
    InfeasibleProblem,
    InvalidParameters,
    SystemParams,
    UserParams,
    beta,
    inverse_beta_gap,
    lambert_w0,
    oracle_check,
    run_scheme,
    scheme_ids,
    selftest,
    solve,
    sweep,
)

__all__ = [
    "ConfigError",
    "InfeasibleProblem",
    "InvalidParameters",
    "SystemParams",
    "UserParams",
    "beta",
    "inverse_beta_gap",
    "lambert_w0",
    "oracle_check",
    "run_scheme",
    "scheme_ids",
    "selftest",
    "solve",
    "sweep",
]
