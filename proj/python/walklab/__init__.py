"""Occupation statistics of the simple random walk on Z^d.

The heavy lifting lives in the compiled extension; this package just re-exports
it under stable names.
"""

from walklab._core import (
    __version__,
    WalkLedger,
    coupled_estimates,
    enumerate_paths,
    escape_by,
    escape_constants,
    escape_estimate,
    green_at,
    heavy_counts,
    identity_residuals,
    lambda_of,
    mu_of,
    origin_occupation_law,
    pair_occupation_law,
    path_max,
    race,
    simulate,
    step_law,
    target_avoidance,
    threshold_level,
    threshold_psi,
    two_point,
    visits_before_return_law,
    waiting_time,
)

__all__ = [
    "__version__",
    "WalkLedger",
    "coupled_estimates",
    "enumerate_paths",
    "escape_by",
    "escape_constants",
    "escape_estimate",
    "green_at",
    "heavy_counts",
    "identity_residuals",
    "lambda_of",
    "mu_of",
    "origin_occupation_law",
    "pair_occupation_law",
    "path_max",
    "race",
    "simulate",
    "step_law",
    "target_avoidance",
    "threshold_level",
    "threshold_psi",
    "two_point",
    "visits_before_return_law",
    "waiting_time",
]
