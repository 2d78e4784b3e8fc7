"""Merger harm from HHI changes: equilibrium, calibration and first-order approximations."""

from ._core import (
    DomainError,
    SolverError,
    ValidationError,
    approx,
    calibrate,
    delta_hhi,
    equilibrium_margin,
    hhi,
    merge,
    monte_carlo,
    rho1,
    rho1_bounds,
    solve,
    upp,
)

__all__ = [
    "DomainError",
    "SolverError",
    "ValidationError",
    "approx",
    "calibrate",
    "delta_hhi",
    "equilibrium_margin",
    "hhi",
    "merge",
    "monte_carlo",
    "rho1",
    "rho1_bounds",
    "solve",
    "upp",
]
