"""Multicast transmit-covariance design for one coded-caching transmission."""

from .problem import (
    CovarianceSet,
    MulticastProblem,
    RateResult,
    enumerate_mac_subsets,
    exact_symmetric_rate,
    interference_covariance,
    mac_layout,
)
from .sca import SCAConfig, remark1_solve, sca_solve
from .subproblem import ConvexSubproblem, build_sca_subproblem, solve_subproblem
from .waterfilling import waterfilling_capacity, waterfilling_powers

__all__ = [
    "ConvexSubproblem",
    "CovarianceSet",
    "MulticastProblem",
    "RateResult",
    "SCAConfig",
    "build_sca_subproblem",
    "enumerate_mac_subsets",
    "exact_symmetric_rate",
    "interference_covariance",
    "mac_layout",
    "remark1_solve",
    "sca_solve",
    "solve_subproblem",
    "waterfilling_capacity",
    "waterfilling_powers",
]
