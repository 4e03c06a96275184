"""Coded caching over MIMO broadcast channels: delivery schemes, DoF bounds
and multicast covariance design."""

from ._kernels import BACKEND
from .cc_core import (
    DeliverySchedule,
    Placement,
    SystemParams,
    build_placement,
    build_schedule,
    subpacketization,
    verify_decodability,
)
from .channel import ChannelSet, logdet_hermitian_psd, sample_channels
from .dof import DofSolution, beta_bound, dof_max, dof_quick, rank_bound
from .errors import (
    DegenerateTrialError,
    InfeasibleError,
    InvalidArgumentError,
    MimoCCError,
    NumericDomainError,
    ProblemTooLargeError,
    SolverFailure,
)
from .harness import ExperimentConfig, RateCurve, TrialResult, estimate_slope, rate_curve, run_trial
from .multicast import (
    CovarianceSet,
    MulticastProblem,
    RateResult,
    SCAConfig,
    exact_symmetric_rate,
    remark1_solve,
    sca_solve,
    waterfilling_capacity,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ChannelSet",
    "CovarianceSet",
    "DegenerateTrialError",
    "DeliverySchedule",
    "DofSolution",
    "ExperimentConfig",
    "InfeasibleError",
    "InvalidArgumentError",
    "MimoCCError",
    "MulticastProblem",
    "NumericDomainError",
    "Placement",
    "ProblemTooLargeError",
    "RateCurve",
    "RateResult",
    "SCAConfig",
    "SolverFailure",
    "SystemParams",
    "TrialResult",
    "beta_bound",
    "build_placement",
    "build_schedule",
    "dof_max",
    "dof_quick",
    "estimate_slope",
    "exact_symmetric_rate",
    "logdet_hermitian_psd",
    "rank_bound",
    "rate_curve",
    "remark1_solve",
    "run_trial",
    "sample_channels",
    "sca_solve",
    "subpacketization",
    "verify_decodability",
    "waterfilling_capacity",
]
