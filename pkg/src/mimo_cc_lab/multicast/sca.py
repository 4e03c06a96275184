"""Successive convex approximation for the symmetric multicast rate."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError, SolverFailure
from .problem import CovarianceSet, MulticastProblem, RateResult, exact_symmetric_rate
from .subproblem import BarrierStats, build_sca_subproblem, solve_subproblem

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SCAConfig:
    er_sca: float = 1e-4
    max_iter: int = 200
    restarts: int = 1
    base_seed: int = 0
    tol: float = 1e-5  # subproblem suboptimality (bits)

    def __post_init__(self):
        if not self.er_sca > 0:
            raise InvalidArgumentError(f"er_sca must be > 0, got {self.er_sca}")
        if self.max_iter < 1 or self.restarts < 1:
            raise InvalidArgumentError("max_iter and restarts must be >= 1")


def _initial_point(problem: MulticastProblem, restart: int, base_seed: int) -> CovarianceSet:
    if restart == 0:
        return CovarianceSet.isotropic(problem)
    rng = np.random.default_rng([base_seed, restart])
    return CovarianceSet.random(problem, rng)


def _run_once(problem, init, config, backend, stats):
    """One SCA trajectory from ``init``; returns (covs, trace, iterations, converged)."""
    K_bar = init
    R_bar = exact_bar = exact_symmetric_rate(problem, K_bar).rate
    trace = []
    converged = False
    iterations = 0
    last_step = None
    for it in range(1, config.max_iter + 1):
        sub = build_sca_subproblem(problem, K_bar)
        try:
            covs, R = solve_subproblem(
                sub, config.tol, warm=stats.state, gap_hint=last_step, backend=backend, stats=stats
            )
        except SolverFailure as exc:
            if it == 1:
                raise
            log.warning("SCA stopped at iteration %d: %s", it, exc)
            break
        iterations = it
        # K_bar is feasible for the subproblem with value exact_bar; never move
        # to a worse point because of solver tolerance
        if R < exact_bar:
            covs, R = K_bar, exact_bar
        trace.append(R)
        last_step = abs(R - R_bar)
        K_bar, R_bar = covs, R
        exact_bar = exact_symmetric_rate(problem, K_bar).rate
        if last_step <= config.er_sca:
            converged = True
            break
    return K_bar, trace, iterations, converged


def sca_solve(
    problem: MulticastProblem,
    config: SCAConfig | None = None,
    *,
    backend: str | None = None,
) -> tuple[RateResult, CovarianceSet]:
    """Maximize the symmetric codeword rate by successive convex approximation.

    Each iteration linearizes the interference terms at the current
    covariances and solves the resulting convex problem; iterations stop once
    the surrogate objective changes by at most ``config.er_sca``. The first
    restart starts from the isotropic point, later ones from seeded random
    covariances. The reported rate is always the exact MAC-region rate at the
    final covariances, best over restarts.
    """
    config = config or SCAConfig()
    best = None
    failures = []
    for restart in range(config.restarts):
        init = _initial_point(problem, restart, config.base_seed)
        stats = BarrierStats()
        try:
            covs, trace, iterations, converged = _run_once(problem, init, config, backend, stats)
        except SolverFailure as exc:
            failures.append(exc)
            continue
        result = exact_symmetric_rate(problem, covs)
        result.iterations = iterations
        result.converged = converged
        result.trace = trace
        log.debug(
            "restart %d: rate %.6f after %d iterations (%d Newton steps)",
            restart, result.rate, iterations, stats.newton_steps,
        )
        if best is None or result.rate > best[0].rate:
            best = (result, covs)
    if best is None:
        raise SolverFailure(
            f"all {config.restarts} SCA restarts failed: {failures[-1]}",
            failures[-1].best,
            failures[-1].rate,
        )
    return best


def remark1_solve(
    problem: MulticastProblem,
    tol: float = 1e-5,
    *,
    backend: str | None = None,
) -> tuple[RateResult, CovarianceSet]:
    """Single convex solve for the interference-free case of one multicast group.

    Maximizes ``min_k log2|I + H_k K H_k^H / N0|`` subject to ``tr K <= P_T``.
    """
    if problem.n_groups != 1:
        raise InvalidArgumentError(
            f"the interference-free solver needs exactly one multicast group, got {problem.n_groups}"
        )
    sub = build_sca_subproblem(problem, CovarianceSet.isotropic(problem))
    covs, R = solve_subproblem(sub, tol, backend=backend)
    result = exact_symmetric_rate(problem, covs)
    result.iterations = 1
    result.trace = [R]
    return result, covs
