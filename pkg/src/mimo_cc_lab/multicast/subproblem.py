"""Convexified (linearized-interference) subproblem and its interior-point solver.

At an expansion point ``K_bar`` every MAC constraint ``(k, B)`` becomes ::

    R <= (1/|B|) [ log2|N0 I + H_k (K_B + K_int) H_k^H|
                   + log2(e) tr(Q_bar^-1 H_k (K_bar_int - K_int) H_k^H)
                   - log2|Q_bar| ]

where ``K_int`` sums the covariances of groups not containing ``k``. The
right-hand side is concave in the covariances, equals the exact MAC bound at
``K = K_bar`` and lower-bounds it everywhere else.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .._kernels import BarrierData, get_backend
from ..errors import SolverFailure
from .problem import CovarianceSet, MulticastProblem, mac_layout

log = logging.getLogger(__name__)

LOG2E = 1.0 / np.log(2.0)


@dataclass(frozen=True)
class ConvexSubproblem:
    """Convex surrogate of the symmetric-rate problem at ``prev``.

    ``constraints[c] = (user, B)`` labels row ``c`` of ``data``.
    """

    problem: MulticastProblem
    prev: CovarianceSet
    constraints: tuple[tuple[int, tuple[int, ...]], ...]
    data: BarrierData

    @property
    def n_constraints(self) -> int:
        """Rate constraints plus the power constraint."""
        return len(self.constraints) + 1

    @property
    def linearized(self) -> bool:
        return bool(self.data.vmask.any())

    def constraint_values(self, covs: CovarianceSet, backend=None) -> np.ndarray:
        """Right-hand side of every rate constraint at ``covs`` (bits)."""
        return get_backend(backend).constraint_values(self.data, covs.K)

    def objective(self, covs: CovarianceSet, backend=None) -> float:
        """Largest ``R`` feasible for this subproblem at fixed ``covs``."""
        return float(self.constraint_values(covs, backend).min())


def build_sca_subproblem(problem: MulticastProblem, prev: CovarianceSet) -> ConvexSubproblem:
    """Linearize the interference log-determinants at ``prev``."""
    lay = mac_layout(problem.omega, problem.t)
    H = problem.channels.H
    HH = H.conj().swapaxes(1, 2)
    K_int = np.einsum("ut,tab->uab", lay.qmask, prev.K)
    Q_bar = H @ K_int @ HH + problem.N0 * np.eye(problem.G)
    C = np.linalg.cholesky(Q_bar)
    # A_u = log2(e) H^H Q_bar^-1 H, symmetrized; d_u = Re tr(A_u K_int) - log2|Q_bar|
    Y = np.linalg.solve(C, H)
    A = LOG2E * (Y.conj().swapaxes(1, 2) @ Y)
    A = (A + A.conj().swapaxes(1, 2)) / 2
    A[~lay.qmask.any(axis=1)] = 0
    d = np.einsum("uab,uba->u", A, K_int).real - 2.0 * np.log2(np.diagonal(C, axis1=1, axis2=2).real).sum(axis=1)
    data = BarrierData.create(H, lay.cuser, lay.umask, lay.qmask, A, d, lay.w, problem.N0, problem.P_T)
    users = problem.users
    labels = tuple((users[int(u)], B) for u, B in zip(lay.cuser, lay.subsets))
    return ConvexSubproblem(problem, prev, labels, data)


@dataclass
class BarrierState:
    """Final barrier iterate, reusable as a warm start for a nearby subproblem."""

    K: np.ndarray
    R: float
    t: float


@dataclass
class BarrierStats:
    newton_steps: int = 0
    outer_steps: int = 0
    solves: int = 0
    state: BarrierState | None = None


def _strict_interior(sub: ConvexSubproblem, start: CovarianceSet, shrink: float = 1e-3) -> np.ndarray:
    """Pull ``start`` slightly towards the isotropic point and below the budget."""
    iso = CovarianceSet.isotropic(sub.problem).K
    K = (1 - shrink) * start.K + shrink * iso
    K = (K + K.conj().swapaxes(1, 2)) / 2
    total = np.trace(K, axis1=1, axis2=2).real.sum()
    limit = (1 - shrink) * sub.problem.P_T
    if total > limit:
        K *= limit / total
    return K


def solve_subproblem(
    sub: ConvexSubproblem,
    tol: float = 1e-5,
    start: CovarianceSet | None = None,
    *,
    warm: BarrierState | None = None,
    gap_hint: float | None = None,
    mu: float = 20.0,
    max_newton: int = 400,
    backend: str | None = None,
    stats: BarrierStats | None = None,
) -> tuple[CovarianceSet, float]:
    """Maximize ``R`` subject to the surrogate constraints by a log-barrier method.

    Parameters
    ----------
    sub : ConvexSubproblem
    tol : float
        Target suboptimality in bits; the barrier path is followed until the
        duality-gap bound ``theta / t`` drops below ``tol / 10``.
    start : CovarianceSet, optional
        Cold start (defaults to ``sub.prev``); moved into the strict interior.
    warm : BarrierState, optional
        Barrier iterate of a previous, nearby subproblem. Used instead of
        ``start`` when it is strictly feasible here.
    gap_hint : float, optional
        Expected suboptimality of the warm start; sets the initial barrier
        parameter to ``theta / gap_hint``.
    mu : float
        Barrier parameter growth factor.
    max_newton : int
        Newton step cap for this solve.
    backend : {"cython", "python"}, optional
        Kernel implementation; defaults to the compiled one when available.
    stats : BarrierStats, optional
        Accumulates step counts; ``stats.state`` receives the final iterate.

    Returns
    -------
    covs : CovarianceSet
        Strictly feasible covariances.
    R : float
        Surrogate objective ``min_c g_c(covs)`` evaluated at ``covs``.

    Raises
    ------
    SolverFailure
        When the Newton budget is exhausted before the gap target is met;
        carries the best feasible point found.
    """
    kern = get_backend(backend)
    data = sub.data
    nS, L = sub.problem.n_groups, sub.problem.L
    theta = len(sub.constraints) + nS * L + 1
    gap_target = tol / 10
    t_final = theta / gap_target
    stats = stats if stats is not None else BarrierStats()
    stats.solves += 1

    if warm is not None and np.isfinite(kern.barrier_value(data, warm.K, warm.R, 1.0)):
        K, R = warm.K, warm.R
        t = min(warm.t, theta / max(gap_target, gap_hint or 0.0))
    else:
        K = _strict_interior(sub, sub.prev if start is None else start)
        g_min = float(kern.constraint_values(data, K).min())
        R = g_min - max(1e-2, 1e-2 * abs(g_min))
        t = min(theta / max(1.0, abs(R)), t_final)
    steps = 0

    def best_point():
        return CovarianceSet(K.copy()), float(kern.constraint_values(data, K).min())

    while True:
        K, R, n_steps, status = kern.center(data, K, R, t, max_newton - steps)
        steps += n_steps
        stats.newton_steps += n_steps
        stats.outer_steps += 1
        if status == 2:
            covs, val = best_point()
            raise SolverFailure("barrier method exceeded its Newton step budget", covs, val)
        if t >= t_final:
            break
        t = min(t * mu, t_final)

    stats.state = BarrierState(K, R, t)
    return best_point()
