"""Degrees-of-freedom analysis for the MIMO coded-caching delivery scheme.

All quantities are integers and computed exactly (``fractions.Fraction``
for the stream bound, so no floating-point floor errors).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, floor

from .errors import InfeasibleError, InvalidArgumentError


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise InvalidArgumentError(msg)


def _check_LGt(L: int, G: int, t: int) -> None:
    _require(isinstance(L, int) and L >= 1, f"L must be a positive integer, got {L!r}")
    _require(isinstance(G, int) and G >= 1, f"G must be a positive integer, got {G!r}")
    _require(isinstance(t, int) and t >= 0, f"t must be a non-negative integer, got {t!r}")


def beta_bound(L: int, G: int, t: int, omega: int) -> int:
    """Largest integer per-user stream count ``beta`` feasible at ``omega``.

    ``floor(min(G, L*C(omega-1,t) / (1 + (omega-t-1)*C(omega-1,t))))``;
    0 means no stream can be delivered interference-free at this ``omega``.
    """
    _check_LGt(L, G, t)
    _require(isinstance(omega, int) and omega >= t + 1, f"omega must be >= t+1 = {t + 1}, got {omega!r}")
    m = comb(omega - 1, t)
    return min(G, floor(Fraction(L * m, 1 + (omega - t - 1) * m)))


def rank_bound(L: int, G: int, t: int, omega: int, beta: int) -> int:
    """Upper bound on the rank of a user's equivalent channel, clipped at 0."""
    _check_LGt(L, G, t)
    _require(isinstance(omega, int) and omega >= t + 1, f"omega must be >= t+1 = {t + 1}, got {omega!r}")
    _require(isinstance(beta, int) and beta >= 1, f"beta must be >= 1, got {beta!r}")
    return max(0, min(G, (L - (omega - t - 1) * beta) * comb(omega - 1, t)))


@dataclass(frozen=True)
class DofSolution:
    omega_star: int
    beta_star: int
    dof: int
    beta_bound_trace: dict[int, int]

    def table(self) -> list[tuple[int, int, int]]:
        """Rows ``(omega, beta bound, omega*beta)`` in increasing ``omega``."""
        return [(o, b, o * b) for o, b in sorted(self.beta_bound_trace.items())]


def dof_max(L: int, G: int, t: int, omega: int | None = None) -> DofSolution:
    """Maximize ``omega * beta`` over ``t+1 <= omega <= t+L``.

    Ties go to the smallest ``omega`` (lowest subpacketization). Passing
    ``omega`` restricts the search to that single value.
    """
    _check_LGt(L, G, t)
    if omega is None:
        omegas = range(t + 1, t + L + 1)
    else:
        _require(
            isinstance(omega, int) and t + 1 <= omega <= t + L,
            f"omega must lie in [t+1, t+L] = [{t + 1}, {t + L}], got {omega!r}",
        )
        omegas = range(omega, omega + 1)

    trace = {o: beta_bound(L, G, t, o) for o in omegas}
    best = None
    for o, b in trace.items():
        if b >= 1 and (best is None or o * b > best[0] * best[1]):
            best = (o, b)
    if best is None:
        # cannot happen: (omega-t-1) <= L-1 makes the stream bound at least 1
        raise InfeasibleError(f"no stream is decodable for L={L}, G={G}, t={t}, omega in {list(omegas)}")
    return DofSolution(best[0], best[1], best[0] * best[1], trace)


def dof_quick(L: int, G: int, t: int) -> int:
    """Quick DoF metric obtained by fixing ``beta = G``: ``G*floor((L-1)/G) + G*(t+1)``.

    Note that this value is only attained when ``beta = G`` is actually
    feasible at ``omega = t + 1 + floor((L-1)/G)``; see :func:`quick_metric_feasible`.
    """
    _check_LGt(L, G, t)
    return G * ((L - 1) // G) + G * (t + 1)


def quick_metric_feasible(L: int, G: int, t: int) -> bool:
    """Whether ``beta = G`` satisfies the stream bound at the quick metric's ``omega``."""
    _check_LGt(L, G, t)
    omega = t + 1 + (L - 1) // G
    return omega <= t + L and beta_bound(L, G, t, omega) >= G
