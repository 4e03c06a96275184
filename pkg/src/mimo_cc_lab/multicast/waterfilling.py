import numpy as np

from ..errors import InvalidArgumentError


def waterfilling_powers(gains: np.ndarray, P_T: float, N0: float, tol: float = 1e-10) -> np.ndarray:
    """Water-filling allocation ``p_j = max(mu - N0/g_j, 0)`` with ``sum p_j = P_T``.

    The water level ``mu`` is found by bisection until the power balance is
    within ``tol * P_T``.
    """
    gains = np.asarray(gains, dtype=float)
    active = gains > 0
    if not active.any():
        raise InvalidArgumentError("channel has no non-zero eigenmode")
    floor = N0 / gains[active]
    lo, hi = floor.min(), floor.max() + P_T
    p = np.zeros_like(gains)
    for _ in range(200):
        mu = 0.5 * (lo + hi)
        total = np.maximum(mu - floor, 0).sum()
        if abs(total - P_T) <= tol * P_T:
            break
        if total > P_T:
            hi = mu
        else:
            lo = mu
    # the level is exact once the active set is known
    on = floor < mu
    mu = (P_T + floor[on].sum()) / on.sum()
    p[active] = np.maximum(mu - floor, 0)
    return p


def waterfilling_capacity(H: np.ndarray, P_T: float, N0: float) -> float:
    """Point-to-point MIMO capacity (bits/use) with water-filling over singular values."""
    H = np.atleast_2d(np.asarray(H))
    if not np.any(H):
        raise InvalidArgumentError("channel matrix must be non-zero")
    gains = np.linalg.svd(H, compute_uv=False) ** 2
    p = waterfilling_powers(gains, P_T, N0)
    return float(np.sum(np.log2(1 + p * gains / N0)))
