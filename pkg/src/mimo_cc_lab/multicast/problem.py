"""Multicast problem structure, covariance sets and exact rate evaluation."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import NamedTuple

import numpy as np

from ..cc_core import UserSet, subsets
from ..channel import ChannelSet, logdet_hermitian_psd
from ..errors import InvalidArgumentError, NumericDomainError, ProblemTooLargeError

MAX_MAC_SIZE = 12


@dataclass(frozen=True)
class MulticastProblem:
    """One transmission interval: served users, their channels and multicast groups.

    Build instances with :meth:`from_channels`.
    """

    channels: ChannelSet
    t: int
    N0: float
    P_T: float
    groups: tuple[UserSet, ...]
    S_k: dict[int, tuple[int, ...]] = field(repr=False)  # user -> indices into groups
    S_bar_k: dict[int, tuple[int, ...]] = field(repr=False)

    @classmethod
    def from_channels(cls, channels: ChannelSet, t: int, N0: float, P_T: float) -> "MulticastProblem":
        users = channels.users
        if not 0 <= t < len(users):
            raise InvalidArgumentError(f"t must satisfy 0 <= t < |served set| = {len(users)}, got {t}")
        if not N0 > 0 or not P_T > 0:
            raise InvalidArgumentError(f"N0 and P_T must be positive, got N0={N0}, P_T={P_T}")
        groups = tuple(subsets(users, t + 1))
        S_k = {k: tuple(i for i, T in enumerate(groups) if k in T) for k in users}
        S_bar_k = {k: tuple(i for i, T in enumerate(groups) if k not in T) for k in users}
        return cls(channels, t, float(N0), float(P_T), groups, S_k, S_bar_k)

    @property
    def users(self) -> tuple[int, ...]:
        return self.channels.users

    @property
    def omega(self) -> int:
        return len(self.users)

    @property
    def L(self) -> int:
        return self.channels.L

    @property
    def G(self) -> int:
        return self.channels.G

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @property
    def mac_size(self) -> int:
        return comb(self.omega - 1, self.t)

    def with_power(self, P_T: float) -> "MulticastProblem":
        return MulticastProblem.from_channels(self.channels, self.t, self.N0, P_T)


@dataclass(frozen=True)
class CovarianceSet:
    """One ``L x L`` transmit covariance per multicast group (stacked)."""

    K: np.ndarray  # (n_groups, L, L) complex128

    @property
    def total_power(self) -> float:
        return float(np.trace(self.K, axis1=1, axis2=2).real.sum())

    def __getitem__(self, i: int) -> np.ndarray:
        return self.K[i]

    def __len__(self) -> int:
        return self.K.shape[0]

    def validate(self, P_T: float, rtol: float = 1e-8) -> None:
        """Raise :class:`NumericDomainError` unless Hermitian PSD and within budget."""
        if np.abs(self.K - self.K.conj().swapaxes(1, 2)).max(initial=0) > 1e-10 * max(1.0, P_T):
            raise NumericDomainError("covariance is not Hermitian")
        lam = np.linalg.eigvalsh(self.K).min(initial=0.0)
        if lam < -rtol * P_T:
            raise NumericDomainError(f"covariance is indefinite (eigenvalue {lam:.3e})")
        if self.total_power > P_T * (1 + rtol):
            raise NumericDomainError(f"power {self.total_power} exceeds budget {P_T}")

    @classmethod
    def zeros(cls, problem: MulticastProblem) -> "CovarianceSet":
        return cls(np.zeros((problem.n_groups, problem.L, problem.L), dtype=np.complex128))

    @classmethod
    def isotropic(cls, problem: MulticastProblem) -> "CovarianceSet":
        """Equal power ``P_T / (|S| L)`` on every antenna of every group."""
        scale = problem.P_T / (problem.n_groups * problem.L)
        K = np.broadcast_to(scale * np.eye(problem.L), (problem.n_groups, problem.L, problem.L))
        return cls(np.array(K, dtype=np.complex128))

    @classmethod
    def random(cls, problem: MulticastProblem, rng: np.random.Generator) -> "CovarianceSet":
        """Complex Wishart draws rescaled to the isotropic per-group trace."""
        nS, L = problem.n_groups, problem.L
        X = (rng.standard_normal((nS, L, L)) + 1j * rng.standard_normal((nS, L, L))) / np.sqrt(2)
        K = X @ X.conj().swapaxes(1, 2)
        K *= (problem.P_T / nS) / np.trace(K, axis1=1, axis2=2).real[:, None, None]
        return cls((K + K.conj().swapaxes(1, 2)) / 2)


@dataclass
class RateResult:
    """Outcome of a rate evaluation or optimization.

    ``mac`` maps each user to its binding MAC constraint as
    ``(tuple of groups, rate)``; ``trace`` holds the per-iteration objective
    of the convexified problem (empty for a plain evaluation).
    """

    rate: float
    mac: dict[int, tuple[tuple[UserSet, ...], float]]
    iterations: int = 0
    converged: bool = True
    trace: list[float] = field(default_factory=list)


class MacLayout(NamedTuple):
    """Every MAC constraint of a problem shape, users and groups by position.

    Row ``c`` belongs to user position ``cuser[c]`` and decodes the groups
    ``subsets[c]``; ``umask[c]`` flags those groups plus the interferers of
    that user, ``qmask[u]`` flags the interferers of user ``u`` alone.
    """

    cuser: np.ndarray  # (C,) int64
    subsets: tuple[tuple[int, ...], ...]
    umask: np.ndarray  # (C, nS) uint8
    qmask: np.ndarray  # (omega, nS) uint8
    w: np.ndarray  # (C,) 1/|B|


@lru_cache(maxsize=64)
def mac_layout(omega: int, t: int) -> MacLayout:
    groups = list(itertools.combinations(range(omega), t + 1))
    nS = len(groups)
    qmask = np.array([[u not in T for T in groups] for u in range(omega)], dtype=np.uint8).reshape(omega, nS)
    cuser, subs, umask, w = [], [], [], []
    for u in range(omega):
        own = [i for i, T in enumerate(groups) if u in T]
        if len(own) > MAX_MAC_SIZE:
            raise ProblemTooLargeError(
                f"each user decodes {len(own)} codewords; more than {MAX_MAC_SIZE} would need "
                f"{2 ** len(own) - 1} rate constraints"
            )
        for r in range(1, len(own) + 1):
            for B in itertools.combinations(own, r):
                row = qmask[u].copy()
                row[list(B)] = 1
                cuser.append(u)
                subs.append(B)
                umask.append(row)
                w.append(1.0 / r)
    layout = MacLayout(
        np.array(cuser, dtype=np.int64),
        tuple(subs),
        np.array(umask, dtype=np.uint8).reshape(len(cuser), nS),
        qmask,
        np.array(w),
    )
    for arr in (layout.cuser, layout.umask, layout.qmask, layout.w):
        arr.setflags(write=False)
    return layout


def enumerate_mac_subsets(problem: MulticastProblem, k: int) -> list[tuple[int, ...]]:
    """Non-empty subsets of ``S_k`` (group indices), by size then lexicographically."""
    if k not in problem.S_k:
        raise InvalidArgumentError(f"user {k} is not served in this problem")
    own = problem.S_k[k]
    if len(own) > MAX_MAC_SIZE:
        raise ProblemTooLargeError(
            f"user {k} decodes {len(own)} codewords; more than {MAX_MAC_SIZE} would need "
            f"{2 ** len(own) - 1} rate constraints"
        )
    return [B for r in range(1, len(own) + 1) for B in itertools.combinations(own, r)]


def interference_covariance(problem: MulticastProblem, covs: CovarianceSet, k: int) -> np.ndarray:
    """``N0 I + H_k (sum of covariances of groups not containing k) H_k^H``."""
    H = problem.channels[k]
    Q = problem.N0 * np.eye(problem.G, dtype=np.complex128)
    idx = list(problem.S_bar_k[k])
    if idx:
        Q = Q + H @ covs.K[idx].sum(axis=0) @ H.conj().T
    return Q


def _logdet2_batch(M: np.ndarray) -> np.ndarray:
    """Base-2 log-determinants of a stack of Hermitian PSD matrices."""
    try:
        C = np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        # some member is singular or invalid: validate one by one
        return np.array([logdet_hermitian_psd(m) for m in M])
    return 2.0 * np.log2(np.diagonal(C, axis1=-2, axis2=-1).real).sum(axis=-1)


def exact_symmetric_rate(problem: MulticastProblem, covs: CovarianceSet) -> RateResult:
    """Largest common codeword rate inside every served user's MAC region.

    ``min_k min_B (1/|B|) log2 det(I + H_k K_B H_k^H Q_k^-1)``, evaluated as
    ``log2|Q_k + H_k K_B H_k^H| - log2|Q_k|`` with Cholesky factorizations.
    """
    K = covs.K
    if K.shape != (problem.n_groups, problem.L, problem.L):
        raise InvalidArgumentError(
            f"expected covariances of shape {(problem.n_groups, problem.L, problem.L)}, got {K.shape}"
        )
    if np.abs(K - K.conj().swapaxes(1, 2)).max() > 1e-10 * max(1.0, np.abs(K).max()):
        raise NumericDomainError("covariance is not Hermitian")
    lay = mac_layout(problem.omega, problem.t)
    H = problem.channels.H
    eye = problem.N0 * np.eye(problem.G)
    HH = H.conj().swapaxes(1, 2)
    Q = H @ np.einsum("ut,tab->uab", lay.qmask, K) @ HH + eye
    Hc = H[lay.cuser]
    S = Hc @ np.einsum("ct,tab->cab", lay.umask, K) @ HH[lay.cuser] + eye
    values = np.maximum(0.0, lay.w * (_logdet2_batch(S) - _logdet2_batch(Q)[lay.cuser]))

    mac = {}
    for u, k in enumerate(problem.users):
        rows = np.flatnonzero(lay.cuser == u)
        c = rows[np.argmin(values[rows])]
        mac[k] = (tuple(problem.groups[i] for i in lay.subsets[c]), float(values[c]))
    return RateResult(float(values.min()), mac)
