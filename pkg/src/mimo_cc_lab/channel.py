"""Seeded Rayleigh channel sampling and Hermitian log-determinants.

Each user's channel is drawn from its own Philox (counter-based) stream keyed
on ``(seed, user)``, so ``H_k`` depends only on the seed and the user label:
sampling a subset of users, or the same users in a different order, yields
identical matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import InvalidArgumentError, NumericDomainError

HERMITIAN_RTOL = 1e-10
PSD_RTOL = 1e-10


def _user_rng(seed: int, user: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, user])))


@dataclass(frozen=True)
class ChannelSet:
    """Per-user ``G x L`` complex channel matrices for an ordered set of users."""

    users: tuple[int, ...]
    H: np.ndarray  # (len(users), G, L), complex128
    seed: int

    @property
    def G(self) -> int:
        return self.H.shape[1]

    @property
    def L(self) -> int:
        return self.H.shape[2]

    def __getitem__(self, user: int) -> np.ndarray:
        return self.H[self.users.index(user)]

    def subset(self, users: Iterable[int]) -> "ChannelSet":
        users = tuple(sorted(users))
        idx = [self.users.index(u) for u in users]
        return ChannelSet(users, self.H[idx], self.seed)

    def scaled(self, c: complex) -> "ChannelSet":
        return ChannelSet(self.users, self.H * c, self.seed)

    def __eq__(self, other):
        if not isinstance(other, ChannelSet):
            return NotImplemented
        return (
            self.users == other.users
            and self.seed == other.seed
            and self.H.shape == other.H.shape
            and bool(np.array_equal(self.H, other.H))
        )

    __hash__ = None


def sample_channels(G: int, L: int, users: Iterable[int], seed: int) -> ChannelSet:
    """Draw i.i.d. CN(0, 1) channel matrices for ``users``.

    Parameters
    ----------
    G, L : int
        Receive and transmit dimensions.
    users : iterable of int
        User labels; stored in ascending order.
    seed : int
        64-bit seed, ``0 <= seed < 2**64``.
    """
    if G < 1 or L < 1:
        raise InvalidArgumentError(f"G and L must be >= 1, got G={G}, L={L}")
    users = tuple(sorted(set(users)))
    if not users:
        raise InvalidArgumentError("users must be non-empty")
    if not 0 <= seed < 2**64:
        raise InvalidArgumentError(f"seed must be a 64-bit unsigned integer, got {seed}")
    H = np.empty((len(users), G, L), dtype=np.complex128)
    for i, user in enumerate(users):
        z = _user_rng(seed, user).standard_normal((2, G, L))
        H[i] = (z[0] + 1j * z[1]) / np.sqrt(2.0)
    return ChannelSet(users, H, seed)


def check_hermitian_psd(M: np.ndarray) -> np.ndarray:
    """Validate ``M`` and return its exactly Hermitian part."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NumericDomainError(f"expected a square matrix, got shape {M.shape}")
    scale = max(np.abs(M).max(initial=0.0), np.finfo(float).tiny)
    if np.abs(M - M.conj().T).max(initial=0.0) > HERMITIAN_RTOL * scale:
        raise NumericDomainError("matrix is not Hermitian within tolerance")
    M = (M + M.conj().T) / 2
    tr = abs(np.trace(M).real)
    lam_min = np.linalg.eigvalsh(M)[0] if M.size else 0.0
    if lam_min < -PSD_RTOL * max(tr, np.finfo(float).tiny):
        raise NumericDomainError(f"matrix is indefinite (smallest eigenvalue {lam_min:.3e})")
    return M


def logdet_hermitian_psd(M: np.ndarray) -> float:
    """Base-2 log-determinant of a Hermitian PSD matrix via Cholesky.

    Singular PSD input returns ``-inf``.
    """
    M = check_hermitian_psd(M)
    try:
        C = np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        lam = np.linalg.eigvalsh(M)
        if lam[0] <= 0:
            return -np.inf
        return float(np.sum(np.log2(lam)))
    return float(2.0 * np.sum(np.log2(np.diagonal(C).real)))
