"""Cache placement, delivery-schedule construction and decodability checking.

Users are labelled ``1..K``. A subfile index (cache set) is a sorted tuple of
``t`` user labels; a user caches subfile ``P`` of every file iff it belongs to
``P``. During delivery, every ``Omega``-subset of users is served by one
transmission that carries an XOR codeword for each of its ``(t+1)``-subsets.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from math import comb
from typing import Mapping, Sequence

from .errors import InvalidArgumentError

MAX_USERS = 32

UserSet = tuple[int, ...]


def _check_int(name: str, value, lo: int | None = None) -> None:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidArgumentError(f"{name} must be an integer, got {value!r}")
    if lo is not None and value < lo:
        raise InvalidArgumentError(f"{name} must be >= {lo}, got {value}")


def _check_users_and_gain(K: int, t: int) -> None:
    _check_int("K", K, 1)
    _check_int("t", t, 0)
    if K > MAX_USERS:
        raise InvalidArgumentError(f"K must be <= {MAX_USERS}, got {K}")
    if t >= K:
        raise InvalidArgumentError(f"t must satisfy t < K, got t={t}, K={K}")


def _check_omega(K: int, t: int, omega: int, L: int | None = None) -> None:
    _check_int("omega", omega)
    hi = K if L is None else min(K, t + L)
    if omega < t + 1:
        raise InvalidArgumentError(f"omega must be >= t+1 = {t + 1}, got {omega}")
    if omega > hi:
        bound = "K" if L is None or K <= t + L else "t+L"
        raise InvalidArgumentError(f"omega must be <= {bound} = {hi}, got {omega}")


@dataclass(frozen=True)
class SystemParams:
    """Scenario parameters.

    Parameters
    ----------
    K : int
        Number of users.
    L : int
        Transmit spatial multiplexing gain.
    G : int
        Receive spatial multiplexing gain.
    t : int
        Coded-caching gain ``K*M/N``.
    N0 : float
        Noise variance (linear).
    P_T : float
        Transmit power budget (linear).
    """

    K: int
    L: int
    G: int
    t: int
    N0: float = 1.0
    P_T: float = 1.0

    def __post_init__(self):
        _check_users_and_gain(self.K, self.t)
        _check_int("L", self.L, 1)
        _check_int("G", self.G, 1)
        if not self.N0 > 0:
            raise InvalidArgumentError(f"N0 must be > 0, got {self.N0}")
        if not self.P_T > 0:
            raise InvalidArgumentError(f"P_T must be > 0, got {self.P_T}")

    @property
    def memory_ratio(self) -> float:
        """Cache size over library size, ``M/N = t/K``."""
        return self.t / self.K

    @property
    def omega_range(self) -> range:
        return range(self.t + 1, min(self.K, self.t + self.L) + 1)

    def theta(self, omega: int) -> int:
        return subpacketization(self.K, self.t, omega)

    def mac_size(self, omega: int) -> int:
        """Number of codewords each served user decodes, ``C(omega-1, t)``."""
        _check_omega(self.K, self.t, omega, self.L)
        return comb(omega - 1, self.t)


def subpacketization(K: int, t: int, omega: int) -> int:
    """Subpacketization level ``C(K, t) * C(K-t-1, omega-t-1)``."""
    _check_users_and_gain(K, t)
    _check_omega(K, t, omega)
    return comb(K, t) * comb(K - t - 1, omega - t - 1)


def subsets(users: Sequence[int], size: int) -> list[UserSet]:
    """All ``size``-subsets of ``users`` in lexicographic order."""
    return list(itertools.combinations(sorted(users), size))


@dataclass(frozen=True, order=True)
class SubpacketId:
    """Subpacket ``q`` of subfile ``cache_set`` of the file requested by ``file_owner``."""

    file_owner: int
    cache_set: UserSet
    q: int

    def __post_init__(self):
        if self.file_owner in self.cache_set:
            raise InvalidArgumentError(
                f"user {self.file_owner} caches subfile {self.cache_set} already"
            )
        if self.q < 1:
            raise InvalidArgumentError(f"subpacket index must be >= 1, got {self.q}")


@dataclass(frozen=True)
class Codeword:
    """XOR of one subpacket per member of ``group``."""

    group: UserSet
    payload: tuple[tuple[int, SubpacketId], ...]

    def __post_init__(self):
        if len(self.payload) != len(self.group):
            raise InvalidArgumentError("codeword needs exactly one payload entry per group member")
        for user, sp in self.payload:
            expected = tuple(u for u in self.group if u != user)
            if user not in self.group or sp.file_owner != user or sp.cache_set != expected:
                raise InvalidArgumentError(f"payload entry {user}: {sp} does not match group {self.group}")


@dataclass(frozen=True)
class Transmission:
    served: UserSet
    codewords: tuple[Codeword, ...]


@dataclass(frozen=True)
class DeliverySchedule:
    K: int
    t: int
    omega: int
    theta: int
    transmissions: tuple[Transmission, ...]

    @property
    def n_codewords(self) -> int:
        return sum(len(tr.codewords) for tr in self.transmissions)

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "t": self.t,
            "omega": self.omega,
            "theta": self.theta,
            "transmissions": [
                {
                    "served": list(tr.served),
                    "codewords": [
                        [
                            {"user": user, "cache_set": list(sp.cache_set), "q": sp.q}
                            for user, sp in cw.payload
                        ]
                        for cw in tr.codewords
                    ],
                }
                for tr in self.transmissions
            ],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: Mapping) -> "DeliverySchedule":
        transmissions = []
        for tr in data["transmissions"]:
            codewords = []
            for cw in tr["codewords"]:
                payload = tuple(
                    (e["user"], SubpacketId(e["user"], tuple(e["cache_set"]), e["q"])) for e in cw
                )
                group = tuple(sorted(user for user, _ in payload))
                codewords.append(Codeword(group, payload))
            transmissions.append(Transmission(tuple(tr["served"]), tuple(codewords)))
        return cls(data["K"], data["t"], data["omega"], data["theta"], tuple(transmissions))


@dataclass(frozen=True)
class Placement:
    """Per-user cached subfile indices, identical for every file of the library."""

    K: int
    t: int
    cached: tuple[frozenset, ...]  # cached[k-1] = set of cache sets held by user k

    def caches(self, user: int, cache_set: UserSet, file=None) -> bool:
        # the file argument is accepted for clarity; placement ignores it
        return cache_set in self.cached[user - 1]

    def cached_fraction(self, user: int) -> float:
        return len(self.cached[user - 1]) / comb(self.K, self.t)


def build_placement(K: int, t: int) -> Placement:
    """User ``k`` stores subfile ``P`` of every file iff ``k`` is in ``P``."""
    _check_users_and_gain(K, t)
    all_sets = subsets(range(1, K + 1), t)
    cached = tuple(frozenset(P for P in all_sets if k in P) for k in range(1, K + 1))
    return Placement(K, t, cached)


def build_schedule(params: SystemParams, omega: int) -> DeliverySchedule:
    """Enumerate all transmissions and their XOR codewords.

    Served sets and multicast groups are visited in lexicographic order and
    subpacket indices are drawn from a per ``(user, cache_set)`` counter, so
    the schedule is byte-stable and every subpacket is sent exactly once.
    """
    K, t = params.K, params.t
    _check_omega(K, t, omega, params.L)
    counters: dict[tuple[int, UserSet], int] = {}
    transmissions = []
    for served in subsets(range(1, K + 1), omega):
        codewords = []
        for group in itertools.combinations(served, t + 1):
            payload = []
            for user in group:
                cache_set = tuple(u for u in group if u != user)
                q = counters.get((user, cache_set), 0) + 1
                counters[(user, cache_set)] = q
                payload.append((user, SubpacketId(user, cache_set, q)))
            codewords.append(Codeword(group, tuple(payload)))
        transmissions.append(Transmission(served, tuple(codewords)))
    return DeliverySchedule(K, t, omega, subpacketization(K, t, omega), tuple(transmissions))


@dataclass
class VerificationReport:
    passed: bool
    recovered: dict[int, list[tuple[UserSet, int]]] = field(default_factory=dict)
    failure: str | None = None

    def __bool__(self) -> bool:
        return self.passed


def verify_decodability(
    schedule: DeliverySchedule,
    placement: Placement,
    demand: Sequence | Mapping | None = None,
) -> VerificationReport:
    """Simulate XOR decoding of every codeword at every group member.

    Parameters
    ----------
    schedule : DeliverySchedule
    placement : Placement
        Must be built from the same ``(K, t)`` as ``schedule``.
    demand : sequence or mapping, optional
        File requested by each user (``demand[k-1]`` for a sequence, ``demand[k]``
        for a mapping). Defaults to all-distinct demands. Placement is uniform
        over files, so repeated demands decode exactly like distinct ones.

    Returns
    -------
    VerificationReport
        ``passed`` is True iff each user recovers every subpacket ``(P, q)``
        with ``k not in P`` of its requested file exactly once. Otherwise
        ``failure`` names the first missing, duplicated or undecodable item.
    """
    K, t = schedule.K, schedule.t
    if (placement.K, placement.t) != (K, t):
        raise InvalidArgumentError("schedule and placement were built for different (K, t)")
    if demand is None:
        demand = {k: k for k in range(1, K + 1)}
    elif not isinstance(demand, Mapping):
        demand = {k: demand[k - 1] for k in range(1, K + 1)}

    recovered: dict[int, list[tuple[UserSet, int]]] = {k: [] for k in range(1, K + 1)}
    failure = None
    for i, tr in enumerate(schedule.transmissions):
        for cw in tr.codewords:
            for user, sp in cw.payload:
                # interference from the other XOR terms must be cache-resident
                for other, other_sp in cw.payload:
                    if other == user:
                        continue
                    if not placement.caches(user, other_sp.cache_set, demand[other]):
                        if failure is None:
                            failure = (
                                f"user {user} cannot cancel {other_sp} in transmission {i} "
                                f"(group {cw.group})"
                            )
                recovered[user].append((sp.cache_set, sp.q))

    per_file = comb(K - t - 1, schedule.omega - t - 1)
    for k in range(1, K + 1):
        got = recovered[k]
        seen = set()
        for item in got:
            if item in seen and failure is None:
                failure = f"user {k} (file {demand[k]}) receives subpacket {item} more than once"
            seen.add(item)
        if failure is not None:
            continue
        for P in subsets([u for u in range(1, K + 1) if u != k], t):
            for q in range(1, per_file + 1):
                if (P, q) not in seen:
                    failure = f"user {k} (file {demand[k]}) misses subpacket cache_set={P}, q={q}"
                    break
            if failure is not None:
                break
        if failure is None and len(seen) != comb(K - 1, t) * per_file:
            extra = sorted(seen)[-1]
            failure = f"user {k} (file {demand[k]}) receives unexpected subpacket {extra}"
    return VerificationReport(failure is None, recovered, failure)
