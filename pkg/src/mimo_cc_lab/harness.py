"""Monte Carlo driver: symmetric-rate curves over an SNR grid.

A trial draws channels for all ``K_total`` users, solves the covariance
design of every ``omega``-user transmission and combines the per-transmission
rates into the symmetric rate ``K_total * Theta / sum_i 1/R_i`` (files per
channel use, in units of one file).
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .cc_core import SystemParams, subpacketization, subsets
from .channel import sample_channels
from .errors import DegenerateTrialError, InvalidArgumentError, SolverFailure
from .multicast import MulticastProblem, SCAConfig, remark1_solve, sca_solve

log = logging.getLogger(__name__)

N0 = 1.0
CSV_HEADER = ("snr_db", "rsym_mean", "rsym_stderr", "trials_ok", "trials_failed", "mean_sca_iters")
CONFIG_KEYS = frozenset({"L", "G", "t", "omega", "K_total", "snr_db", "trials", "seed", "er_sca", "max_iter", "restarts"})
CONFIG_DEFAULTS = {"trials": 100, "seed": 0, "er_sca": 1e-4, "max_iter": 200, "restarts": 1}


def snr_to_power(snr_db: float, N0: float = N0) -> float:
    """Transmit power giving ``P_T / N0 = 10^(snr_db/10)``."""
    return N0 * 10.0 ** (snr_db / 10.0)


@dataclass(frozen=True)
class ExperimentConfig:
    """One rate-curve experiment.

    ``params.K`` is the total number of users ``K_total``; ``params.P_T`` is
    overwritten per SNR point by :func:`rate_curve`.
    """

    params: SystemParams
    omega: int
    snr_grid_db: tuple[float, ...]
    trials: int = 100
    base_seed: int = 0
    sca: SCAConfig = field(default_factory=SCAConfig)
    output: str | None = None

    def __post_init__(self):
        grid = tuple(float(s) for s in self.snr_grid_db)
        object.__setattr__(self, "snr_grid_db", grid)
        if not grid:
            raise InvalidArgumentError("snr_grid_db must not be empty")
        if not all(math.isfinite(s) for s in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise InvalidArgumentError(f"snr_grid_db must be finite and strictly increasing, got {grid}")
        if int(self.trials) != self.trials or self.trials < 1:
            raise InvalidArgumentError(f"trials must be a positive integer, got {self.trials}")
        if not 0 <= self.base_seed < 2**64:
            raise InvalidArgumentError(f"seed must lie in [0, 2**64), got {self.base_seed}")
        p = self.params
        if not p.t + 1 <= self.omega <= min(p.K, p.t + p.L):
            raise InvalidArgumentError(
                f"omega must satisfy t+1 <= omega <= min(K_total, t+L) = {min(p.K, p.t + p.L)}, got {self.omega}"
            )

    @property
    def K_total(self) -> int:
        return self.params.K

    @property
    def theta(self) -> int:
        return subpacketization(self.params.K, self.params.t, self.omega)

    @classmethod
    def from_dict(cls, raw: dict, output: str | None = None) -> "ExperimentConfig":
        """Build from the JSON config layout (see :data:`CONFIG_KEYS`)."""
        unknown = set(raw) - CONFIG_KEYS
        if unknown:
            raise InvalidArgumentError(f"unknown config keys: {sorted(unknown)}")
        missing = {"L", "G", "t", "omega", "snr_db"} - set(raw)
        if missing:
            raise InvalidArgumentError(f"missing config keys: {sorted(missing)}")
        cfg = {**CONFIG_DEFAULTS, **raw}
        omega = cfg["omega"]
        params = SystemParams(K=cfg.get("K_total", omega), L=cfg["L"], G=cfg["G"], t=cfg["t"], N0=N0)
        snr = cfg["snr_db"]
        return cls(
            params=params,
            omega=omega,
            snr_grid_db=tuple(snr) if isinstance(snr, (list, tuple)) else (snr,),
            trials=cfg["trials"],
            base_seed=cfg["seed"],
            sca=SCAConfig(er_sca=cfg["er_sca"], max_iter=cfg["max_iter"], restarts=cfg["restarts"]),
            output=output,
        )

    @classmethod
    def from_json(cls, path: str | Path, output: str | None = None) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise InvalidArgumentError("config file must hold a JSON object")
        return cls.from_dict(raw, output)

    def to_dict(self) -> dict:
        p = self.params
        return {
            "L": p.L,
            "G": p.G,
            "t": p.t,
            "omega": self.omega,
            "K_total": p.K,
            "snr_db": list(self.snr_grid_db),
            "trials": self.trials,
            "seed": self.base_seed,
            "er_sca": self.sca.er_sca,
            "max_iter": self.sca.max_iter,
            "restarts": self.sca.restarts,
        }


@dataclass(frozen=True)
class TrialResult:
    """Outcome of one channel realization.

    ``rates`` holds ``R_i`` of every transmission in schedule order and
    ``iterations`` the mean SCA iteration count over transmissions.
    """

    rsym: float
    rates: tuple[float, ...]
    iterations: float
    converged: bool


def trial_seed(base_seed: int, snr_index: int, trial_index: int) -> int:
    """64-bit channel seed derived from ``(base_seed, snr_index, trial_index)``."""
    words = np.random.SeedSequence([base_seed, snr_index, trial_index]).generate_state(2, np.uint64)
    return int(words[0])


def run_trial(config: ExperimentConfig, seed: int, *, snr_db: float | None = None) -> TrialResult:
    """Symmetric rate of one channel realization.

    Parameters
    ----------
    config : ExperimentConfig
    seed : int
        Channel seed (see :func:`trial_seed`).
    snr_db : float, optional
        Overrides ``config.params.P_T`` with ``N0 * 10^(snr_db/10)``.

    Raises
    ------
    DegenerateTrialError
        If any transmission ends with a zero rate.
    SolverFailure
        If the covariance design of a transmission fails.
    """
    p = config.params
    P_T = p.P_T if snr_db is None else snr_to_power(snr_db, p.N0)
    users = list(range(1, p.K + 1))
    channels = sample_channels(p.G, p.L, users, seed)
    sca_config = replace(config.sca, base_seed=seed)
    rates, iters, converged = [], [], True
    for served in subsets(users, config.omega):
        problem = MulticastProblem.from_channels(channels.subset(served), p.t, p.N0, P_T)
        if config.omega == p.t + 1:
            result, _ = remark1_solve(problem, sca_config.tol)
        else:
            result, _ = sca_solve(problem, sca_config)
        if not result.rate > 0:
            raise DegenerateTrialError(f"zero rate for transmission to users {served} (seed {seed})")
        rates.append(result.rate)
        iters.append(result.iterations)
        converged &= result.converged
    rsym = p.K * config.theta / sum(1.0 / r for r in rates)
    return TrialResult(rsym, tuple(rates), float(np.mean(iters)), converged)


@dataclass(frozen=True)
class CurvePoint:
    snr_db: float
    rsym_mean: float
    rsym_stderr: float
    trials_ok: int
    trials_failed: int
    mean_sca_iters: float


@dataclass(frozen=True)
class RateCurve:
    """Aggregated symmetric rate per SNR point, in grid order."""

    points: tuple[CurvePoint, ...]
    config: ExperimentConfig

    @property
    def snr_db(self) -> np.ndarray:
        return np.array([pt.snr_db for pt in self.points])

    @property
    def mean(self) -> np.ndarray:
        return np.array([pt.rsym_mean for pt in self.points])

    @property
    def stderr(self) -> np.ndarray:
        return np.array([pt.rsym_stderr for pt in self.points])

    def point(self, snr_db: float) -> CurvePoint:
        for pt in self.points:
            if math.isclose(pt.snr_db, snr_db, rel_tol=0, abs_tol=1e-9):
                return pt
        raise InvalidArgumentError(f"{snr_db} dB is not on the curve's SNR grid {list(self.snr_db)}")

    def metadata(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "trials_failed": {pt.snr_db: pt.trials_failed for pt in self.points},
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for pt in self.points:
            row = asdict(pt)
            writer.writerow(
                f"{v:.9g}" if isinstance(v, float) else str(v) for v in (row[k] for k in CSV_HEADER)
            )
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")


def _trial_task(args):
    config, snr_index, trial_index = args
    seed = trial_seed(config.base_seed, snr_index, trial_index)
    snr = config.snr_grid_db[snr_index]
    try:
        return run_trial(config, seed, snr_db=snr)
    except (DegenerateTrialError, SolverFailure) as exc:
        log.warning("trial %d at %g dB failed: %s", trial_index, snr, exc)
        return None


def rate_curve(config: ExperimentConfig, *, workers: int = 1) -> RateCurve:
    """Mean and standard error of the symmetric rate at every SNR point.

    Trials are independent and may run in ``workers`` processes; results are
    aggregated in (SNR index, trial index) order, so the curve only depends
    on ``config``.

    Raises
    ------
    SolverFailure
        If every trial of some SNR point failed.
    """
    tasks = [(config, i, j) for i in range(len(config.snr_grid_db)) for j in range(config.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_trial_task, tasks, chunksize=max(1, len(tasks) // (8 * workers))))
    else:
        results = [_trial_task(task) for task in tasks]

    points = []
    for i, snr in enumerate(config.snr_grid_db):
        chunk = results[i * config.trials : (i + 1) * config.trials]
        ok = [r for r in chunk if r is not None]
        if not ok:
            raise SolverFailure(f"all {config.trials} trials failed at {snr} dB")
        rs = np.array([r.rsym for r in ok])
        stderr = float(rs.std(ddof=1) / math.sqrt(len(rs))) if len(rs) > 1 else 0.0
        points.append(
            CurvePoint(
                snr_db=snr,
                rsym_mean=float(rs.mean()),
                rsym_stderr=stderr,
                trials_ok=len(ok),
                trials_failed=len(chunk) - len(ok),
                mean_sca_iters=float(np.mean([r.iterations for r in ok])),
            )
        )
    return RateCurve(tuple(points), config)


def estimate_slope(curve: RateCurve, window: Sequence[float]) -> float:
    """Finite-difference slope ``dR_sym / dlog2(SNR)`` between two grid points.

    Units are rate per doubling of the SNR (3.01 dB), so a point-to-point
    scalar channel tends to 1.
    """
    if len(window) != 2 or window[0] == window[1]:
        raise InvalidArgumentError(f"window must hold two distinct SNR values, got {window}")
    lo, hi = sorted(window)
    a, b = curve.point(lo), curve.point(hi)
    return (b.rsym_mean - a.rsym_mean) / ((hi - lo) / 10.0 * math.log2(10.0))
