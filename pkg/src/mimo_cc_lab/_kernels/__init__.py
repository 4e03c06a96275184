"""Hot kernels of the subproblem solver.

The compiled Cython module is used when it was built; otherwise (or when the
environment variable ``MIMO_CC_LAB_PURE_PYTHON`` is set to a non-empty value
other than ``0``) the numpy implementation is used. Both expose
``constraint_values``, ``barrier_value`` and ``barrier_derivs`` with identical
semantics.
"""

import os
from typing import NamedTuple

import numpy as np

from . import _barrier_py


class BarrierData(NamedTuple):
    """Flattened, dtype-normalized arrays describing one convex subproblem."""

    H: np.ndarray  # (nu, G, L) complex128
    cuser: np.ndarray  # (C,) int64, user row of each constraint
    umask: np.ndarray  # (C, nS) uint8, groups inside the logdet
    vmask: np.ndarray  # (nu, nS) uint8, groups in the linearized term
    A: np.ndarray  # (nu, L, L) complex128, linearization matrices (bits)
    d: np.ndarray  # (nu,) float64, constant offsets (bits)
    w: np.ndarray  # (C,) float64, 1/|B|
    N0: float
    P_T: float

    @classmethod
    def create(cls, H, cuser, umask, vmask, A, d, w, N0, P_T):
        c = np.ascontiguousarray
        return cls(
            c(H, dtype=np.complex128),
            c(cuser, dtype=np.int64),
            c(umask, dtype=np.uint8),
            c(vmask, dtype=np.uint8),
            c(A, dtype=np.complex128),
            c(d, dtype=np.float64),
            c(w, dtype=np.float64),
            float(N0),
            float(P_T),
        )


def _load(name):
    if name == "python":
        return _barrier_py
    if name == "cython":
        from . import _barrier_cy

        return _barrier_cy
    raise ValueError(f"unknown kernel backend {name!r}")


def available_backends():
    names = ["python"]
    try:
        _load("cython")
    except ImportError:
        pass
    else:
        names.insert(0, "cython")
    return names


def get_backend(name=None):
    """Kernel module for ``name`` (``"cython"``, ``"python"`` or None for the default)."""
    return DEFAULT if name is None else _load(name)


if os.environ.get("MIMO_CC_LAB_PURE_PYTHON", "") not in ("", "0"):
    DEFAULT = _barrier_py
else:
    try:
        DEFAULT = _load("cython")
    except ImportError:
        DEFAULT = _barrier_py

BACKEND = "cython" if DEFAULT is not _barrier_py else "python"
