"""Real coordinates for Hermitian matrices.

An ``L x L`` Hermitian matrix is identified with a vector of ``L*L`` reals
in the orthonormal basis (w.r.t. ``Re tr(A B)``) made of ``e_pp``,
``(e_pq + e_qp)/sqrt(2)`` and ``(i e_pq - i e_qp)/sqrt(2)`` for ``p < q``.
The coordinate ordering is: all diagonal entries, then for every ``p < q``
(row-major) the real part followed by the imaginary part.
"""

from functools import lru_cache

import numpy as np

SQRT2 = np.sqrt(2.0)


@lru_cache(maxsize=None)
def index_tables(L: int):
    """Row/column index arrays ``(diag, p, q)`` for the off-diagonal pairs."""
    diag = np.arange(L)
    p, q = np.triu_indices(L, 1)
    return diag, p, q


@lru_cache(maxsize=None)
def basis(L: int) -> np.ndarray:
    """``(L*L, L, L)`` complex array of basis matrices."""
    diag, p, q = index_tables(L)
    E = np.zeros((L * L, L, L), dtype=np.complex128)
    E[diag, diag, diag] = 1.0
    n_off = len(p)
    re = L + 2 * np.arange(n_off)
    im = re + 1
    E[re, p, q] = E[re, q, p] = 1 / SQRT2
    E[im, p, q] = 1j / SQRT2
    E[im, q, p] = -1j / SQRT2
    E.setflags(write=False)
    return E


def coords(X: np.ndarray) -> np.ndarray:
    """Coordinates of Hermitian ``X`` (``(..., L, L) -> (..., L*L)``)."""
    L = X.shape[-1]
    diag, p, q = index_tables(L)
    out = np.empty(X.shape[:-2] + (L * L,))
    out[..., :L] = X[..., diag, diag].real
    off = X[..., p, q]
    out[..., L::2] = SQRT2 * off.real
    out[..., L + 1::2] = SQRT2 * off.imag
    return out


def from_coords(x: np.ndarray, L: int) -> np.ndarray:
    """Inverse of :func:`coords`."""
    diag, p, q = index_tables(L)
    X = np.zeros(x.shape[:-1] + (L, L), dtype=np.complex128)
    X[..., diag, diag] = x[..., :L]
    off = (x[..., L::2] + 1j * x[..., L + 1::2]) / SQRT2
    X[..., p, q] = off
    X[..., q, p] = off.conj()
    return X
