"""Numpy implementation of the log-barrier kernel (reference / fallback).

The barrier of the convexified multicast problem, for covariances ``K`` of
shape ``(nS, L, L)`` and the rate variable ``R``, is ::

    phi = -t*R - sum_c log(g_c(K) - R) - sum_T logdet(K_T) - log(P_T - sum_T tr K_T)

with ``g_c(K) = w_c * (log2 det(N0 I + H_u M_c H_u^H) - sum_{T in V_u} Re tr(A_u K_T) + d_u)``,
``M_c = sum_{T in U_c} K_T`` and ``u`` the user of constraint ``c``.
Derivatives are taken w.r.t. the real coordinates of every ``K_T``
(see :mod:`.hermitian`) followed by ``R``.
"""

import numpy as np

from .hermitian import basis, coords, from_coords

LOG2E = 1.0 / np.log(2.0)
REL_DEC_FLOOR = 1e-12


def _herm(X):
    return X.conj().swapaxes(-1, -2)


def _received(data, K):
    """Per-constraint ``W_c = N0 I + H M_c H^H`` and the channel rows used."""
    Hc = data.H[data.cuser]
    M = np.einsum("ct,tab->cab", data.umask, K)
    W = Hc @ M @ _herm(Hc)
    G = W.shape[-1]
    W[:, np.arange(G), np.arange(G)] += data.N0
    return Hc, W


def _linear_terms(data, K):
    # sum_{T in V_u} Re tr(A_u K_T), one value per user
    return np.einsum("ut,uab,tba->u", data.vmask, data.A, K).real


def constraint_values(data, K):
    """``g_c(K)`` for every constraint (bits); ``K`` is assumed PSD."""
    _, W = _received(data, K)
    _, logdet = np.linalg.slogdet(W)
    lin = _linear_terms(data, K)
    return data.w * (LOG2E * logdet - lin[data.cuser] + data.d[data.cuser])


def barrier_value(data, K, R, t):
    """Barrier value, or ``inf`` outside the strict interior."""
    slack_p = data.P_T - np.trace(K, axis1=1, axis2=2).real.sum()
    if not slack_p > 0:
        return np.inf
    try:
        CK = np.linalg.cholesky(K)
    except np.linalg.LinAlgError:
        return np.inf
    logdet_K = 2.0 * np.log(np.diagonal(CK, axis1=1, axis2=2).real).sum()
    s = constraint_values(data, K) - R
    if not np.all(s > 0):
        return np.inf
    return -t * R - np.log(s).sum() - logdet_K - np.log(slack_p)


def _superop(F, E):
    # M[c, i, j] = Re tr(F_c E_i F_c E_j)
    FE = np.einsum("cab,ibd->ciad", F, E)
    return np.einsum("ciab,cjba->cij", FE, FE).real


def barrier_derivs(data, K, R, t):
    """Gradient and Hessian of the barrier at a strictly feasible point."""
    nS, L = K.shape[0], K.shape[1]
    n2 = L * L
    E = basis(L)
    C = len(data.cuser)

    Hc, W = _received(data, K)
    Winv = np.linalg.inv(W)
    _, logdet = np.linalg.slogdet(W)
    F = _herm(Hc) @ Winv @ Hc
    lin = _linear_terms(data, K)
    g = data.w * (LOG2E * logdet - lin[data.cuser] + data.d[data.cuser])
    s = g - R
    if not np.all(s > 0):
        raise FloatingPointError("barrier evaluated outside the strict interior")

    Kinv = np.linalg.inv(K)
    slack_p = data.P_T - np.trace(K, axis1=1, axis2=2).real.sum()
    cI = coords(np.eye(L))

    # gradient of g_c w.r.t. every block, (C, nS, n2)
    cF = coords(F)
    cA = coords(data.A)
    gs = (data.w * LOG2E)[:, None, None] * data.umask[:, :, None] * cF[:, None, :]
    gs -= data.w[:, None, None] * data.vmask[data.cuser][:, :, None] * cA[data.cuser][:, None, :]

    grad = np.empty(nS * n2 + 1)
    grad[:-1] = (-(gs / s[:, None, None]).sum(axis=0) - coords(Kinv) + cI / slack_p).ravel()
    grad[-1] = -t + (1.0 / s).sum()

    Gfull = np.empty((C, nS * n2 + 1))
    Gfull[:, :-1] = gs.reshape(C, -1)
    Gfull[:, -1] = -1.0
    hess = (Gfull.T / s**2) @ Gfull

    coef = data.w * LOG2E / s
    MF = _superop(F, E)
    blocks = np.einsum("c,ct,cu,cij->tiuj", coef, data.umask, data.umask, MF)
    MK = _superop(Kinv, E)
    blocks[np.arange(nS), :, np.arange(nS), :] += MK
    blocks += np.einsum("i,j->ij", cI, cI)[None, :, None, :] / slack_p**2
    hess[:-1, :-1] += blocks.reshape(nS * n2, nS * n2)
    return grad, hess


def _newton_direction(grad, hess):
    # growing diagonal shift when the Hessian is numerically not PD
    scale = max(hess.diagonal().max(), 0.0)
    shift = 0.0
    while True:
        try:
            C = np.linalg.cholesky(hess + shift * np.eye(len(grad)))
            break
        except np.linalg.LinAlgError:
            shift = 1e-14 * scale if shift == 0 else 10 * shift
    y = np.linalg.solve(C, -grad)
    return np.linalg.solve(C.T, y)


def center(data, K, R, t, max_steps, dec_tol=2e-9):
    """Damped Newton centering of the barrier at fixed ``t``.

    Returns ``(K, R, steps, status)`` with status 0 when the Newton decrement
    fell below ``max(dec_tol, 1e-12 |phi|)``, 1 when the line search stalled (numerically
    centered) and 2 when ``max_steps`` ran out.
    """
    K = np.array(K, dtype=np.complex128)
    nS, L = K.shape[0], K.shape[1]
    steps = 0
    while steps < max_steps:
        grad, hess = barrier_derivs(data, K, R, t)
        step = _newton_direction(grad, hess)
        decrement = -float(grad @ step)
        steps += 1
        f0 = barrier_value(data, K, R, t)
        # below ~1e-12 |f| the Armijo test compares rounding noise
        if decrement <= max(dec_tol, REL_DEC_FLOOR * abs(f0)):
            return K, R, steps, 0
        dK = from_coords(step[:-1].reshape(nS, L * L), L)
        dR = step[-1]
        alpha = 1.0
        while alpha >= 1e-12:
            if barrier_value(data, K + alpha * dK, R + alpha * dR, t) <= f0 - 0.25 * alpha * decrement:
                break
            alpha *= 0.5
        else:
            return K, R, steps, 1
        K = K + alpha * dK
        R = R + alpha * dR
    return K, R, steps, 2
