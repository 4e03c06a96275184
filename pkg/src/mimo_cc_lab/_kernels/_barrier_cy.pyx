# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled log-barrier kernel; same contract as ``_barrier_py``.

Matrices are tiny (G, L <= ~8) so everything is written as explicit loops
over row-major buffers with a hand-rolled complex Cholesky.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, log, sqrt, INFINITY

ctypedef double complex dcomplex

cdef double LOG2E = 1.4426950408889634074
cdef double SQRT2 = 1.4142135623730950488
cdef double ISQRT2 = 0.70710678118654752440
cdef double REL_DEC_FLOOR = 1e-12


cdef int _cholesky(dcomplex* A, dcomplex* Lo, Py_ssize_t n) noexcept nogil:
    """Lower Cholesky factor of Hermitian ``A`` (row-major); -1 if not PD."""
    cdef Py_ssize_t i, j, k
    cdef double s, dj
    cdef dcomplex z
    for j in range(n):
        s = A[j * n + j].real
        for k in range(j):
            s -= Lo[j * n + k].real * Lo[j * n + k].real + Lo[j * n + k].imag * Lo[j * n + k].imag
        if not s > 0:
            return -1
        dj = sqrt(s)
        Lo[j * n + j] = dj
        for i in range(j):
            Lo[i * n + j] = 0
        for i in range(j + 1, n):
            z = A[i * n + j]
            for k in range(j):
                z = z - Lo[i * n + k] * Lo[j * n + k].conjugate()
            Lo[i * n + j] = z / dj
    return 0


cdef double _chol_logdet(dcomplex* Lo, Py_ssize_t n) noexcept nogil:
    cdef double acc = 0
    cdef Py_ssize_t i
    for i in range(n):
        acc += log(Lo[i * n + i].real)
    return 2.0 * acc


cdef void _chol_inverse(dcomplex* Lo, dcomplex* Ainv, dcomplex* work, Py_ssize_t n) noexcept nogil:
    """``Ainv = (Lo Lo^H)^-1`` using ``work`` (n*n) for ``Lo^-1``."""
    cdef Py_ssize_t i, j, k, k0
    cdef dcomplex z
    for j in range(n):
        for i in range(j):
            work[i * n + j] = 0
        work[j * n + j] = 1.0 / Lo[j * n + j]
        for i in range(j + 1, n):
            z = 0
            for k in range(j, i):
                z = z - Lo[i * n + k] * work[k * n + j]
            work[i * n + j] = z / Lo[i * n + i]
    for i in range(n):
        for j in range(n):
            z = 0
            k0 = i if i > j else j
            for k in range(k0, n):
                z = z + work[k * n + i].conjugate() * work[k * n + j]
            Ainv[i * n + j] = z


cdef void _coords(dcomplex* X, double* out, Py_ssize_t L) noexcept nogil:
    cdef Py_ssize_t p, q, idx = L
    for p in range(L):
        out[p] = X[p * L + p].real
    for p in range(L):
        for q in range(p + 1, L):
            out[idx] = SQRT2 * X[p * L + q].real
            out[idx + 1] = SQRT2 * X[p * L + q].imag
            idx += 2


cdef void _superop(dcomplex* F, double* out, dcomplex* X, double* col,
                   Py_ssize_t* bp, Py_ssize_t* bq, dcomplex* ba, int* bn,
                   Py_ssize_t L) noexcept nogil:
    """``out[i, j] = Re tr(F E_i F E_j)`` as the coordinates of ``F E_j F``."""
    cdef Py_ssize_t n2 = L * L
    cdef Py_ssize_t i, j, a, b, e, p, q
    cdef dcomplex alpha
    for j in range(n2):
        for a in range(n2):
            X[a] = 0
        for e in range(bn[j]):
            p = bp[2 * j + e]
            q = bq[2 * j + e]
            alpha = ba[2 * j + e]
            for a in range(L):
                for b in range(L):
                    X[a * L + b] = X[a * L + b] + alpha * F[a * L + p] * F[q * L + b]
        _coords(X, col, L)
        for i in range(n2):
            out[i * n2 + j] = col[i]


cdef void _basis_tables(Py_ssize_t L, Py_ssize_t* bp, Py_ssize_t* bq, dcomplex* ba, int* bn) noexcept nogil:
    cdef Py_ssize_t p, q, idx = L
    for p in range(L):
        bn[p] = 1
        bp[2 * p] = p
        bq[2 * p] = p
        ba[2 * p] = 1.0
    for p in range(L):
        for q in range(p + 1, L):
            bn[idx] = 2
            bp[2 * idx] = p
            bq[2 * idx] = q
            ba[2 * idx] = ISQRT2
            bp[2 * idx + 1] = q
            bq[2 * idx + 1] = p
            ba[2 * idx + 1] = ISQRT2
            bn[idx + 1] = 2
            bp[2 * idx + 2] = p
            bq[2 * idx + 2] = q
            ba[2 * idx + 2] = 1j * ISQRT2
            bp[2 * idx + 3] = q
            bq[2 * idx + 3] = p
            ba[2 * idx + 3] = -1j * ISQRT2
            idx += 2


cdef class _Workspace:
    """Scratch buffers sized for one ``(G, L)`` pair."""
    cdef public Py_ssize_t G, L
    cdef dcomplex[::1] M, HM, W, Wl, Winv, work, F, tmp, X
    cdef double[::1] cF, col, MF
    cdef Py_ssize_t[::1] bp, bq
    cdef dcomplex[::1] ba
    cdef int[::1] bn

    def __init__(self, Py_ssize_t G, Py_ssize_t L):
        cdef Py_ssize_t n2 = L * L, m = max(G, L)
        self.G = G
        self.L = L
        self.M = np.empty(n2, dtype=np.complex128)
        self.HM = np.empty(G * L, dtype=np.complex128)
        self.W = np.empty(m * m, dtype=np.complex128)
        self.Wl = np.empty(m * m, dtype=np.complex128)
        self.Winv = np.empty(m * m, dtype=np.complex128)
        self.work = np.empty(m * m, dtype=np.complex128)
        self.F = np.empty(n2, dtype=np.complex128)
        self.tmp = np.empty(G * L, dtype=np.complex128)
        self.X = np.empty(n2, dtype=np.complex128)
        self.cF = np.empty(n2, dtype=np.float64)
        self.col = np.empty(n2, dtype=np.float64)
        self.MF = np.empty(n2 * n2, dtype=np.float64)
        self.bp = np.empty(2 * n2, dtype=np.intp)
        self.bq = np.empty(2 * n2, dtype=np.intp)
        self.ba = np.empty(2 * n2, dtype=np.complex128)
        self.bn = np.empty(n2, dtype=np.intc)
        _basis_tables(L, &self.bp[0], &self.bq[0], &self.ba[0], &self.bn[0])


_workspaces = {}


cdef _Workspace _get_ws(Py_ssize_t G, Py_ssize_t L):
    key = (G, L)
    ws = _workspaces.get(key)
    if ws is None:
        ws = _Workspace(G, L)
        _workspaces[key] = ws
    return <_Workspace>ws


cdef int _received_logdet(const dcomplex[:, :, ::1] H, const dcomplex[:, :, ::1] K,
                          const cnp.uint8_t[:, ::1] umask, Py_ssize_t c, Py_ssize_t u,
                          double N0, _Workspace ws, double* logdet) noexcept nogil:
    """Factor ``W_c = N0 I + H_u M_c H_u^H`` into ``ws.Wl``; -1 if not PD."""
    cdef Py_ssize_t nS = K.shape[0], L = K.shape[1], G = H.shape[1]
    cdef Py_ssize_t T, a, b, g, h
    cdef dcomplex z
    for a in range(L * L):
        ws.M[a] = 0
    for T in range(nS):
        if umask[c, T]:
            for a in range(L):
                for b in range(L):
                    ws.M[a * L + b] = ws.M[a * L + b] + K[T, a, b]
    for g in range(G):
        for b in range(L):
            z = 0
            for a in range(L):
                z = z + H[u, g, a] * ws.M[a * L + b]
            ws.HM[g * L + b] = z
    for g in range(G):
        for h in range(G):
            z = 0
            for b in range(L):
                z = z + ws.HM[g * L + b] * H[u, h, b].conjugate()
            if g == h:
                z = z + N0
            ws.W[g * G + h] = z
    if _cholesky(&ws.W[0], &ws.Wl[0], G) != 0:
        return -1
    logdet[0] = _chol_logdet(&ws.Wl[0], G)
    return 0


cdef int _real_cholesky_solve(double* A, double* b, double* x, double* Lo, Py_ssize_t n) noexcept nogil:
    """Solve ``A x = b`` for symmetric PD ``A`` (row-major); -1 if not PD."""
    cdef Py_ssize_t i, j, k
    cdef double s
    for j in range(n):
        s = A[j * n + j]
        for k in range(j):
            s -= Lo[j * n + k] * Lo[j * n + k]
        if not s > 0:
            return -1
        Lo[j * n + j] = sqrt(s)
        for i in range(j + 1, n):
            s = A[i * n + j]
            for k in range(j):
                s -= Lo[i * n + k] * Lo[j * n + k]
            Lo[i * n + j] = s / Lo[j * n + j]
    for i in range(n):
        s = b[i]
        for k in range(i):
            s -= Lo[i * n + k] * x[k]
        x[i] = s / Lo[i * n + i]
    for i in range(n - 1, -1, -1):
        s = x[i]
        for k in range(i + 1, n):
            s -= Lo[k * n + i] * x[k]
        x[i] = s / Lo[i * n + i]
    return 0


cdef class _Problem:
    """Typed views of one :class:`BarrierData` plus scratch buffers."""
    cdef const dcomplex[:, :, ::1] H
    cdef const dcomplex[:, :, ::1] A
    cdef const cnp.int64_t[::1] cuser
    cdef const cnp.uint8_t[:, ::1] umask
    cdef const cnp.uint8_t[:, ::1] vmask
    cdef const double[::1] d
    cdef const double[::1] w
    cdef double N0, PT
    cdef Py_ssize_t nS, L, G, C, nu, n2, n
    cdef _Workspace ws
    cdef double[:, ::1] cA
    cdef double[::1] grad, row, lin, step, rhs
    cdef double[:, ::1] hess, hchol, hreg
    cdef Py_ssize_t[::1] nz, blk

    def __init__(self, data, Py_ssize_t nS, Py_ssize_t L):
        cdef Py_ssize_t u
        self.H = data.H
        self.A = data.A
        self.cuser = data.cuser
        self.umask = data.umask
        self.vmask = data.vmask
        self.d = data.d
        self.w = data.w
        self.N0 = data.N0
        self.PT = data.P_T
        self.nS = nS
        self.L = L
        self.G = self.H.shape[1]
        self.C = self.cuser.shape[0]
        self.nu = self.H.shape[0]
        self.n2 = L * L
        self.n = nS * self.n2 + 1
        self.ws = _get_ws(self.G, L)
        self.cA = np.empty((self.nu, self.n2))
        for u in range(self.nu):
            _coords(<dcomplex*>&self.A[u, 0, 0], &self.cA[u, 0], L)
        self.grad = np.empty(self.n)
        self.row = np.empty(self.n)
        self.lin = np.empty(self.nu)
        self.step = np.empty(self.n)
        self.rhs = np.empty(self.n)
        self.hess = np.empty((self.n, self.n))
        self.hchol = np.empty((self.n, self.n))
        self.hreg = np.empty((self.n, self.n))
        self.nz = np.empty(self.n, dtype=np.intp)
        self.blk = np.empty(nS, dtype=np.intp)


cdef void _user_linear(_Problem P, const dcomplex[:, :, ::1] K) noexcept:
    cdef Py_ssize_t u, T, a, b, L = P.L
    cdef double acc
    for u in range(P.nu):
        acc = 0
        for T in range(P.nS):
            if P.vmask[u, T]:
                for a in range(L):
                    for b in range(L):
                        acc += (P.A[u, a, b] * K[T, b, a]).real
        P.lin[u] = acc


cdef double _value(_Problem P, const dcomplex[:, :, ::1] K, double R, double t) noexcept:
    """Barrier value, ``INFINITY`` outside the strict interior."""
    cdef Py_ssize_t T, a, b, c, u, L = P.L
    cdef _Workspace ws = P.ws
    cdef double slack = P.PT, val, ld, s
    for T in range(P.nS):
        for a in range(L):
            slack -= K[T, a, a].real
    if not slack > 0:
        return INFINITY
    val = -t * R - log(slack)
    for T in range(P.nS):
        for a in range(L):
            for b in range(L):
                ws.W[a * L + b] = K[T, a, b]
        if _cholesky(&ws.W[0], &ws.Wl[0], L) != 0:
            return INFINITY
        val -= _chol_logdet(&ws.Wl[0], L)
    _user_linear(P, K)
    for c in range(P.C):
        u = P.cuser[c]
        if _received_logdet(P.H, K, P.umask, c, u, P.N0, ws, &ld) != 0:
            return INFINITY
        s = P.w[c] * (LOG2E * ld - P.lin[u] + P.d[u]) - R
        if not s > 0:
            return INFINITY
        val -= log(s)
    return val


cdef int _derivs(_Problem P, const dcomplex[:, :, ::1] K, double R, double t) noexcept:
    """Fill ``P.grad`` and ``P.hess``; -1 outside the strict interior."""
    cdef Py_ssize_t nS = P.nS, L = P.L, G = P.G, n2 = P.n2, n = P.n
    cdef Py_ssize_t c, u, T, T2, a, b, g, h, i, j, nnz, nblk
    cdef double ld, s, coef, slack, inv_s, inv_s2, wc
    cdef dcomplex z
    cdef _Workspace ws = P.ws
    cdef double[::1] gv = P.grad, row = P.row
    cdef double[:, ::1] hv = P.hess
    cdef Py_ssize_t[::1] nz = P.nz, blk = P.blk

    for i in range(n):
        gv[i] = 0
        for j in range(n):
            hv[i, j] = 0
    _user_linear(P, K)

    for c in range(P.C):
        u = P.cuser[c]
        wc = P.w[c]
        if _received_logdet(P.H, K, P.umask, c, u, P.N0, ws, &ld) != 0:
            return -1
        s = wc * (LOG2E * ld - P.lin[u] + P.d[u]) - R
        if not s > 0:
            return -1
        inv_s = 1.0 / s
        inv_s2 = inv_s * inv_s
        _chol_inverse(&ws.Wl[0], &ws.Winv[0], &ws.work[0], G)
        # F = H^H Winv H
        for g in range(G):
            for b in range(L):
                z = 0
                for h in range(G):
                    z = z + ws.Winv[g * G + h] * P.H[u, h, b]
                ws.tmp[g * L + b] = z
        for a in range(L):
            for b in range(L):
                z = 0
                for g in range(G):
                    z = z + P.H[u, g, a].conjugate() * ws.tmp[g * L + b]
                ws.F[a * L + b] = z
        _coords(&ws.F[0], &ws.cF[0], L)

        # gradient row of s_c and its support
        nnz = 0
        nblk = 0
        for T in range(nS):
            if P.umask[c, T] or P.vmask[u, T]:
                for i in range(n2):
                    row[T * n2 + i] = 0
                    if P.umask[c, T]:
                        row[T * n2 + i] += wc * LOG2E * ws.cF[i]
                    if P.vmask[u, T]:
                        row[T * n2 + i] -= wc * P.cA[u, i]
                    nz[nnz] = T * n2 + i
                    nnz += 1
            if P.umask[c, T]:
                blk[nblk] = T
                nblk += 1
        row[n - 1] = -1.0
        nz[nnz] = n - 1
        nnz += 1

        for i in range(nnz):
            gv[nz[i]] -= row[nz[i]] * inv_s
        for i in range(nnz):
            for j in range(nnz):
                hv[nz[i], nz[j]] += row[nz[i]] * row[nz[j]] * inv_s2

        coef = wc * LOG2E * inv_s
        _superop(&ws.F[0], &ws.MF[0], &ws.X[0], &ws.col[0],
                 &ws.bp[0], &ws.bq[0], &ws.ba[0], &ws.bn[0], L)
        for a in range(nblk):
            T = blk[a]
            for b in range(nblk):
                T2 = blk[b]
                for i in range(n2):
                    for j in range(n2):
                        hv[T * n2 + i, T2 * n2 + j] += coef * ws.MF[i * n2 + j]

    # -logdet(K_T) terms
    slack = P.PT
    for T in range(nS):
        for a in range(L):
            slack -= K[T, a, a].real
            for b in range(L):
                ws.W[a * L + b] = K[T, a, b]
        if _cholesky(&ws.W[0], &ws.Wl[0], L) != 0:
            return -1
        _chol_inverse(&ws.Wl[0], &ws.Winv[0], &ws.work[0], L)
        _coords(&ws.Winv[0], &ws.cF[0], L)
        for i in range(n2):
            gv[T * n2 + i] -= ws.cF[i]
        _superop(&ws.Winv[0], &ws.MF[0], &ws.X[0], &ws.col[0],
                 &ws.bp[0], &ws.bq[0], &ws.ba[0], &ws.bn[0], L)
        for i in range(n2):
            for j in range(n2):
                hv[T * n2 + i, T * n2 + j] += ws.MF[i * n2 + j]
    if not slack > 0:
        return -1

    # -log(P_T - sum tr K_T): coordinates of I are 1 on the diagonal entries
    for T in range(nS):
        for i in range(L):
            gv[T * n2 + i] += 1.0 / slack
            for T2 in range(nS):
                for j in range(L):
                    hv[T * n2 + i, T2 * n2 + j] += 1.0 / (slack * slack)
    gv[n - 1] -= t
    return 0


cdef double _newton_direction(_Problem P) noexcept:
    """``P.step = -hess^-1 grad``; returns the Newton decrement squared.

    A Hessian that is numerically not PD gets a growing diagonal shift.
    """
    cdef Py_ssize_t n = P.n, i, j
    cdef double shift = 0, scale = 0, dec = 0
    for i in range(n):
        P.rhs[i] = -P.grad[i]
        if P.hess[i, i] > scale:
            scale = P.hess[i, i]
    while _real_cholesky_solve(&P.hess[0, 0] if shift == 0 else &P.hreg[0, 0],
                               &P.rhs[0], &P.step[0], &P.hchol[0, 0], n) != 0:
        shift = 1e-14 * scale if shift == 0 else 10 * shift
        for i in range(n):
            for j in range(n):
                P.hreg[i, j] = P.hess[i, j]
            P.hreg[i, i] += shift
    for i in range(n):
        dec -= P.grad[i] * P.step[i]
    return dec


cdef void _move(_Problem P, const dcomplex[:, :, ::1] K, double alpha,
                dcomplex[:, :, ::1] out) noexcept:
    """``out = K + alpha * from_coords(P.step)``."""
    cdef Py_ssize_t T, p, q, idx, L = P.L, n2 = P.n2
    cdef dcomplex v
    for T in range(P.nS):
        for p in range(L):
            out[T, p, p] = K[T, p, p] + alpha * P.step[T * n2 + p]
        idx = L
        for p in range(L):
            for q in range(p + 1, L):
                v = (P.step[T * n2 + idx] + 1j * P.step[T * n2 + idx + 1]) * (alpha * ISQRT2)
                out[T, p, q] = K[T, p, q] + v
                out[T, q, p] = K[T, q, p] + v.conjugate()
                idx += 2


def _as_K(K_in):
    return np.ascontiguousarray(K_in, dtype=np.complex128)


def constraint_values(data, K_in):
    cdef const dcomplex[:, :, ::1] K = _as_K(K_in)
    cdef _Problem P = _Problem(data, K.shape[0], K.shape[1])
    cdef Py_ssize_t c, u
    cdef double ld
    _user_linear(P, K)
    out = np.empty(P.C)
    cdef double[::1] ov = out
    for c in range(P.C):
        u = P.cuser[c]
        if _received_logdet(P.H, K, P.umask, c, u, P.N0, P.ws, &ld) != 0:
            ov[c] = -INFINITY
        else:
            ov[c] = P.w[c] * (LOG2E * ld - P.lin[u] + P.d[u])
    return out


def barrier_value(data, K_in, double R, double t):
    cdef const dcomplex[:, :, ::1] K = _as_K(K_in)
    cdef _Problem P = _Problem(data, K.shape[0], K.shape[1])
    return _value(P, K, R, t)


def barrier_derivs(data, K_in, double R, double t):
    cdef const dcomplex[:, :, ::1] K = _as_K(K_in)
    cdef _Problem P = _Problem(data, K.shape[0], K.shape[1])
    if _derivs(P, K, R, t) != 0:
        raise FloatingPointError("barrier evaluated outside the strict interior")
    return np.asarray(P.grad).copy(), np.asarray(P.hess).copy()


def center(data, K_in, double R, double t, int max_steps, double dec_tol=2e-9):
    """Damped Newton centering of the barrier at fixed ``t``.

    Returns ``(K, R, steps, status)`` with status 0 when the Newton decrement
    fell below ``max(dec_tol, 1e-12 |phi|)``, 1 when the line search stalled (numerically
    centered) and 2 when ``max_steps`` ran out.
    """
    K_arr = np.array(K_in, dtype=np.complex128, order="C")
    trial_arr = np.empty_like(K_arr)
    cdef dcomplex[:, :, ::1] K = K_arr
    cdef dcomplex[:, :, ::1] Kt = trial_arr
    cdef _Problem P = _Problem(data, K.shape[0], K.shape[1])
    cdef int steps = 0
    cdef double dec, f0, alpha, dR
    while steps < max_steps:
        if _derivs(P, K, R, t) != 0:
            raise FloatingPointError("barrier evaluated outside the strict interior")
        dec = _newton_direction(P)
        steps += 1
        f0 = _value(P, K, R, t)
        # below ~1e-12 |f| the Armijo test compares rounding noise
        if dec <= dec_tol or dec <= REL_DEC_FLOOR * fabs(f0):
            return K_arr, R, steps, 0
        dR = P.step[P.n - 1]
        alpha = 1.0
        while alpha >= 1e-12:
            _move(P, K, alpha, Kt)
            if _value(P, Kt, R + alpha * dR, t) <= f0 - 0.25 * alpha * dec:
                break
            alpha *= 0.5
        else:
            return K_arr, R, steps, 1
        K_arr, trial_arr = trial_arr, K_arr
        K = K_arr
        Kt = trial_arr
        R += alpha * dR
    return K_arr, R, steps, 2
