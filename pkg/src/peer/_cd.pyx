# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Coordinate descent for n^-1 ||y - X u||^2 + lam ||u||_1 along a lambda path."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt
from scipy.linalg.cython_lapack cimport dposv

cnp.import_array()

GRAM_LIMIT = 1 << 24


cdef inline double _soft(double z, double t) noexcept nogil:
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


cdef inline double _dot(const double[::1, :] X, const double[::1, :] XtX, bint use_gram,
                        int j, int k, int n) noexcept nogil:
    cdef int i
    cdef double acc = 0.0
    if use_gram:
        return XtX[j, k]
    for i in range(n):
        acc += X[i, j] * X[i, k]
    return acc


cdef double _sweep(const double[::1, :] X, double[::1] r, double[::1] u,
                   const double[::1] norms2, const int[::1] idx, int m,
                   double thr, int n) noexcept nogil:
    cdef int a, i, j
    cdef double rho, old, new, delta, dmax = 0.0, w
    for a in range(m):
        j = idx[a]
        if norms2[j] == 0.0:
            continue
        old = u[j]
        rho = 0.0
        for i in range(n):
            rho += X[i, j] * r[i]
        rho += norms2[j] * old
        new = _soft(rho, thr) / norms2[j]
        if new != old:
            delta = new - old
            for i in range(n):
                r[i] -= X[i, j] * delta
            u[j] = new
            w = fabs(delta) * sqrt(norms2[j] / n)
            if w > dmax:
                dmax = w
    return dmax


cdef bint _reduce_support(const double[::1, :] X, const double[::1, :] XtX, bint use_gram,
                          double[::1] u, int p, int n,
                          double[::1, :] G, double[::1] b, int[::1] idx) noexcept nogil:
    """Shrink a support larger than n along null directions of X_A.

    With B the first n nonzero coordinates and c the next one, d = (w, -1)
    where X_B w = x_c spans a null direction of X_{B+c}. The fit is unchanged
    along d, and moving against sign(u)'d until a coordinate reaches zero
    cannot raise the l1 norm.
    """
    cdef int a, c, i, j, k, m, info = 0, one = 1, ld = <int>G.shape[0], hit
    cdef double acc, sd, t, ta, dj
    cdef char uplo = b'L'
    while True:
        m = 0
        for j in range(p):
            if u[j] != 0.0:
                if m <= n:
                    idx[m] = j
                m += 1
        if m <= n:
            return True
        c = idx[n]
        for a in range(n):
            j = idx[a]
            for k in range(a + 1):
                G[a, k] = _dot(X, XtX, use_gram, j, idx[k], n)
            b[a] = _dot(X, XtX, use_gram, j, c, n)
        dposv(&uplo, &n, &one, &G[0, 0], &ld, &b[0], &ld, &info)
        if info != 0:
            return False
        b[n] = -1.0
        sd = 0.0
        for a in range(n + 1):
            sd += b[a] if u[idx[a]] > 0 else -b[a]
        if sd > 0:
            for a in range(n + 1):
                b[a] = -b[a]
        t = 1e300
        hit = -1
        for a in range(n + 1):
            dj = b[a]
            if dj != 0.0 and (dj > 0) != (u[idx[a]] > 0):
                ta = fabs(u[idx[a]] / dj)
                if ta < t:
                    t = ta
                    hit = a
        if hit < 0:
            return False
        for a in range(n + 1):
            u[idx[a]] += t * b[a]
        u[idx[hit]] = 0.0


cdef bint _active_solve(const double[::1, :] X, const double[::1] y, double[::1] r,
                        const double[::1, :] XtX, const double[::1] Xty, bint use_gram,
                        double[::1] u, const int[::1] cand, int mc, double thr, int n,
                        double[::1, :] G, double[::1] b, int[::1] idx) noexcept nogil:
    """Newton step on the nonzero coordinates A of ``u``.

    Solves X_A'X_A w = X_A'y - thr*sign(u_A), the minimizer of the objective
    restricted to the current sign orthant, and moves from u_A towards w up
    to the first sign change; coordinates reaching zero are set to zero.
    Every accepted move lowers the objective.
    """
    cdef int a, c, i, j, k, info = 0, one = 1, m = 0, ld = <int>G.shape[0]
    cdef double acc, t = 1.0, ta
    cdef bint ok
    cdef char uplo = b'L'
    for a in range(mc):
        if u[cand[a]] != 0.0:
            m += 1
    if m > n:
        ok = _reduce_support(X, XtX, use_gram, u, <int>u.shape[0], n, G, b, idx)
        for i in range(n):
            r[i] = y[i]
        for j in range(<int>u.shape[0]):
            if u[j] != 0.0:
                for i in range(n):
                    r[i] -= X[i, j] * u[j]
        if not ok:
            return False
    m = 0
    for a in range(mc):
        if u[cand[a]] != 0.0:
            idx[m] = cand[a]
            m += 1
    if m == 0:
        return False
    for a in range(m):
        j = idx[a]
        for c in range(a + 1):
            G[a, c] = _dot(X, XtX, use_gram, j, idx[c], n)
        if use_gram:
            acc = Xty[j]
        else:
            acc = 0.0
            for i in range(n):
                acc += X[i, j] * y[i]
        b[a] = acc - thr if u[j] > 0 else acc + thr
    dposv(&uplo, &m, &one, &G[0, 0], &ld, &b[0], &ld, &info)
    if info != 0:
        return False
    for a in range(m):
        j = idx[a]
        if (b[a] > 0) != (u[j] > 0):
            ta = u[j] / (u[j] - b[a])
            if ta < t:
                t = ta
    for a in range(m):
        j = idx[a]
        if (b[a] > 0) != (u[j] > 0) and u[j] / (u[j] - b[a]) <= t:
            u[j] = 0.0
        else:
            u[j] = u[j] + t * (b[a] - u[j])
    for i in range(n):
        r[i] = y[i]
    for a in range(m):
        j = idx[a]
        if u[j] != 0.0:
            for i in range(n):
                r[i] -= X[i, j] * u[j]
    return True


def cd_path(X, y, lambdas, u0, double tol, int max_sweeps, int dfmax=-1, double rss_floor=-1.0,
            int solve_every=10):
    """Warm-started solutions for each lambda in order.

    Every ``solve_every`` active-set sweeps a support larger than n is first
    reduced along null directions, then the stationarity equations on the
    support are solved and the step is clipped at the first sign change.
    The following sweeps still decide convergence.
    The path stops early once the support exceeds ``dfmax`` or the residual
    sum of squares drops below ``rss_floor`` (negative values disable both).
    Returns (coefs[k, p], sweeps[k], converged[k]) for the k lambdas solved.
    """
    cdef double[::1, :] Xv = np.asfortranarray(X, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef double[::1] lam = np.ascontiguousarray(lambdas, dtype=np.float64)
    cdef int n = Xv.shape[0], p = Xv.shape[1], nl = lam.shape[0]
    cdef double[::1] u = np.array(u0, dtype=np.float64, copy=True)
    cdef double[::1] norms2 = np.einsum("ij,ij->j", Xv, Xv).astype(np.float64)
    cdef double[::1] r = np.asarray(yv) - np.asarray(Xv) @ np.asarray(u)
    cdef int mx = min(n, p)
    cdef double[::1, :] G = np.zeros((max(mx, 1), max(mx, 1)), order="F")
    cdef double[::1] b = np.zeros(mx + 1)
    coefs_arr = np.zeros((nl, p))
    sweeps_arr = np.zeros(nl, dtype=np.int64)
    conv_arr = np.zeros(nl, dtype=bool)
    cdef double[:, ::1] coefs = coefs_arr
    cdef long long[::1] sweeps = sweeps_arr
    cdef cnp.npy_bool[::1] conv = conv_arr.view(np.uint8)
    cdef int[::1] every = np.arange(p, dtype=np.int32)
    cdef int[::1] active = np.zeros(p, dtype=np.int32)
    cdef int[::1] nonzero = np.zeros(p, dtype=np.int32)
    # the Gram matrix is cached when it fits in GRAM_LIMIT entries
    cdef bint use_gram = p * <double>p <= GRAM_LIMIT
    cdef double[::1, :] XtX
    cdef double[::1] Xty
    if use_gram:
        XtX = np.asfortranarray(np.asarray(Xv).T @ np.asarray(Xv))
        Xty = np.asarray(Xv).T @ np.asarray(yv)
    else:
        XtX = np.zeros((1, 1), order="F")
        Xty = np.zeros(1)
    cdef int l, j, m, total, inner, i, nfit = 0
    cdef double thr, dmax, rss
    cdef bint done

    with nogil:
        for l in range(nl):
            thr = 0.5 * n * lam[l]
            total = 0
            done = False
            while total < max_sweeps:
                dmax = _sweep(Xv, r, u, norms2, every, p, thr, n)
                total += 1
                if dmax < tol:
                    done = True
                    break
                m = 0
                for j in range(p):
                    if u[j] != 0.0:
                        active[m] = j
                        m += 1
                inner = 0
                while total < max_sweeps:
                    dmax = _sweep(Xv, r, u, norms2, active, m, thr, n)
                    total += 1
                    inner += 1
                    if dmax < tol:
                        break
                    if solve_every > 0 and inner % solve_every == 0:
                        _active_solve(Xv, yv, r, XtX, Xty, use_gram, u, active, m, thr, n, G, b, nonzero)
            m = 0
            for j in range(p):
                coefs[l, j] = u[j]
                if u[j] != 0.0:
                    m += 1
            sweeps[l] = total
            conv[l] = done
            nfit = l + 1
            rss = 0.0
            for i in range(n):
                rss += r[i] * r[i]
            if (dfmax >= 0 and m > dfmax) or rss < rss_floor:
                break
    return coefs_arr[:nfit], sweeps_arr[:nfit], conv_arr[:nfit]
