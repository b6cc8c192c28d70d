"""Pure-Python coordinate descent; mirrors the compiled kernel up to rounding."""

import numpy as np


def _sweep(X, r, u, norms2, idx, thr, n):
    dmax = 0.0
    for j in idx:
        nj = norms2[j]
        if nj == 0.0:
            continue
        xj = X[:, j]
        old = u[j]
        rho = float(xj @ r) + nj * old
        if rho > thr:
            new = (rho - thr) / nj
        elif rho < -thr:
            new = (rho + thr) / nj
        else:
            new = 0.0
        if new != old:
            delta = new - old
            r -= xj * delta
            u[j] = new
            w = abs(delta) * (nj / n) ** 0.5
            if w > dmax:
                dmax = w
    return dmax


def _reduce_support(X, u, n):
    """Shrink a support larger than n along null directions of X_A.

    X_A d = 0 leaves the fit unchanged; moving against sign(u_A)'d until a
    coordinate hits zero cannot raise the l1 norm.
    """
    while True:
        A = np.flatnonzero(u)
        if A.size <= n:
            return True
        B, c = A[:n], A[n]
        XB = X[:, B]
        try:
            L = np.linalg.cholesky(XB.T @ XB)
        except np.linalg.LinAlgError:
            return False
        idx = A[: n + 1]
        d = np.empty(n + 1)
        d[:n] = np.linalg.solve(L.T, np.linalg.solve(L, XB.T @ X[:, c]))
        d[n] = -1.0
        uA = u[idx]
        if np.sign(uA) @ d > 0:
            d = -d
        heading = (d != 0) & ((d > 0) != (uA > 0))
        ratio = np.full(n + 1, np.inf)
        ratio[heading] = np.abs(uA[heading] / d[heading])
        j = int(np.argmin(ratio))
        new = uA + ratio[j] * d
        new[j] = 0.0
        u[idx] = new


def _active_solve(X, y, r, u, n, thr):
    """Newton step on the nonzero coordinates, clipped at the first sign change."""
    A = np.flatnonzero(u)
    if A.size > n:
        ok = _reduce_support(X, u, n)
        r[:] = y - X @ u
        if not ok:
            return False
        A = np.flatnonzero(u)
    if A.size == 0:
        return False
    XA = X[:, A]
    uA = u[A]
    try:
        L = np.linalg.cholesky(XA.T @ XA)
    except np.linalg.LinAlgError:
        return False
    w = np.linalg.solve(L.T, np.linalg.solve(L, XA.T @ y - thr * np.sign(uA)))
    flip = (w > 0) != (uA > 0)
    cross = np.full(A.size, np.inf)
    cross[flip] = uA[flip] / (uA[flip] - w[flip])
    t = min(1.0, float(cross.min()))
    new = uA + t * (w - uA)
    new[flip & (cross <= t)] = 0.0
    u[A] = new
    r[:] = y - XA @ new
    return True


def cd_path(X, y, lambdas, u0, tol, max_sweeps, dfmax=-1, rss_floor=-1.0, solve_every=10):
    X = np.asfortranarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    u = np.array(u0, dtype=float, copy=True)
    norms2 = np.einsum("ij,ij->j", X, X)
    r = y - X @ u
    every = range(p)
    coefs = np.zeros((len(lambdas), p))
    sweeps = np.zeros(len(lambdas), dtype=np.int64)
    conv = np.zeros(len(lambdas), dtype=bool)
    for l, lam in enumerate(lambdas):
        thr = 0.5 * n * lam
        total = 0
        done = False
        while total < max_sweeps:
            dmax = _sweep(X, r, u, norms2, every, thr, n)
            total += 1
            if dmax < tol:
                done = True
                break
            active = np.flatnonzero(u)
            inner = 0
            while total < max_sweeps:
                dmax = _sweep(X, r, u, norms2, active, thr, n)
                total += 1
                inner += 1
                if dmax < tol:
                    break
                if solve_every > 0 and inner % solve_every == 0:
                    _active_solve(X, y, r, u, n, thr)
        coefs[l] = u
        sweeps[l] = total
        conv[l] = done
        if (dfmax >= 0 and np.count_nonzero(u) > dfmax) or float(r @ r) < rss_floor:
            return coefs[: l + 1], sweeps[: l + 1], conv[: l + 1]
    return coefs, sweeps, conv
