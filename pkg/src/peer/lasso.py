"""Univariate-response Lasso: coordinate descent, lambda grids and GIC tuning.

The objective is ``n^-1 ||y - X u||_2^2 + lam ||u||_1``. With
``standardize=True`` the solver works on columns rescaled to norm sqrt(n) and
maps the coefficients back, so the penalty acts on the standardized scale.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .linalg import InvalidInputError


@dataclass(frozen=True)
class LassoOptions:
    coord_tol: float = 1e-7
    max_sweeps: int = 1000
    kkt_tol: float = 1e-6
    warm_start: np.ndarray | None = None

    def __post_init__(self):
        if not (self.coord_tol > 0 and self.kkt_tol > 0):
            raise InvalidInputError("tolerances must be positive")
        if self.max_sweeps < 1:
            raise InvalidInputError("max_sweeps must be >= 1")


@dataclass(frozen=True)
class LassoFit:
    coef: np.ndarray
    lam: float
    objective: float
    kkt_violation: float
    converged: bool
    sweeps: int

    @property
    def support(self):
        return np.flatnonzero(self.coef)


def _prepare(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise InvalidInputError(f"X {X.shape} and y {y.shape} are not conformable")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise InvalidInputError("X and y must be finite")
    norms = np.sqrt(np.einsum("ij,ij->j", X, X))
    if np.any(norms == 0):
        raise InvalidInputError(f"zero-norm design column(s): {np.flatnonzero(norms == 0).tolist()}")
    return X, y, norms


def _design(X, norms, standardize):
    """Working design and per-column factor mapping working coefs to raw coefs."""
    if not standardize:
        return np.asfortranarray(X), np.ones(X.shape[1])
    scale = np.sqrt(X.shape[0]) / norms
    return np.asfortranarray(X * scale), scale


def objective(X, y, u, lam):
    n = X.shape[0]
    res = y - X @ u
    return float(res @ res / n + lam * np.abs(u).sum())


def kkt_violation(X, y, u, lam):
    """Largest violation of the subgradient conditions of the objective."""
    n = X.shape[0]
    grad = 2.0 / n * (X.T @ (y - X @ u))
    nz = u != 0
    viol = np.where(nz, np.abs(grad - lam * np.sign(u)), np.maximum(np.abs(grad) - lam, 0.0))
    return float(viol.max()) if viol.size else 0.0


def _finish(Xw, y, w, lam, sweeps, converged, opts):
    # tighten the coordinate tolerance until the KKT conditions hold
    tol = opts.coord_tol
    kkt = kkt_violation(Xw, y, w, lam)
    while kkt > opts.kkt_tol and tol > 1e-15:
        tol *= 1e-2
        coefs, extra, conv = _kernels.cd_path(Xw, y, np.array([lam]), w, tol, opts.max_sweeps)
        w = coefs[0]
        sweeps += int(extra[0])
        converged = bool(conv[0])
        kkt = kkt_violation(Xw, y, w, lam)
    return w, sweeps, converged and kkt <= opts.kkt_tol, kkt


def lasso_cd(X, y, lam, opts=None, standardize=False):
    """Solve the Lasso at a single ``lam`` by cyclic coordinate descent."""
    opts = opts or LassoOptions()
    if not lam >= 0:
        raise InvalidInputError(f"lambda must be >= 0, got {lam}")
    X, y, norms = _prepare(X, y)
    Xw, scale = _design(X, norms, standardize)
    w0 = np.zeros(X.shape[1]) if opts.warm_start is None else np.asarray(opts.warm_start, float) / scale
    coefs, sweeps, conv = _kernels.cd_path(Xw, y, np.array([float(lam)]), w0, opts.coord_tol, opts.max_sweeps)
    w, total, converged, kkt = _finish(Xw, y, coefs[0], float(lam), int(sweeps[0]), bool(conv[0]), opts)
    return LassoFit(w * scale, float(lam), objective(Xw, y, w, lam), kkt, converged, total)


def lambda_max(X, y, standardize=False):
    X, y, norms = _prepare(X, y)
    Xw, _ = _design(X, norms, standardize)
    n = X.shape[0]
    top = float(np.max(np.abs(Xw.T @ y)))
    # slack so the kernel's own dot products, rounded differently, still give u = 0
    return 2.0 * top / n * (1.0 + 1e-12)


def lambda_path(X, y, grid_size=100, ratio=1e-3, standardize=False):
    """Log-spaced descending grid from lambda_max down to ``ratio * lambda_max``."""
    if grid_size < 2:
        raise InvalidInputError("grid_size must be >= 2")
    if not 0 < ratio < 1:
        raise InvalidInputError("ratio must lie in (0, 1)")
    top = lambda_max(X, y, standardize)
    if top == 0:
        return np.array([0.0])
    return np.geomspace(top, ratio * top, grid_size)


def lasso_path(X, y, lambdas, opts=None, standardize=False, dfmax=None, dev_stop=None):
    """Warm-started solutions along ``lambdas``, raw-scale coefficients (k x p).

    The path stops after the first fit whose support exceeds ``dfmax`` or whose
    explained fraction 1 - rss/||y||^2 reaches ``dev_stop``; only the k
    lambdas actually solved are returned.
    """
    opts = opts or LassoOptions()
    lambdas = np.asarray(lambdas, dtype=float)
    X, y, norms = _prepare(X, y)
    Xw, scale = _design(X, norms, standardize)
    w0 = np.zeros(X.shape[1]) if opts.warm_start is None else np.asarray(opts.warm_start, float) / scale
    rss_floor = -1.0 if dev_stop is None else (1.0 - dev_stop) * float(y @ y)
    coefs, sweeps, conv = _kernels.cd_path(
        Xw, y, lambdas, w0, opts.coord_tol, opts.max_sweeps,
        -1 if dfmax is None else int(dfmax), rss_floor)
    return coefs * scale, sweeps, conv


def gic_criterion(X, y, coefs, p=None):
    """GIC value for each row of ``coefs``: log(rss/n) + |support| (log p)(log log n) / n."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    n = X.shape[0]
    p = X.shape[1] if p is None else p
    if n < 3:
        raise InvalidInputError("GIC needs n >= 3 so that log log n > 0")
    coefs = np.atleast_2d(coefs)
    res = y[:, None] - X @ coefs.T
    rss = np.einsum("ij,ij->j", res, res)
    df = np.count_nonzero(coefs, axis=1)
    zero = rss <= 1e-28 * max(float(y @ y), 1.0)
    with np.errstate(divide="ignore"):
        crit = np.log(np.where(zero, 1.0, rss) / n) + df * np.log(p) * np.log(np.log(n)) / n
    crit[zero] = -np.inf
    return crit, df


def gic_select(X, y, lambdas, n=None, p=None, opts=None, standardize=False, dfmax=None, dev_stop=None):
    """Pick the lambda minimizing GIC over the grid; ties go to the larger lambda.

    Returns ``(lam, fit)``. Zero-residual fits score -inf and the sparsest of
    them wins.
    """
    opts = opts or LassoOptions()
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.size == 0:
        raise InvalidInputError("empty lambda grid")
    if n is not None and n != np.shape(X)[0]:
        raise InvalidInputError(f"n={n} does not match X with {np.shape(X)[0]} rows")
    order = np.argsort(-lambdas, kind="stable")
    lambdas = lambdas[order]
    coefs, sweeps, conv = lasso_path(X, y, lambdas, opts, standardize, dfmax, dev_stop)
    lambdas = lambdas[: coefs.shape[0]]
    crit, df = gic_criterion(X, y, coefs, p)
    if np.isneginf(crit).any():
        cand = np.flatnonzero(np.isneginf(crit))
        best = cand[np.argmin(df[cand])]
    else:
        best = int(np.argmin(crit))
    lam = float(lambdas[best])
    X, y, norms = _prepare(X, y)
    Xw, scale = _design(X, norms, standardize)
    w, total, converged, kkt = _finish(Xw, y, coefs[best] / scale, lam, int(sweeps[best]), bool(conv[best]), opts)
    fit = LassoFit(w * scale, lam, objective(Xw, y, w, lam), kkt, converged, total)
    return lam, fit
