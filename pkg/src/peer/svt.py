"""Rank-constrained initializer: iterative singular value thresholding (hard impute)."""

import logging
from dataclasses import dataclass

import numpy as np

from .linalg import InvalidInputError, SvdTriplet, as_matrix, full_svd
from .masked import ObservedMatrix, column_mean_impute, combine

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SvtConfig:
    rank: int
    tol: float = 1e-4
    max_iter: int = 500

    def __post_init__(self):
        if int(self.rank) != self.rank or self.rank < 1:
            raise InvalidInputError(f"rank must be a positive integer, got {self.rank}")
        if not self.tol > 0:
            raise InvalidInputError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise InvalidInputError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass(frozen=True)
class InitEstimate:
    """Initial factors (Z, D, V) of the working response matrix.

    ``next_singular_value`` is the (r+1)-th singular value of the final
    completed response matrix, 0 when r = min(n, q).
    """

    svd: SvdTriplet
    iterations_used: int
    converged: bool
    final_relative_change: float
    next_singular_value: float = 0.0

    @property
    def Z(self):
        return self.svd.left

    @property
    def d(self):
        return self.svd.singular_values

    @property
    def V(self):
        return self.svd.right

    @property
    def rank(self):
        return self.svd.k


def _top(svd, r):
    s = svd.singular_values
    nxt = float(s[r]) if r < s.shape[0] else 0.0
    top = SvdTriplet(
        np.ascontiguousarray(svd.left[:, :r]),
        s[:r].copy(),
        np.ascontiguousarray(svd.right[:, :r]),
    )
    return top, nxt


def _check_rank(r, shape):
    if not 1 <= r <= min(shape):
        raise InvalidInputError(f"rank {r} must lie in [1, min(n, q) = {min(shape)}]")


def full_data_init(Y, r):
    """Direct SVD of a fully observed response matrix."""
    Y = as_matrix(Y, "Y")
    _check_rank(r, Y.shape)
    top, nxt = _top(full_svd(Y), r)
    return InitEstimate(top, 0, True, 0.0, nxt)


def svt_initialize(obs: ObservedMatrix, cfg: SvtConfig, debug=False):
    """Alternate rank-r truncation and refilling of the unobserved cells.

    Stops once ||A_new - A_old||_F / ||A_old||_F <= cfg.tol. Hitting
    ``cfg.max_iter`` returns the last iterate with ``converged=False``.
    """
    _check_rank(cfg.rank, obs.shape)
    if obs.m == 0:
        raise InvalidInputError("response matrix has no observed entries")
    r = cfg.rank
    Y = column_mean_impute(obs)
    A_new = Y
    floor = cfg.tol * 1e-3
    objective = np.inf
    change = np.inf
    converged = False
    it = 0
    top, nxt = None, 0.0
    while it < cfg.max_iter:
        it += 1
        A_old = A_new
        svd = full_svd(Y)
        top, nxt = _top(svd, r)
        A_new = top.reconstruct()
        Y = combine(obs, A_new)
        diff = np.linalg.norm(A_new - A_old)
        old = np.linalg.norm(A_old)
        change = 0.0 if old == 0 else diff / old
        if debug:
            resid = np.where(obs.mask, obs.values - A_new, 0.0)
            new_obj = np.sum(resid**2) / obs.m
            assert new_obj <= objective * (1 + 1e-10) + 1e-12, (it, new_obj, objective)
            objective = new_obj
        if change <= cfg.tol or diff < floor:
            converged = True
            break
    if not converged:
        log.warning("SVT stopped after %d iterations (relative change %.3e)", it, change)
    return InitEstimate(top, it, converged, float(change), nxt)
