"""Observed-entry bookkeeping for a partially observed response matrix."""

import logging
from dataclasses import dataclass

import numpy as np

from .linalg import InvalidInputError

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ObservedMatrix:
    """Response matrix with a boolean observation mask (True = observed).

    Unobserved cells of ``values`` hold NaN and never enter arithmetic.
    """

    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        mask = np.array(self.mask, dtype=bool)
        if values.ndim != 2 or values.shape != mask.shape:
            raise InvalidInputError(f"values {values.shape} and mask {mask.shape} must be equal 2-d shapes")
        if not np.all(np.isfinite(values[mask])):
            raise InvalidInputError("observed cells must be finite")
        values[~mask] = np.nan
        values.flags.writeable = False
        mask.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def from_nan(cls, Y):
        """Treat NaN cells of ``Y`` as unobserved."""
        Y = np.asarray(Y, dtype=float)
        return cls(Y, ~np.isnan(Y))

    @classmethod
    def full(cls, Y):
        Y = np.asarray(Y, dtype=float)
        return cls(Y, np.ones(Y.shape, dtype=bool))

    @property
    def shape(self):
        return self.values.shape

    @property
    def m(self):
        return int(self.mask.sum())

    @property
    def fully_observed(self):
        return bool(self.mask.all())

    def observed_filled(self, fill=0.0):
        """Values with unobserved cells set to ``fill``."""
        out = np.where(self.mask, self.values, fill)
        return out


def _check_shape(A, mask):
    if np.shape(A) != np.shape(mask):
        raise InvalidInputError(f"shape mismatch: {np.shape(A)} vs mask {np.shape(mask)}")


def project_observed(A, mask):
    """Keep entries of ``A`` on observed cells, zero elsewhere."""
    A = np.asarray(A, dtype=float)
    mask = np.asarray(mask, dtype=bool)
    _check_shape(A, mask)
    return np.where(mask, A, 0.0)


def combine(obs, fill):
    """Observed cells from ``obs``, unobserved cells from ``fill``."""
    fill = np.asarray(fill, dtype=float)
    _check_shape(fill, obs.mask)
    return np.where(obs.mask, obs.values, fill)


def column_means(obs):
    """Mean of the observed entries of each column; 0 for a column with none."""
    counts = obs.mask.sum(axis=0)
    sums = obs.observed_filled().sum(axis=0)
    means = np.zeros(obs.shape[1])
    seen = counts > 0
    means[seen] = sums[seen] / counts[seen]
    return means


def column_mean_impute(obs):
    counts = obs.mask.sum(axis=0)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        log.warning("%d response column(s) have no observed entries; filling with 0", empty.size)
    return combine(obs, np.broadcast_to(column_means(obs), obs.shape))


def missing_rate(obs):
    n, q = obs.shape
    if n * q == 0:
        return 0.0
    return 1.0 - obs.m / (n * q)
