"""Estimation, prediction and support-recovery scores, and their replicate summaries."""

from dataclasses import dataclass

import numpy as np

from .linalg import InvalidInputError


@dataclass(frozen=True)
class FitScore:
    er_c: float
    er_xc: float
    fpr: float
    fnr: float
    runtime_seconds: float = 0.0
    r_hat: int = -1

    def __post_init__(self):
        if not (0 <= self.fpr <= 1 and 0 <= self.fnr <= 1):
            raise InvalidInputError("selection rates must lie in [0, 1]")


SCORE_FIELDS = ("er_c", "er_xc", "fpr", "fnr", "runtime_seconds")


def _pair(A, B):
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise InvalidInputError(f"shape mismatch: {A.shape} vs {B.shape}")
    return A, B


def estimation_error(C_hat, C_star):
    """||C_hat - C*||_F^2 / (pq)."""
    C_hat, C_star = _pair(C_hat, C_star)
    return float(np.sum((C_hat - C_star) ** 2) / C_star.size)


def prediction_error(X, C_hat, C_star):
    """||X (C_hat - C*)||_F^2 / (nq)."""
    C_hat, C_star = _pair(C_hat, C_star)
    X = np.asarray(X, dtype=float)
    if X.shape[1] != C_star.shape[0]:
        raise InvalidInputError(f"X has {X.shape[1]} columns, C has {C_star.shape[0]} rows")
    R = X @ (C_hat - C_star)
    return float(np.sum(R**2) / (X.shape[0] * C_star.shape[1]))


def selection_rates(estimated, true, p):
    """Pooled (FPR, FNR) over the first len(true) layers.

    Missing estimated layers count as empty supports; extra ones are ignored.
    """
    r = len(true)
    est = list(estimated)[:r] + [()] * max(0, r - len(estimated))
    tp = fp = fn = tn = 0
    for e, t in zip(est, true):
        e_mask = np.zeros(p, dtype=bool)
        t_mask = np.zeros(p, dtype=bool)
        e_mask[np.asarray(list(e), dtype=int)] = True
        t_mask[np.asarray(list(t), dtype=int)] = True
        tp += int(np.sum(e_mask & t_mask))
        fp += int(np.sum(e_mask & ~t_mask))
        fn += int(np.sum(~e_mask & t_mask))
        tn += int(np.sum(~e_mask & ~t_mask))
    fpr = fp / (tn + fp) if tn + fp else 0.0
    fnr = fn / (tp + fn) if tp + fn else 0.0
    return fpr, fnr


def score_fit(model, truth, X, runtime_seconds=0.0):
    fpr, fnr = selection_rates(model.supports(truth.r_star), truth.supports, truth.U.shape[0])
    return FitScore(
        er_c=estimation_error(model.C_hat, truth.C),
        er_xc=prediction_error(X, model.C_hat, truth.C),
        fpr=fpr,
        fnr=fnr,
        runtime_seconds=runtime_seconds,
        r_hat=model.r_hat,
    )


def summarize(scores):
    """Sample mean and sample standard deviation of each score field."""
    scores = list(scores)
    if not scores:
        raise InvalidInputError("cannot summarize an empty list of scores")
    out = {}
    for name in SCORE_FIELDS:
        vals = np.array([getattr(s, name) for s in scores], dtype=float)
        # sorting keeps the summary independent of replicate order
        vals.sort()
        sd = float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0
        out[name] = (float(np.mean(vals)), sd)
    return out
