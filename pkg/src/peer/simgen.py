"""Synthetic data for the two simulation designs.

Study 1 has sparse left factors and dense, QR-orthonormalized right factors;
study 2 makes the right factors sparse as well, unnormalized unless
``normalize_v`` is set. The
design is AR(1)-correlated with the latent block X U* drawn as standard
normal. Every draw comes from a substream keyed by (seed, replicate, purpose),
so replicates can be generated in any order or in parallel.
"""

import json
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .linalg import (
    InvalidInputError,
    NumericError,
    ar1_covariance,
    cholesky_psd,
    orthonormal_complement,
    qr_orthonormalize,
)
from .masked import ObservedMatrix

PURPOSES = {"truth": 0, "design": 1, "noise": 2, "mask": 3}


@dataclass(frozen=True)
class SimScenario:
    study: int = 1
    n: int = 100
    p: int = 200
    q: int = 100
    r_star: int = 3
    s: int = 4
    s_u: int = 4
    s_v: int = 5
    Q_u: tuple = (1.0, -1.0)
    Q_v: tuple = ((-1.0, -0.3), (0.3, 1.0))
    snr: float = 0.5
    missing_rate: float = 0.1
    rho: float = 0.5
    normalize_v: bool = False
    seed: int = 0
    replicate_id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "Q_u", tuple(float(v) for v in self.Q_u))
        object.__setattr__(self, "Q_v", tuple(tuple(float(b) for b in iv) for iv in self.Q_v))
        self.validate()

    @property
    def s_left(self):
        return self.s if self.study == 1 else self.s_u

    def validate(self):
        if self.study not in (1, 2):
            raise InvalidInputError(f"study must be 1 or 2, got {self.study}")
        for name in ("n", "p", "q", "r_star", "s", "s_u", "s_v"):
            if int(getattr(self, name)) != getattr(self, name) or getattr(self, name) < 1:
                raise InvalidInputError(f"{name} must be a positive integer")
        if self.r_star * self.s_left > self.p:
            raise InvalidInputError(
                f"r_star * s = {self.r_star * self.s_left} exceeds p = {self.p}")
        if self.study == 2 and self.r_star * self.s_v > self.q:
            raise InvalidInputError(f"r_star * s_v = {self.r_star * self.s_v} exceeds q = {self.q}")
        if self.r_star > min(self.p, self.q):
            raise InvalidInputError("r_star cannot exceed min(p, q)")
        if not self.snr > 0:
            raise InvalidInputError("snr must be positive")
        if not 0 <= self.missing_rate < 1:
            raise InvalidInputError("missing_rate must lie in [0, 1)")
        if not self.Q_u or any(v == 0 for v in self.Q_u):
            raise InvalidInputError("Q_u must be a nonempty set of nonzero values")
        if not self.Q_v or any(lo > hi for lo, hi in self.Q_v):
            raise InvalidInputError("Q_v must be a nonempty union of intervals [lo, hi]")
        if not 0 <= self.seed < 2**64:
            raise InvalidInputError("seed must be an unsigned 64-bit integer")

    def to_dict(self):
        d = asdict(self)
        d["Q_u"] = list(self.Q_u)
        d["Q_v"] = [list(iv) for iv in self.Q_v]
        return d

    @classmethod
    def from_dict(cls, doc):
        known = {f.name for f in fields(cls)}
        extra = set(doc) - known
        if extra:
            raise InvalidInputError(f"unknown scenario field(s): {sorted(extra)}")
        return cls(**doc)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class GroundTruth:
    U: np.ndarray
    V: np.ndarray
    d: np.ndarray
    C: np.ndarray
    supports: list = field(default_factory=list)

    @property
    def r_star(self):
        return self.d.shape[0]


@dataclass(frozen=True)
class SimDataset:
    X: np.ndarray
    Y_full: np.ndarray
    obs: ObservedMatrix
    truth: GroundTruth
    sigma: float
    scenario: SimScenario | None = None


def rng_for(seed, replicate_id, purpose):
    """Independent generator for one (replicate, purpose) pair."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(replicate_id), PURPOSES[purpose]))
    return np.random.default_rng(ss)


def unif_values(rng, values, size):
    return rng.choice(np.asarray(values, dtype=float), size=size)


def unif_intervals(rng, intervals, size):
    """Uniform draws on a union of intervals, weighted by length."""
    iv = np.asarray(intervals, dtype=float).reshape(-1, 2)
    widths = iv[:, 1] - iv[:, 0]
    total = widths.sum()
    if total <= 0:
        pick = rng.integers(iv.shape[0], size=size)
        return iv[pick, 0]
    pos = rng.uniform(0.0, total, size=size)
    edges = np.cumsum(widths)
    which = np.minimum(np.searchsorted(edges, pos, side="right"), iv.shape[0] - 1)
    start = np.concatenate([[0.0], edges[:-1]])
    return iv[which, 0] + (pos - start[which])


def singular_values(r_star):
    k = np.arange(1, r_star + 1)
    return 5.0 + 5.0 * (r_star - k + 1)


def gen_truth(scn, rng):
    """Sparse left factors on consecutive blocks, right factors per study, d_k = 5 + 5(r* - k + 1)."""
    scn.validate()
    p, q, r = scn.p, scn.q, scn.r_star
    s = scn.s_left
    U = np.zeros((p, r))
    supports = []
    for k in range(r):
        block = np.arange(k * s, (k + 1) * s)
        U[block, k] = unif_values(rng, scn.Q_u, s)
        U[:, k] /= np.linalg.norm(U[:, k])
        supports.append(block)
    if scn.study == 1:
        V = qr_orthonormalize(unif_intervals(rng, scn.Q_v, (q, r)))
    else:
        V = np.zeros((q, r))
        for k in range(r):
            block = np.arange(k * scn.s_v, (k + 1) * scn.s_v)
            V[block, k] = unif_intervals(rng, scn.Q_v, scn.s_v)
            if scn.normalize_v:
                V[:, k] /= np.linalg.norm(V[:, k])
    d = singular_values(r)
    return GroundTruth(U, V, d, (U * d) @ V.T, supports)


def gen_design(truth, n, rng, rho=0.5):
    """n x p design whose latent block X U* is i.i.d. N(0, I).

    With P = (U*, U_perp) and Sigma = P' Gamma P, rows of X U_perp are drawn
    from the conditional law of x2 given x1 = X U*, then X = (X1, X2) P^-1.
    """
    U = truth.U
    p, r = U.shape
    U_perp = orthonormal_complement(U)
    P = np.hstack([U, U_perp])
    X1 = rng.standard_normal((n, r))
    if U_perp.shape[1] == 0:
        return np.linalg.solve(P.T, X1.T).T
    Gamma = ar1_covariance(p, rho)
    S = P.T @ Gamma @ P
    S11, S12 = S[:r, :r], S[:r, r:]
    S22 = S[r:, r:]
    try:
        B = np.linalg.solve(S11, S12).T
    except np.linalg.LinAlgError as exc:
        raise NumericError("latent covariance block is singular") from exc
    L = cholesky_psd(S22 - B @ S12)
    X2 = X1 @ B.T + rng.standard_normal((n, p - r)) @ L.T
    # P is orthogonal, so P^-1 = P'
    return np.hstack([X1, X2]) @ P.T


def implied_covariance(truth, rho=0.5):
    """Population covariance of the rows produced by ``gen_design``."""
    U = truth.U
    p, r = U.shape
    U_perp = orthonormal_complement(U)
    P = np.hstack([U, U_perp])
    if U_perp.shape[1] == 0:
        return P @ P.T
    S = P.T @ ar1_covariance(p, rho) @ P
    S11, S12, S22 = S[:r, :r], S[:r, r:], S[r:, r:]
    B = np.linalg.solve(S11, S12).T
    cond = S22 - B @ S12
    K = np.block([[np.eye(r), B.T], [B, B @ B.T + cond]])
    return P @ K @ P.T


def gen_response(X, truth, snr, rng):
    """Y = X C* + sigma E0, with sigma set so the weakest layer's signal over noise equals ``snr``."""
    if not snr > 0:
        raise InvalidInputError("snr must be positive")
    k = truth.r_star - 1
    signal = truth.d[k] * np.outer(X @ truth.U[:, k], truth.V[:, k])
    num = np.linalg.norm(signal)
    if num == 0:
        raise InvalidInputError("last layer carries no signal; SNR is undefined")
    E0 = rng.standard_normal((X.shape[0], truth.V.shape[0]))
    sigma = num / (snr * np.linalg.norm(E0))
    return X @ truth.C + sigma * E0, float(sigma)


def apply_missingness(Y_full, rate, rng):
    """Mask exactly round(rate * n * q) cells chosen uniformly without replacement."""
    if not 0 <= rate < 1:
        raise InvalidInputError("rate must lie in [0, 1)")
    Y_full = np.asarray(Y_full, dtype=float)
    total = Y_full.size
    count = int(round(rate * total))
    mask = np.ones(total, dtype=bool)
    if count:
        mask[rng.choice(total, size=count, replace=False)] = False
    return ObservedMatrix(Y_full, mask.reshape(Y_full.shape))


def simulate(scn):
    """One replicate of ``scn``; a pure function of (scenario, seed, replicate_id)."""
    truth = gen_truth(scn, rng_for(scn.seed, scn.replicate_id, "truth"))
    X = gen_design(truth, scn.n, rng_for(scn.seed, scn.replicate_id, "design"), scn.rho)
    Y, sigma = gen_response(X, truth, scn.snr, rng_for(scn.seed, scn.replicate_id, "noise"))
    obs = apply_missingness(Y, scn.missing_rate, rng_for(scn.seed, scn.replicate_id, "mask"))
    return SimDataset(X, Y, obs, truth, sigma, scn)
