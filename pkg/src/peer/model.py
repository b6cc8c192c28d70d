"""Two-step estimator: low-rank initialization, then one sparse regression per layer.

Layer k regresses sqrt(n) * z_k on X with a GIC-tuned Lasso, takes v_k from
the initializer unchanged and rescales d_k by n^-1/2. The layers never share
mutable state, so they run on a thread pool and are joined by index.
"""

import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .lasso import LassoOptions, gic_select, lambda_path
from .linalg import InvalidInputError, SvdTriplet, as_matrix
from .masked import ObservedMatrix, column_means
from .svt import InitEstimate, SvtConfig, full_data_init, svt_initialize

log = logging.getLogger(__name__)

TRAILING_MODES = ("zero", "next")


@dataclass(frozen=True)
class LayerEstimate:
    k: int
    d_hat: float
    u_hat: np.ndarray
    v_hat: np.ndarray
    lam: float
    converged: bool = True
    seconds: float = 0.0

    @property
    def support(self):
        return np.flatnonzero(self.u_hat)

    def matrix(self):
        return self.d_hat * np.outer(self.u_hat, self.v_hat)


@dataclass
class PeerModel:
    layers: list
    r_hat: int
    C_hat: np.ndarray
    init: InitEstimate
    intercept: np.ndarray
    tau: float
    config: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def rank(self):
        return len(self.layers)

    def supports(self, count=None):
        count = self.rank if count is None else count
        return [self.layers[k].support if k < self.r_hat else np.array([], dtype=int) for k in range(count)]


def rank_threshold(n):
    """tau_n = log(log n) / log n."""
    if n < 3:
        raise InvalidInputError("rank threshold needs n >= 3")
    return math.log(math.log(n)) / math.log(n)


def estimate_rank(d_tilde, n, q, r=None, next_value=0.0, tau=None):
    """Largest k with (nq)^-1/2 (d_k - d_{k+1}) > tau; 0 if no gap clears it.

    ``next_value`` stands in for d_{r+1}.
    """
    d = np.asarray(d_tilde, dtype=float)
    if r is not None and r != d.shape[0]:
        raise InvalidInputError(f"expected {r} singular values, got {d.shape[0]}")
    if np.any(np.diff(d) > 1e-12 * max(1.0, d[0] if d.size else 1.0)):
        raise InvalidInputError("singular values must be in descending order")
    tau = rank_threshold(n) if tau is None else tau
    ext = np.append(d, float(next_value))
    gaps = (ext[:-1] - ext[1:]) / math.sqrt(n * q)
    hits = np.flatnonzero(gaps > tau)
    return int(hits[-1] + 1) if hits.size else 0


def assemble(layers, r_hat, p, q):
    C = np.zeros((p, q))
    for layer in layers[:r_hat]:
        C += layer.matrix()
    return C


def fit_layer(init, X, k, lambdas=None, grid_size=100, ratio=1e-3, opts=None, path_stop=True):
    """Estimate layer ``k`` (0-based) from the initial factors.

    With ``path_stop`` the lambda path ends at the first saturated fit
    (support of size n, or 99.9% of the response sum of squares explained).
    """
    t0 = time.perf_counter()
    n = X.shape[0]
    dfmax, dev_stop = (n - 1, 0.999) if path_stop else (None, None)
    z = math.sqrt(n) * init.Z[:, k]
    if lambdas is None:
        lambdas = lambda_path(X, z, grid_size, ratio, standardize=True)
    lam, fit = gic_select(X, z, lambdas, opts=opts, standardize=True, dfmax=dfmax, dev_stop=dev_stop)
    return LayerEstimate(
        k=k,
        d_hat=float(init.d[k]) / math.sqrt(n),
        u_hat=fit.coef,
        v_hat=init.V[:, k].copy(),
        lam=lam,
        converged=fit.converged,
        seconds=time.perf_counter() - t0,
    )


def fit_peer(obs, X, r, svt=None, lasso=None, grid_size=100, ratio=1e-3, threads=1,
             center=True, trailing="next", tau=None, path_stop=True):
    """Fit the multi-response model Y = X C + E from a partially observed Y.

    ``trailing`` picks the value standing in for d_{r+1} in the rank rule:
    ``"next"`` uses the (r+1)-th singular value of the completed response,
    ``"zero"`` uses 0.
    """
    if not isinstance(obs, ObservedMatrix):
        obs = ObservedMatrix.from_nan(obs)
    X = as_matrix(X, "X")
    n, q = obs.shape
    if X.shape[0] != n:
        raise InvalidInputError(f"X has {X.shape[0]} rows but Y has {n}")
    p = X.shape[1]
    if not 1 <= r <= min(n, p, q):
        raise InvalidInputError(f"rank {r} must lie in [1, min(n, p, q) = {min(n, p, q)}]")
    if trailing not in TRAILING_MODES:
        raise InvalidInputError(f"trailing must be one of {TRAILING_MODES}")
    svt = svt or SvtConfig(rank=r)
    if svt.rank != r:
        svt = SvtConfig(rank=r, tol=svt.tol, max_iter=svt.max_iter)
    lasso = lasso or LassoOptions()
    timings = {}

    y_mean = column_means(obs) if center else np.zeros(q)
    x_mean = X.mean(axis=0) if center else np.zeros(p)
    Xc = X - x_mean
    centered = ObservedMatrix(obs.values - y_mean, obs.mask)

    t0 = time.perf_counter()
    if centered.fully_observed:
        init = full_data_init(centered.values, r)
    else:
        init = svt_initialize(centered, svt)
    timings["init"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    dead = np.flatnonzero(np.einsum("ij,ij->j", Xc, Xc) == 0)
    if dead.size:
        raise InvalidInputError(f"design column(s) {dead.tolist()} are constant")

    def run(k):
        try:
            return fit_layer(init, Xc, k, grid_size=grid_size, ratio=ratio, opts=lasso, path_stop=path_stop)
        except Exception as exc:
            raise type(exc)(f"layer {k + 1}: {exc}") from exc

    if threads > 1 and r > 1:
        with ThreadPoolExecutor(max_workers=min(threads, r)) as pool:
            layers = list(pool.map(run, range(r)))
    else:
        layers = [run(k) for k in range(r)]
    timings["layers"] = time.perf_counter() - t0
    for layer in layers:
        if not layer.converged:
            log.warning("layer %d: lasso did not reach the KKT tolerance", layer.k + 1)

    tau = rank_threshold(n) if tau is None else tau
    nxt = init.next_singular_value if trailing == "next" else 0.0
    r_hat = estimate_rank(init.d, n, q, next_value=nxt, tau=tau)
    if r_hat == 0:
        log.warning("no singular value gap exceeds tau=%.4f; returning C_hat = 0", tau)
    C_hat = assemble(layers, r_hat, p, q)
    config = {
        "rank": r,
        "svt_tol": svt.tol,
        "svt_max_iter": svt.max_iter,
        "coord_tol": lasso.coord_tol,
        "max_sweeps": lasso.max_sweeps,
        "kkt_tol": lasso.kkt_tol,
        "lasso_grid": grid_size,
        "lasso_ratio": ratio,
        "center": center,
        "trailing": trailing,
        "path_stop": path_stop,
        "threads": threads,
    }
    return PeerModel(layers, r_hat, C_hat, init, y_mean - x_mean @ C_hat, tau, config, timings)


def predict(model, X_new):
    X_new = as_matrix(X_new, "X_new")
    if X_new.shape[1] != model.C_hat.shape[0]:
        raise InvalidInputError(f"X_new has {X_new.shape[1]} columns, model expects {model.C_hat.shape[0]}")
    return X_new @ model.C_hat + model.intercept


def model_to_dict(model):
    layers = []
    for layer in model.layers:
        idx = layer.support
        layers.append({
            "k": layer.k + 1,
            "d_hat": layer.d_hat,
            "lambda": layer.lam,
            "u_hat": {"index": idx.tolist(), "value": layer.u_hat[idx].tolist(), "length": int(layer.u_hat.size)},
            "v_hat": layer.v_hat.tolist(),
            "converged": layer.converged,
            "seconds": layer.seconds,
        })
    init = model.init
    return {
        "format": "peer-model/1",
        "p": int(model.C_hat.shape[0]),
        "q": int(model.C_hat.shape[1]),
        "rank": model.rank,
        "r_hat": model.r_hat,
        "tau": model.tau,
        "intercept": model.intercept.tolist(),
        "layers": layers,
        "init": {
            "iterations_used": init.iterations_used,
            "converged": init.converged,
            "final_relative_change": init.final_relative_change,
            "singular_values": init.d.tolist(),
            "next_singular_value": init.next_singular_value,
        },
        "config": model.config,
        "timings": model.timings,
    }


def model_from_dict(doc):
    p, q = doc["p"], doc["q"]
    layers = []
    for item in doc["layers"]:
        u = np.zeros(item["u_hat"]["length"])
        u[item["u_hat"]["index"]] = item["u_hat"]["value"]
        layers.append(LayerEstimate(
            k=item["k"] - 1,
            d_hat=item["d_hat"],
            u_hat=u,
            v_hat=np.asarray(item["v_hat"], dtype=float),
            lam=item["lambda"],
            converged=item.get("converged", True),
            seconds=item.get("seconds", 0.0),
        ))
    ini = doc["init"]
    d = np.asarray(ini["singular_values"], dtype=float)
    # factor matrices of the initializer are not serialized
    svd = SvdTriplet(np.zeros((0, d.size)), d, np.column_stack([l.v_hat for l in layers]) if layers else np.zeros((q, 0)))
    init = InitEstimate(svd, ini["iterations_used"], ini["converged"], ini["final_relative_change"],
                        ini.get("next_singular_value", 0.0))
    C = assemble(layers, doc["r_hat"], p, q)
    return PeerModel(layers, doc["r_hat"], C, init, np.asarray(doc["intercept"], dtype=float),
                     doc["tau"], doc.get("config", {}), doc.get("timings", {}))


def save_model(model, path):
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")


def load_model(path):
    with open(path) as fh:
        return model_from_dict(json.load(fh))
