"""Replicated simulation sweeps and the summary table.

A sweep crosses lists of n, p, snr and missing_rate; every cell runs the same
replicate ids, so all cells share each replicate's random substreams. Rows
are joined by (cell, replicate), which keeps the output independent of the
worker count.
"""

import csv
import json
import logging
import math
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product

import numpy as np

from .lasso import LassoOptions
from .linalg import InvalidInputError
from .metrics import FitScore, score_fit, summarize
from .model import fit_peer
from .simgen import SimScenario, simulate
from .svt import SvtConfig

log = logging.getLogger(__name__)

RESULT_COLUMNS = ["method", "p", "snr", "missing_rate", "er_c_e3", "er_xc", "fpr_pct", "fnr_pct", "time_s",
                  "n", "q", "replicates", "failures",
                  "er_c_e3_sd", "er_xc_sd", "fpr_pct_sd", "fnr_pct_sd", "time_s_sd", "r_hat_mean"]
TIDY_COLUMNS = ["method", "n", "p", "q", "snr", "missing_rate", "replicate", "er_c", "er_xc", "fpr", "fnr",
                "time_s", "r_hat", "error"]
SWEPT = ("n", "p", "snr", "missing_rate")


@dataclass(frozen=True)
class SweepSpec:
    base: SimScenario
    n: tuple
    p: tuple
    snr: tuple
    missing_rate: tuple
    replicates: int = 1
    rank: int | None = None
    svt_tol: float = 1e-4
    lasso_grid: int = 100
    lasso_ratio: float = 1e-3

    def cells(self):
        for n, p, snr, rate in product(self.n, self.p, self.snr, self.missing_rate):
            yield {"n": n, "p": p, "snr": snr, "missing_rate": rate}

    @property
    def fit_rank(self):
        return self.base.r_star + 1 if self.rank is None else self.rank


def _as_tuple(v):
    return tuple(v) if isinstance(v, (list, tuple)) else (v,)


def sweep_from_dict(doc, seed=None):
    doc = dict(doc)
    opts = {k: doc.pop(k) for k in ("replicates", "rank", "svt_tol", "lasso_grid", "lasso_ratio") if k in doc}
    swept = {k: _as_tuple(doc.pop(k)) for k in SWEPT if k in doc}
    for k in ("snr", "missing_rate"):
        if k in swept:
            swept[k] = tuple(float(v) for v in swept[k])
    if seed is not None:
        doc["seed"] = seed
    base = SimScenario.from_dict(doc)
    for k in SWEPT:
        swept.setdefault(k, (getattr(base, k),))
    spec = SweepSpec(base=base, **swept, **opts)
    if spec.replicates < 1:
        raise InvalidInputError("replicates must be >= 1")
    # validate every cell up front
    for cell in spec.cells():
        _scenario(spec, cell, 0)
    return spec


def load_sweep(path, seed=None):
    with open(path) as fh:
        return sweep_from_dict(json.load(fh), seed)


def _scenario(spec, cell, replicate):
    d = spec.base.to_dict()
    d.update(cell)
    d["replicate_id"] = replicate
    return SimScenario.from_dict(d)


def run_replicate(spec, cell, replicate):
    """Simulate, fit and score one replicate; failures become a row with ``error`` set."""
    row = {"method": "PEER", "replicate": replicate, "q": spec.base.q, **cell}
    try:
        data = simulate(_scenario(spec, cell, replicate))
        t0 = time.perf_counter()
        model = fit_peer(data.obs, data.X, spec.fit_rank, svt=SvtConfig(spec.fit_rank, spec.svt_tol),
                         lasso=LassoOptions(), grid_size=spec.lasso_grid, ratio=spec.lasso_ratio)
        elapsed = time.perf_counter() - t0
        score = score_fit(model, data.truth, data.X, elapsed)
        row.update(er_c=score.er_c, er_xc=score.er_xc, fpr=score.fpr, fnr=score.fnr,
                   time_s=elapsed, r_hat=score.r_hat, error="")
    except Exception as exc:
        log.error("replicate %d of %s failed: %s", replicate, cell, exc)
        row.update(er_c=math.nan, er_xc=math.nan, fpr=math.nan, fnr=math.nan, time_s=math.nan,
                   r_hat=-1, error=f"{type(exc).__name__}: {exc}")
        log.debug(traceback.format_exc())
    return row


def _run_task(args):
    return run_replicate(*args)


def run_sweep(spec, threads=1):
    """All replicate rows, ordered by cell then replicate id."""
    tasks = [(spec, cell, rep) for cell in spec.cells() for rep in range(spec.replicates)]
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_run_task, tasks, chunksize=1))
    else:
        rows = [_run_task(t) for t in tasks]
    return rows


def summarize_rows(rows, spec):
    table = []
    for cell in spec.cells():
        mine = [r for r in rows if all(r[k] == v for k, v in cell.items())]
        ok = [r for r in mine if not r["error"]]
        out = {"method": "PEER", **cell, "q": spec.base.q, "replicates": len(mine),
               "failures": len(mine) - len(ok)}
        if ok:
            stats = summarize([FitScore(r["er_c"], r["er_xc"], r["fpr"], r["fnr"], r["time_s"]) for r in ok])
            out.update(
                er_c_e3=stats["er_c"][0] * 1e3, er_c_e3_sd=stats["er_c"][1] * 1e3,
                er_xc=stats["er_xc"][0], er_xc_sd=stats["er_xc"][1],
                fpr_pct=stats["fpr"][0] * 100, fpr_pct_sd=stats["fpr"][1] * 100,
                fnr_pct=stats["fnr"][0] * 100, fnr_pct_sd=stats["fnr"][1] * 100,
                time_s=stats["runtime_seconds"][0], time_s_sd=stats["runtime_seconds"][1],
                r_hat_mean=float(np.mean([r["r_hat"] for r in ok])),
            )
        table.append(out)
    return table


def _fmt(value):
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "NA"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def write_results_csv(path, table, timing=True):
    """Summary table; with ``timing=False`` the time columns hold ``NA`` so reruns are byte-identical."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for row in table:
            vals = []
            for col in RESULT_COLUMNS:
                v = row.get(col)
                if col.startswith("time_s") and not timing:
                    v = None
                vals.append(_fmt(v))
            w.writerow(vals)


def write_tidy_csv(path, rows, timing=True):
    """One line per replicate, for boxplots of the score distributions."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TIDY_COLUMNS)
        for row in rows:
            w.writerow([_fmt(None if (c == "time_s" and not timing) else row.get(c))
                        for c in TIDY_COLUMNS])


def read_results_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


STUDY1_DEFAULT = {
    "study": 1, "n": 100, "q": 100, "r_star": 3, "s": 4,
    "p": [200, 400], "snr": [0.25, 0.5], "missing_rate": [0.0, 0.05, 0.1, 0.15],
    "replicates": 200, "seed": 2024,
}
STUDY2_DEFAULT = {
    "study": 2, "n": 200, "q": 100, "r_star": 3, "s_u": 4, "s_v": 5,
    "p": [200, 400], "snr": [0.5, 1.0], "missing_rate": 0.1,
    "replicates": 200, "seed": 2024,
}
