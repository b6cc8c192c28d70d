"""Compare the compiled and pure-Python coordinate-descent backends.

Times a warm-started lambda path on synthetic designs of a few sizes, then a
full model fit on one simulated replicate, once per backend. Also checks
that both backends return the same coefficients.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--json out.json]
"""

import argparse
import json
import statistics
import sys
import time

import numpy as np

from peer import _cd_py, _kernels
from peer.lasso import lambda_path
from peer.model import fit_peer
from peer.simgen import SimScenario, simulate

try:
    from peer import _cd
except ImportError:
    _cd = None

SIZES = [(100, 200), (200, 400), (500, 1000)]


def backends():
    out = {"python": _cd_py.cd_path}
    if _cd is not None:
        out["cython"] = _cd.cd_path
    return out


def timed(fn, repeat):
    times = []
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), result


def path_case(n, p, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    X *= np.sqrt(n) / np.linalg.norm(X, axis=0)
    y = X[:, :5] @ rng.uniform(1, 2, 5) + rng.standard_normal(n)
    return np.asfortranarray(X), y, lambda_path(X, y, 100, 1e-2)


def bench_paths(repeat):
    rows = []
    for n, p in SIZES:
        X, y, lams = path_case(n, p)
        results = {}
        for name, fn in backends().items():
            secs, (coefs, sweeps, _) = timed(lambda: fn(X, y, lams, np.zeros(p), 1e-7, 1000, n - 1), repeat)
            results[name] = coefs
            rows.append({"case": f"path n={n} p={p}", "backend": name, "seconds": secs,
                         "sweeps": int(sweeps.sum())})
        if len(results) == 2:
            k = min(results["python"].shape[0], results["cython"].shape[0])
            gap = float(np.abs(results["python"][:k] - results["cython"][:k]).max())
            rows.append({"case": f"path n={n} p={p}", "backend": "max |diff|", "seconds": gap, "sweeps": 0})
    return rows


def bench_fit(repeat):
    data = simulate(SimScenario(n=100, p=200, q=100, snr=0.5, missing_rate=0.1, seed=1))
    rows = []
    saved = _kernels.cd_path
    try:
        for name, fn in backends().items():
            _kernels.cd_path = fn
            secs, model = timed(lambda: fit_peer(data.obs, data.X, 4), repeat)
            rows.append({"case": "fit n=100 p=200 q=100 r=4", "backend": name, "seconds": secs,
                         "r_hat": int(model.r_hat)})
    finally:
        _kernels.cd_path = saved
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", default=None, help="also write the rows as JSON")
    args = ap.parse_args(argv)
    if _cd is None:
        print("compiled backend not built; timing the Python fallback only", file=sys.stderr)
    rows = bench_paths(args.repeat) + bench_fit(args.repeat)
    print(f"{'case':<28}{'backend':<12}{'value':>12}")
    for row in rows:
        print(f"{row['case']:<28}{row['backend']:<12}{row['seconds']:>12.4g}")
    by_case = {}
    for row in rows:
        by_case.setdefault(row["case"], {})[row["backend"]] = row["seconds"]
    for case, t in by_case.items():
        if "python" in t and "cython" in t:
            print(f"{case}: speedup {t['python'] / t['cython']:.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
