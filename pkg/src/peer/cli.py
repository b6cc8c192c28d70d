"""Command-line entry point: ``peer simulate | fit | benchmark``.

Exit codes: 0 when every requested output was written, 2 for invalid input,
1 for I/O and other failures.
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path


from . import bench
from .io import read_design, read_response, truth_to_dict, write_json, write_matrix_csv
from .lasso import LassoOptions
from .linalg import InvalidInputError
from .model import fit_peer, model_to_dict, predict
from .simgen import SimScenario, simulate
from .svt import SvtConfig

log = logging.getLogger("peer")

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


def _threads(value):
    if value is None:
        value = os.environ.get("PEER_THREADS", "1")
    if str(value).lower() == "auto":
        return os.cpu_count() or 1
    try:
        n = int(value)
    except ValueError:
        raise InvalidInputError(f"--threads must be a positive integer or 'auto', got {value!r}") from None
    if n < 1:
        raise InvalidInputError("--threads must be >= 1")
    return n


def _seed(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _out(path):
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args):
    with open(args.scenario) as fh:
        doc = json.load(fh)
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.replicate is not None:
        doc["replicate_id"] = args.replicate
    scn = SimScenario.from_dict(doc)
    data = simulate(scn)
    out = _out(args.out)
    write_matrix_csv(out / "X.csv", data.X)
    write_matrix_csv(out / "Y.csv", data.Y_full, mask=data.obs.mask)
    write_matrix_csv(out / "C_star.csv", data.truth.C)
    write_json(out / "truth.json", truth_to_dict(data))
    log.info("wrote n=%d p=%d q=%d with %d missing cells to %s",
             scn.n, scn.p, scn.q, data.obs.mask.size - data.obs.m, out)
    return EXIT_OK


def cmd_fit(args):
    X = read_design(args.x)
    obs = read_response(args.y)
    if X.shape[0] != obs.shape[0]:
        raise InvalidInputError(f"X has {X.shape[0]} rows, Y has {obs.shape[0]}")
    threads = _threads(args.threads)
    model = fit_peer(obs, X, args.rank, svt=SvtConfig(args.rank, args.svt_tol), lasso=LassoOptions(),
                     grid_size=args.lasso_grid, threads=threads)
    out = _out(args.out)
    doc = model_to_dict(model)
    doc["config"]["seed"] = args.seed
    doc["config"]["x"] = str(args.x)
    doc["config"]["y"] = str(args.y)
    write_json(out / "model.json", doc)
    write_matrix_csv(out / "fitted.csv", predict(model, X))
    log.info("estimated rank %d of %d; supports %s", model.r_hat, model.rank,
             [len(l.support) for l in model.layers])
    return EXIT_OK


def cmd_benchmark(args):
    spec = bench.load_sweep(args.scenario, seed=args.seed)
    threads = _threads(args.threads)
    out = _out(args.out)
    rows = bench.run_sweep(spec, threads=threads)
    timing = not args.no_timing
    bench.write_results_csv(out / "results.csv", bench.summarize_rows(rows, spec), timing=timing)
    if args.tidy:
        bench.write_tidy_csv(out / "replicates.csv", rows, timing=timing)
    failed = sum(1 for r in rows if r["error"])
    if failed:
        log.warning("%d of %d replicates failed; see replicates.csv (--tidy) for messages", failed, len(rows))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="peer", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--threads", default=None, help="worker count or 'auto' (env PEER_THREADS)")
        p.add_argument("--seed", type=_seed, default=None)
        p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("simulate", help="generate X.csv, Y.csv and truth.json from a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--replicate", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit the model to X.csv / Y.csv")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--svt-tol", type=float, default=1e-4)
    p.add_argument("--lasso-grid", type=int, default=100)
    common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("benchmark", help="run a replicated simulation sweep")
    p.add_argument("--scenario", required=True, help="sweep JSON (lists allowed for n, p, snr, missing_rate)")
    p.add_argument("--tidy", action="store_true", help="also write per-replicate replicates.csv")
    p.add_argument("--no-timing", action="store_true", help="write NA for timing columns")
    common(p)
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (InvalidInputError, ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        log.error("invalid input: %s", exc)
        return EXIT_INVALID
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
